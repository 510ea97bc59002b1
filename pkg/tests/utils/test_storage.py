import json

import numpy as np
import pytest

from mqpsh.core.errors import ConfigError
from mqpsh.models.gridset import GridSet
from mqpsh.schemas.report import IdentityReport
from mqpsh.utils.storage import read_field_csv, read_mask_csv, sidecar_path, write_field_csv, write_mask_csv, write_report


def test_field_csv_keeps_neg_inf_and_sidecar(tmp_path, line_grid, sample):
    u, _ = sample("char", line_grid, radius=0.5)
    u = u.with_upper_bound()
    path = write_field_csv(u, tmp_path / "fields" / "char.csv")

    text = path.read_text(encoding="utf-8")
    assert text.splitlines()[0] == "index_0,index_1,coord_0,coord_1,value"
    assert text.splitlines()[1] == "0,0,-1.0,-1.0,-inf"
    assert text.splitlines()[2].startswith("0,1,-1.0,")
    assert ",-inf\n" in text
    assert "\r" not in text
    sidecar = json.loads(sidecar_path(path).read_text(encoding="utf-8"))
    assert sidecar["grid"]["counts"] == [21, 21]
    assert sidecar["upper_bound"] == 0.0

    back = read_field_csv(path)
    assert back.grid == line_grid
    np.testing.assert_array_equal(back.values, u.values)
    assert back.upper_bound == 0.0


def test_missing_sidecar(tmp_path, line_grid, sample):
    u, _ = sample("normsq", line_grid)
    path = write_field_csv(u, tmp_path / "u.csv")
    sidecar_path(path).unlink()
    with pytest.raises(ConfigError):
        read_field_csv(path)
    np.testing.assert_array_equal(read_field_csv(path, line_grid).values, u.values)


def test_bad_rows_name_the_line(tmp_path, line_grid, sample):
    u, _ = sample("normsq", line_grid)
    path = write_field_csv(u, tmp_path / "u.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    lines[3] = lines[3].rsplit(",", 1)[0] + ",abc"
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        read_field_csv(path)
    assert exc.value.location == f"{path}:4"


@pytest.mark.parametrize("bad", ["nan", "NaN", "inf", "+inf"])
def test_field_csv_rejects_nan_and_pos_inf(bad, tmp_path, line_grid, sample):
    u, _ = sample("normsq", line_grid)
    path = write_field_csv(u, tmp_path / "u.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    lines[5] = lines[5].rsplit(",", 1)[0] + "," + bad
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        read_field_csv(path)
    assert exc.value.location == f"{path}:6"


def test_row_count_and_header_are_checked(tmp_path, line_grid, sample):
    u, _ = sample("normsq", line_grid)
    path = write_field_csv(u, tmp_path / "u.csv")
    lines = path.read_text(encoding="utf-8").splitlines()

    path.write_text("\n".join(lines[:-1]) + "\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_field_csv(path)

    path.write_text("\n".join(["node,value"] + lines[1:]) + "\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_field_csv(path)


def test_field_csv_round_trip_in_two_variables(tmp_path, agreement_grid, sample):
    u, _ = sample("rotated_saddle", agreement_grid)
    path = write_field_csv(u, tmp_path / "saddle.csv")
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0] == ",".join([f"index_{k}" for k in range(4)] + [f"coord_{k}" for k in range(4)] + ["value"])
    node = 1234
    row = lines[node + 1].split(",")
    assert [int(c) for c in row[:4]] == agreement_grid.unravel(node).tolist()
    np.testing.assert_array_equal([float(c) for c in row[4:8]], agreement_grid.coords(node))

    # rows may come in any order
    body = lines[1:]
    shuffled = [body[i] for i in np.random.default_rng(3).permutation(len(body))]
    path.write_text("
".join([lines[0]] + shuffled) + "
", encoding="utf-8")
    np.testing.assert_array_equal(read_field_csv(path).values, u.values)


def test_field_rows_must_name_their_node(tmp_path, line_grid, sample):
    u, _ = sample("normsq", line_grid)
    path = write_field_csv(u, tmp_path / "u.csv")
    lines = path.read_text(encoding="utf-8").splitlines()

    duplicate = lines[:3] + [lines[2]] + lines[4:]
    path.write_text("
".join(duplicate) + "
", encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        read_field_csv(path)
    assert exc.value.location == f"{path}:4"

    moved = lines[:]
    parts = moved[5].split(",")
    parts[2] = "0.5"
    moved[5] = ",".join(parts)
    path.write_text("
".join(moved) + "
", encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        read_field_csv(path)
    assert exc.value.location == f"{path}:6"

    outside = lines[:]
    outside[2] = "0,21" + outside[2][3:]
    path.write_text("
".join(outside) + "
", encoding="utf-8")
    with pytest.raises(ConfigError):
        read_field_csv(path)


def test_mask_csv(tmp_path, line_grid):
    X = GridSet.ball(line_grid, [0.0, 0.0], 0.3)
    path = write_mask_csv(X, tmp_path / "mask.csv")
    back = read_mask_csv(path)
    np.testing.assert_array_equal(back.mask, X.mask)

    path.write_text("index,member\n0,1\n5,2\n", encoding="utf-8")
    with pytest.raises(ConfigError) as exc:
        read_mask_csv(path)
    assert exc.value.location == f"{path}:3"

    path.write_text("index,member\n0,1\n7,1\n", encoding="utf-8")
    assert read_mask_csv(path).count == 2


def test_report_json(tmp_path):
    path = write_report(IdentityReport(nodes=4, mismatches=0, max_error=0.0), tmp_path / "r" / "identity.json")
    assert json.loads(path.read_text(encoding="utf-8")) == {"nodes": 4, "mismatches": 0, "max_error": 0.0}
