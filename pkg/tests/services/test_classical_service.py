import numpy as np
import pytest

from mqpsh.core.errors import GridError, InputError
from mqpsh.models.grid import ScalarField
from mqpsh.models.probe import SliceSpec
from mqpsh.services.classical_service import ball_masks, band_width, classical_service
from mqpsh.services.field_service import field_service
from mqpsh.services.qpsh_service import qpsh_service


def test_band_width_covers_half_the_cell_diagonal():
    assert band_width(np.array([0.1, 0.1])) == pytest.approx(0.1)
    assert band_width(np.array([0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1, 0.1])) == pytest.approx(0.5 * np.sqrt(0.08))


def test_ball_masks_split_core_and_band():
    pts = np.array([[0.0, 0.0], [0.1, 0.0], [0.2, 0.0], [0.3, 0.0], [0.4, 0.0]])
    core, band = ball_masks(pts, 0.2, 0.1)
    assert core.tolist() == [True, False, False, False, False]
    assert band.tolist() == [False, True, True, True, False]


def test_default_slices(line_grid, agreement_grid):
    assert len(classical_service.default_slices(line_grid, 0)) == 15 * 15
    assert classical_service.default_slices(line_grid, 1) == []
    assert len(classical_service.default_slices(line_grid, 0, stride=2)) == 8 * 8
    per_axis = 3 * 3 * 9 * 9
    # four diagonal directions, each keeping three nodes clear on all four real axes
    per_diagonal = 3 ** 4
    assert len(classical_service.default_slices(agreement_grid, 0)) == 2 * per_axis + 4 * per_diagonal
    assert len(classical_service.default_slices(agreement_grid, 0, rotated=False)) == 2 * per_axis
    assert len(classical_service.default_slices(agreement_grid, 1)) == 3 ** 4
    with pytest.raises(InputError):
        classical_service.default_slices(line_grid, 0, stride=0)


def test_region_limits_the_bases(line_grid):
    region = np.zeros(line_grid.size, dtype=bool)
    centre = int(line_grid.ravel([10, 10]))
    region[:] = np.sqrt(np.sum((line_grid.points() - line_grid.coords(centre)) ** 2, axis=1)) <= 0.3 + 1e-9
    slices = classical_service.default_slices(line_grid, 0, region=region)
    assert len(slices) == 1
    assert np.allclose(slices[0].base, 0.0)


def test_trivial_levels(line_grid, sample):
    u, _ = sample("neg_normsq", line_grid)
    verdict = classical_service.classical_qpsh_oracle(u, 1)
    assert verdict.passed and "q >= n" in verdict.note
    assert classical_service.classical_qpsh_oracle(ScalarField.neg_inf(line_grid), 0).passed
    with pytest.raises(InputError):
        classical_service.classical_qpsh_oracle(u, -1)


def test_slice_dimension_must_match_the_level(agreement_grid, sample):
    u, _ = sample("normsq", agreement_grid)
    wrong = [SliceSpec.axis_aligned(np.zeros(2), [0, 1], 0.5)]
    with pytest.raises(GridError):
        classical_service.classical_qpsh_oracle(u, 0, slices=wrong)


def test_psh_field_passes(line_grid, sample):
    u, _ = sample("log1p_normsq", line_grid)
    verdict = classical_service.classical_qpsh_oracle(u, 0)
    assert verdict.passed
    assert verdict.checked > 0


def test_concave_field_fails_with_a_replayable_witness(line_grid, sample):
    u, _ = sample("neg_normsq", line_grid)
    verdict = classical_service.classical_qpsh_oracle(u, 0)
    assert not verdict.passed
    witness = verdict.witness
    assert witness.kind == "classical"
    assert witness.slice_index == 0
    assert witness.gap > 0
    assert qpsh_service.replay_witness(u, verdict)

    v, _ = sample("normsq", line_grid)
    assert not qpsh_service.replay_witness(v, verdict)


def test_single_slice_ball_test(line_grid, sample):
    u, _ = sample("neg_normsq", line_grid)
    spec = SliceSpec.axis_aligned(np.zeros(1), [0], 0.2)
    pool = classical_service.default_polys(1)
    core_max, band_max = classical_service.ball_test(u, spec, 0.2, pool[0])
    assert core_max == 0.0
    assert band_max == pytest.approx(-0.01)


def test_diagonal_slices_lead_with_coordinate_slices(agreement_grid):
    slices = classical_service.default_slices(agreement_grid, 0)
    axis_count = sum(1 for s in slices if s.axes() is not None)
    assert axis_count == 2 * 3 * 3 * 9 * 9
    assert all(s.axes() is not None for s in slices[:axis_count])
    tilted = slices[axis_count:]
    columns = {tuple(np.round(s.frame[:, 0] * np.sqrt(2.0), 12)) for s in tilted}
    assert columns == {(1, 1), (1, -1), (1, 1j), (1, -1j)}
    for s in tilted[:5]:
        assert not field_service.slice_lookup(agreement_grid, s, s.ball_radius + 0.3)[2]


def test_rotated_saddle_fails_only_on_a_diagonal_slice(agreement_grid, sample):
    u, _ = sample("rotated_saddle", agreement_grid)
    assert classical_service.classical_qpsh_oracle(u, 0, slices=classical_service.default_slices(agreement_grid, 0, rotated=False)).passed
    verdict = classical_service.classical_qpsh_oracle(u, 0)
    assert not verdict.passed
    spec = classical_service.default_slices(agreement_grid, 0)[verdict.witness.slice_index]
    assert spec.axes() is None
    assert qpsh_service.replay_witness(u, verdict)
    assert classical_service.classical_qpsh_oracle(u, 1).passed
