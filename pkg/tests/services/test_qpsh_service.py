import numpy as np
import pytest

from mqpsh.core.errors import GridError, InputError, NonSmoothPointError, PreconditionError
from mqpsh.models.grid import BoxGrid, ScalarField
from mqpsh.models.kernel import Kernel
from mqpsh.models.matrix import HermitianMatrix
from mqpsh.services.catalog_service import catalog_service
from mqpsh.services.classical_service import classical_service
from mqpsh.services.field_service import field_service
from mqpsh.services.qpsh_service import qpsh_service
from mqpsh.services.viscosity_service import viscosity_service

AGREEMENT_TABLE = [
    ("normsq", {}, "PASS", "PASS"),
    ("neg_normsq", {}, "FAIL", "FAIL"),
    ("saddle_q1", {}, "FAIL", "PASS"),
    ("rotated_saddle", {}, "FAIL", "PASS"),
    ("pluriharmonic", {}, "PASS", "PASS"),
    ("im4", {}, "PASS", "PASS"),
    ("im4_abs", {}, "PASS", "PASS"),
    ("neg_z1sq", {}, "FAIL", "PASS"),
    ("neg_abs_re", {}, "FAIL", "PASS"),
    ("max_re", {}, "PASS", "PASS"),
    ("log1p_normsq", {}, "PASS", "PASS"),
    ("exp_re", {}, "PASS", "PASS"),
    ("char", {"radius": 0.25}, "FAIL", "FAIL"),
]


def test_smooth_index(agreement_grid):
    report = qpsh_service.smooth_qpsh_index(catalog_service.build("saddle_q1"), agreement_grid)
    assert report.q_star == 1
    assert report.checked == 7 ** 4
    assert len(report.worst_nodes) == report.checked
    assert qpsh_service.smooth_verdict(report, 0).status == "FAIL"
    assert qpsh_service.smooth_verdict(report, 1).status == "PASS"


def test_smooth_index_reports_kinks(agreement_grid):
    with pytest.raises(NonSmoothPointError):
        qpsh_service.smooth_qpsh_index(catalog_service.build("im4_abs"), agreement_grid)


def test_agreement_needs_an_input():
    with pytest.raises(InputError):
        qpsh_service.checker_agreement(0)


def test_agreement_skips_smooth_checker_on_kinks(line_grid):
    fn = catalog_service.build("im4_abs")
    report = qpsh_service.checker_agreement(0, f=fn, grid=line_grid)
    assert "smooth" not in report.verdicts
    assert report.note.startswith("smooth checker skipped")
    assert report.agree


@pytest.mark.slow
@pytest.mark.parametrize("name, params, at_q0, at_q1", AGREEMENT_TABLE)
def test_checkers_agree_on_the_curated_suite(name, params, at_q0, at_q1, agreement_grid):
    fn = catalog_service.build(name, params)
    u = field_service.sample(fn, agreement_grid)
    for q, expected in ((0, at_q0), (1, at_q1), (2, "PASS")):
        report = qpsh_service.checker_agreement(q, u=u, f=fn if fn.smooth else None)
        assert report.agree, (q, report.verdicts)
        assert set(report.verdicts.values()) == {expected}, (q, report.verdicts)
        if fn.smooth:
            assert "smooth" in report.verdicts


def test_strict_check_on_a_strictly_psh_field(line_grid, sample):
    u, _ = sample("normsq", line_grid)
    report = qpsh_service.strict_qpsh_check(u, 0, [0.5, 2.0], 0.3, nodes=[int(line_grid.ravel([10, 10]))])
    assert report.all_passed
    assert report.epsilons == [2.0, 0.5]
    assert report.nodes[0].best_epsilon == 0.5


def test_strict_check_arguments(line_grid, sample):
    u, _ = sample("normsq", line_grid)
    with pytest.raises(GridError):
        qpsh_service.strict_qpsh_check(u, 0, [1.0], 0.3, nodes=[0])
    with pytest.raises(InputError):
        qpsh_service.strict_qpsh_check(u, 0, [], 0.3)
    with pytest.raises(InputError):
        qpsh_service.strict_qpsh_check(u, 0, [1.0], 0.0)
    with pytest.raises(GridError):
        qpsh_service.strict_qpsh_check(u, 0, [1.0], 0.15, nodes=[int(line_grid.ravel([10, 10]))])


def test_ball_nodes(line_grid):
    nodes = qpsh_service.ball_nodes(line_grid, 0.5)
    assert nodes.size == 11 * 11


@pytest.mark.slow
def test_strictness_fails_on_the_real_axis():
    grid = BoxGrid.cube(1, 0.025, 51)
    u = field_service.sample(catalog_service.build("im4_abs"), grid)
    fits = qpsh_service.ball_nodes(grid, 0.02)
    on_axis = [int(k) for k in fits if abs(grid.coords(k)[1]) < 1e-12]
    picks = np.unique(np.linspace(0, len(on_axis) - 1, 9).round().astype(int))
    nodes = [on_axis[i] for i in picks]
    report = qpsh_service.strict_qpsh_check(u, 0, [1e-3, 1e-2, 1e-1, 1.0], 0.02, sub_radius=0.006, nodes=nodes)
    assert report.failed_count == len(nodes) == 9


def test_falsifier_passes_without_touching_the_real_axis():
    grid = BoxGrid.cube(1, 1.0, 41)
    u = field_service.sample(catalog_service.build("im4_abs"), grid)
    verdict = viscosity_service.viscosity_falsifier(u, 0, record_touches=True)
    assert verdict.passed
    assert all(abs(grid.coords(t.point_index)[1]) > 1e-12 for t in verdict.touch_points)


def test_magic_property_in_one_variable(line_grid, sample):
    u, _ = sample("im4_abs", line_grid)
    report, F = qpsh_service.magic_property_harness(u, 0, Kernel.quadratic(2.0))
    assert report.passed
    assert not report.vacuous and report.w_size > 0
    assert report.finite_on_w
    assert F.grid == line_grid


def test_magic_property_with_quadratic_shifts(line_grid, sample):
    u, _ = sample("im4_abs", line_grid)
    A = HermitianMatrix.diag([0.5])
    report, _ = qpsh_service.magic_property_harness(u, 0, Kernel.quadratic(2.0), A=A)
    assert report.passed


def test_magic_property_preconditions(line_grid, sample):
    u, _ = sample("normsq", line_grid)
    A = HermitianMatrix.diag([1.0])
    with pytest.raises(PreconditionError):
        qpsh_service.magic_property_harness(u, 0, Kernel.quadratic(2.0), A=A, G=HermitianMatrix.zeros(1))
    with pytest.raises(PreconditionError):
        qpsh_service.magic_property_harness(u, 0, Kernel.quadratic(2.0), A=A, H=HermitianMatrix.diag([2.0]))
    radial = Kernel.radial(lambda t: -np.asarray(t, dtype=float))
    with pytest.raises(PreconditionError):
        qpsh_service.magic_property_harness(u, 0, radial)


def test_magic_property_on_neg_inf(line_grid):
    report, F = qpsh_service.magic_property_harness(ScalarField.neg_inf(line_grid), 0, Kernel.quadratic(1.0))
    assert report.vacuous and report.passed
    assert F is None


def test_strict_preservation(line_grid, sample):
    u, _ = sample("normsq", line_grid)
    report = qpsh_service.strict_preservation_harness(u, 0, Kernel.quadratic(2.0), [1.0], 0.3, sub_radius=0.2)
    assert report.strict is not None
    assert report.passed


def test_replay_needs_a_witness(line_grid, sample):
    u, _ = sample("normsq", line_grid)
    verdict = classical_service.classical_qpsh_oracle(u, 0)
    with pytest.raises(InputError):
        qpsh_service.replay_witness(u, verdict)


@pytest.mark.slow
@pytest.mark.parametrize("name, q, expected", [("normsq", 0, "PASS"), ("saddle_q1", 0, "FAIL"), ("saddle_q1", 1, "PASS")])
def test_verdicts_are_local_to_sub_boxes(name, q, expected, agreement_grid):
    fn = catalog_service.build(name)
    u = field_service.sample(fn, agreement_grid)
    sub = BoxGrid.cube(2, 0.75, 7)
    nodes, err = agreement_grid.nearest_index(sub.points())
    assert err.max() <= 1e-9
    restricted = ScalarField(sub, u.values[nodes])
    assert np.allclose(restricted.values, field_service.sample(fn, sub).values, atol=1e-12)
    report = qpsh_service.checker_agreement(q, u=restricted, f=fn)
    assert report.agree, report.verdicts
    assert set(report.verdicts.values()) == {expected}


@pytest.mark.slow
def test_decreasing_limits_keep_the_level(agreement_grid):
    saddle = field_service.sample(catalog_service.build("saddle_q1"), agreement_grid).values
    bowl = field_service.sample(catalog_service.build("normsq"), agreement_grid).values
    sequence = [ScalarField(agreement_grid, np.maximum(saddle, bowl - 1.0 + 2.0 ** -k)) for k in range(1, 5)]
    limit = field_service.monotone_limit(sequence)
    assert np.allclose(limit.values, np.maximum(saddle, bowl - 1.0 + 2.0 ** -4))
    for u in (sequence[0], limit):
        report = qpsh_service.checker_agreement(1, u=u)
        assert set(report.verdicts.values()) == {"PASS"}, report.verdicts
