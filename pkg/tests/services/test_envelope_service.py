import numpy as np
import pytest

from mqpsh.core.errors import InputError, UnboundedFieldError
from mqpsh.models.grid import NEG_INF, BoxGrid, ScalarField, squared_norm
from mqpsh.models.kernel import Kernel
from mqpsh.services.envelope_service import envelope_service, lower_envelope_1d


def _random_field(rng, grid: BoxGrid, neg_inf_share: float = 0.1) -> ScalarField:
    values = rng.uniform(-1.0, 1.0, grid.size)
    values[rng.random(grid.size) < neg_inf_share] = NEG_INF
    if not np.isfinite(values).any():
        values[0] = 0.0
    return ScalarField(grid, values).with_upper_bound()


def _same(a: np.ndarray, b: np.ndarray, atol: float) -> bool:
    if not np.array_equal(np.isfinite(a), np.isfinite(b)):
        return False
    finite = np.isfinite(a)
    return bool(np.all(np.abs(a[finite] - b[finite]) <= atol))


def test_lower_envelope_1d():
    pos = np.array([0.0, 1.0, 2.0, 3.0])
    f = np.array([0.0, np.inf, 5.0, 0.0])
    g, src = lower_envelope_1d(pos, f, 1.0)
    assert g.tolist() == [0.0, 1.0, 1.0, 0.0]
    assert src[0] == 0 and src[3] == 3
    g, src = lower_envelope_1d(pos, np.full(4, np.inf), 1.0)
    assert np.all(src == -1)


def test_fast_matches_bruteforce_on_a_small_field(rng):
    grid = BoxGrid(1, (-1.0, -0.5), (1.0, 0.5), (13, 7))
    u = _random_field(rng, grid)
    fast = envelope_service.moreau_envelope_fast(u, 3.0)
    brute = envelope_service.sup_convolve_bruteforce(u, Kernel.quadratic(3.0))
    assert _same(fast.values.values, brute.values.values, 1e-9)
    assert fast.engine == "fast"


def test_envelope_of_neg_inf_is_neg_inf(line_grid):
    u = ScalarField.neg_inf(line_grid)
    kernel = Kernel.quadratic(1.0)
    result = envelope_service.envelope(u, kernel)
    assert result.values.is_neg_inf
    assert not result.attained.any()
    assert envelope_service.check_envelope_axioms(u, kernel, result).passed


@pytest.mark.parametrize("theta", [0.5, 2.0, 10.0])
def test_axioms_semiconvexity_and_radius_bound(theta, line_grid, rng):
    u = _random_field(rng, line_grid)
    kernel = Kernel.quadratic(theta)
    result = envelope_service.envelope(u, kernel)
    axioms = envelope_service.check_envelope_axioms(u, kernel, result)
    assert axioms.passed, axioms.clauses
    assert [c.status for c in axioms.clauses] == ["PASS"] * 4
    assert envelope_service.semiconvexity_check(result.values, theta).passed
    assert envelope_service.radius_bound_check(u, theta, result).passed


def test_semiconvexity_fails_below_the_kernel_constant(line_grid, sample):
    u, _ = sample("neg_normsq", line_grid)
    report = envelope_service.semiconvexity_check(u, 0.5)
    assert not report.passed
    assert envelope_service.semiconvexity_check(u, 1.0).passed


def test_radial_kernel_uses_bruteforce(line_grid, sample):
    u, _ = sample("normsq", line_grid)
    kernel = Kernel.radial(lambda t: -np.asarray(t, dtype=float), name="neg_t")
    result = envelope_service.envelope(u, kernel)
    assert result.engine == "bruteforce"
    assert envelope_service.check_envelope_axioms(u.with_upper_bound(), kernel, result).passed


def test_bruteforce_on_a_coarser_query_grid(line_grid, sample):
    u, _ = sample("normsq", line_grid)
    query = BoxGrid.cube(1, 0.5, 5)
    result = envelope_service.sup_convolve_bruteforce(u, Kernel.quadratic(1.0), query=query)
    assert result.query_grid == query
    report = envelope_service.check_envelope_axioms(u, Kernel.quadratic(1.0), result)
    assert report.clauses[0].status == "SKIP"
    assert report.passed


def test_theta_family_needs_bounds(line_grid):
    with pytest.raises(UnboundedFieldError):
        envelope_service.theta_family(ScalarField.constant(line_grid, 0.0), [1.0, 2.0])
    u = ScalarField.constant(line_grid, 0.0).with_upper_bound()
    with pytest.raises(InputError):
        envelope_service.theta_family(u, [2.0, 1.0])


def test_theta_family_is_monotone(line_grid, sample):
    u, _ = sample("log1p_normsq", line_grid)
    thetas = [2.0 ** k for k in range(9)]
    results, report = envelope_service.theta_family(u.with_upper_bound(), thetas)
    assert report.passed
    assert report.monotone_violations == 0
    gap_8 = results[3].values.values - u.values
    gap_256 = results[8].values.values - u.values
    assert np.all(gap_256 <= gap_8 + 1e-12)


def test_isolated_neg_inf_node_sinks(line_grid, sample):
    u, _ = sample("char", line_grid, radius=0.3)
    corner = 0
    finite = np.flatnonzero(u.finite_mask)
    d2 = float(squared_norm(line_grid.points()[finite] - line_grid.coords(corner)).min())
    result = envelope_service.moreau_envelope_fast(u, 1e7 / d2)
    assert result.values.at(corner) < -1e6
    _, report = envelope_service.theta_family(u.with_upper_bound(), [1.0, 2.0, 4.0], floor=-0.5)
    assert report.floor_crossings == sorted(report.floor_crossings)


@pytest.mark.slow
def test_fast_matches_bruteforce_on_random_fields(rng):
    for _ in range(50):
        counts = tuple(int(c) for c in rng.integers(8, 65, size=2))
        grid = BoxGrid(1, (-1.0, -1.0), (1.0, 1.0), counts)
        u = _random_field(rng, grid, neg_inf_share=float(rng.uniform(0.0, 0.5)))
        theta = float(rng.uniform(0.5, 20.0))
        fast = envelope_service.moreau_envelope_fast(u, theta)
        brute = envelope_service.sup_convolve_bruteforce(u, Kernel.quadratic(theta))
        assert _same(fast.values.values, brute.values.values, 1e-9)


@pytest.mark.slow
def test_axioms_on_random_bounded_fields(rng):
    for trial in range(100):
        grid = BoxGrid.cube(1, 1.0, int(rng.integers(5, 25)))
        u = _random_field(rng, grid, neg_inf_share=0.2)
        for theta in (0.5, 2.0, 10.0):
            kernel = Kernel.quadratic(theta)
            result = envelope_service.envelope(u, kernel)
            assert envelope_service.check_envelope_axioms(u, kernel, result).passed, (trial, theta)
            assert envelope_service.semiconvexity_check(result.values, theta, seed=trial).passed, (trial, theta)
            assert envelope_service.radius_bound_check(u, theta, result).passed, (trial, theta)


def test_envelope_is_monotone_in_the_field(line_grid, rng):
    for _ in range(10):
        u = _random_field(rng, line_grid)
        lift = rng.uniform(0.0, 0.5, line_grid.size)
        v = ScalarField(line_grid, np.maximum(u.values, rng.uniform(-1.0, 1.0, line_grid.size)) + lift)
        low = envelope_service.moreau_envelope_fast(u, 2.0).values.values
        high = envelope_service.moreau_envelope_fast(v, 2.0).values.values
        assert np.all(high >= low - 1e-12)


def test_envelope_commutes_with_grid_shifts(line_grid, rng):
    shift = 3
    for _ in range(10):
        values = _random_field(rng, line_grid).reshaped().copy()
        values[-shift:, :] = NEG_INF
        shifted = np.roll(values, shift, axis=0)
        u = ScalarField(line_grid, values.ravel()).with_upper_bound()
        moved = ScalarField(line_grid, shifted.ravel()).with_upper_bound()
        env = envelope_service.moreau_envelope_fast(u, 5.0).values.reshaped()
        env_moved = envelope_service.moreau_envelope_fast(moved, 5.0).values.reshaped()
        assert _same(env_moved[shift:, :], env[:-shift, :], atol=1e-12)


def test_envelope_commutes_with_adding_a_constant(line_grid, rng):
    u = _random_field(rng, line_grid)
    raised = ScalarField(line_grid, u.values + 0.75)
    env = envelope_service.moreau_envelope_fast(u, 3.0).values.values
    env_raised = envelope_service.moreau_envelope_fast(raised, 3.0).values.values
    assert _same(env_raised, env + 0.75, atol=1e-12)
