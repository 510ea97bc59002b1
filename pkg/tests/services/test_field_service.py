import numpy as np
import pytest

from mqpsh.core.errors import GridError, InputError
from mqpsh.models.grid import NEG_INF, BoxGrid, ScalarField
from mqpsh.models.probe import SliceSpec
from mqpsh.services.field_service import field_service


def test_sample_normsq(line_grid, sample):
    u, _ = sample("normsq", line_grid)
    assert u.reshaped()[10, 10] == 0.0
    assert u.reshaped()[0, 0] == pytest.approx(2.0)


def test_sample_rejects_bad_output(line_grid):
    with pytest.raises(InputError):
        field_service.sample(lambda z: np.zeros(3), line_grid)
    with pytest.raises(InputError):
        field_service.sample(lambda z: np.full(z.shape[0], np.nan), line_grid)


def test_axis_aligned_slice_is_exact(agreement_grid, sample):
    u, _ = sample("normsq", agreement_grid)
    spec = SliceSpec.axis_aligned(np.zeros(2), [1], 0.5)
    slice_grid, _, approximate = field_service.slice_lookup(agreement_grid, spec)
    assert not approximate
    assert slice_grid.counts == (7, 7)
    restricted = field_service.restrict_to_slice(u, spec)
    w = slice_grid.points()
    assert np.allclose(restricted.values, np.sum(w * w, axis=1))


def test_diagonal_slice_lands_on_nodes(agreement_grid, sample):
    u, _ = sample("normsq", agreement_grid)
    for phase in (1.0, -1.0, 1j, -1j):
        frame = np.array([[1.0], [phase]]) / np.sqrt(2.0)
        spec = SliceSpec(np.zeros(2), frame, 0.25)
        steps, on_nodes = field_service.slice_spacing(agreement_grid, spec)
        assert on_nodes
        assert np.allclose(steps, 0.25 * np.sqrt(2.0))
        slice_grid, _, approximate = field_service.slice_lookup(agreement_grid, spec)
        assert not approximate
        assert slice_grid.counts == (5, 5)
        restricted = field_service.restrict_to_slice(u, spec)
        w = slice_grid.points()
        assert np.allclose(restricted.values, np.sum(w * w, axis=1))


def test_generic_tilted_slice_is_approximate(agreement_grid):
    frame = np.array([[0.6], [0.8j]])
    spec = SliceSpec(np.zeros(2), frame, 0.25)
    steps, on_nodes = field_service.slice_spacing(agreement_grid, spec)
    assert not on_nodes
    assert np.allclose(steps, 0.25)
    _, _, approximate = field_service.slice_lookup(agreement_grid, spec)
    assert approximate


def test_slice_leaving_the_box(agreement_grid):
    spec = SliceSpec.axis_aligned(np.array([1.0 + 1.0j, 0.0]), [0], 0.5)
    with pytest.raises(GridError):
        field_service.slice_lookup(agreement_grid, spec)


def test_usc_sup_star_spreads_to_neighbours(line_grid):
    values = np.zeros(line_grid.size)
    centre = int(line_grid.ravel([10, 10]))
    values[centre] = 1.0
    star = field_service.usc_sup_star([ScalarField(line_grid, values), ScalarField.constant(line_grid, -1.0)])
    grid_values = star.reshaped()
    assert grid_values[10, 10] == grid_values[9, 10] == grid_values[10, 11] == 1.0
    assert grid_values[9, 9] == 0.0


def test_maximum_principle(line_grid, sample):
    u, _ = sample("normsq", line_grid)
    assert field_service.maximum_principle_check(u).passed
    v, _ = sample("neg_normsq", line_grid)
    report = field_service.maximum_principle_check(v)
    assert not report.passed
    assert report.interior_max == 0.0


def test_monotone_limit(line_grid):
    a = ScalarField.constant(line_grid, 1.0)
    b = ScalarField.constant(line_grid, 0.5)
    assert np.all(field_service.monotone_limit([a, b]).values == 0.5)
    with pytest.raises(InputError):
        field_service.monotone_limit([b, a])


def test_lattice_operations_on_neg_inf(line_grid):
    u = ScalarField.neg_inf(line_grid)
    v = ScalarField.constant(line_grid, 2.0)
    assert np.all(field_service.scale_field(0.0, u).values == 0.0)
    assert field_service.sum_fields(u, v).is_neg_inf
    assert np.all(field_service.max_fields(u, v).values == 2.0)
    assert field_service.min_fields(u, v).is_neg_inf
    with pytest.raises(InputError):
        field_service.scale_field(-1.0, v)


def test_grid_mismatch(line_grid):
    other = BoxGrid.cube(1, 2.0, 21)
    with pytest.raises(GridError):
        field_service.max_fields(ScalarField.constant(line_grid, 0.0), ScalarField.constant(other, 0.0))


def test_add_function_needs_finite_values(line_grid):
    u = ScalarField.constant(line_grid, 0.0)
    with pytest.raises(InputError):
        field_service.add_function(u, lambda z: np.full(z.shape[0], NEG_INF))
    shifted = field_service.add_function(u, lambda z: np.abs(z[:, 0]) ** 2, sign=-1.0)
    assert shifted.reshaped()[0, 0] == pytest.approx(-2.0)


def test_usc_sup_star_is_idempotent_on_closed_fields(line_grid, rng):
    for closed in (ScalarField.constant(line_grid, 0.3), ScalarField.neg_inf(line_grid)):
        once = field_service.usc_sup_star([closed])
        assert np.array_equal(field_service.usc_sup_star([once]).values, once.values)
    for _ in range(10):
        f = ScalarField(line_grid, rng.uniform(-1.0, 1.0, line_grid.size))
        g = ScalarField(line_grid, rng.uniform(-1.0, 1.0, line_grid.size))
        star = field_service.usc_sup_star([f, g])
        assert np.array_equal(star.values, field_service.usc_sup_star([field_service.max_fields(f, g)]).values)
        assert np.all(star.values >= np.maximum(f.values, g.values))
        assert np.all(field_service.usc_sup_star([star]).values >= star.values)
