import numpy as np
import pytest

from mqpsh.core.errors import DimensionError, InputError, NonSmoothPointError
from mqpsh.models.grid import to_real
from mqpsh.models.stencil import Stencil
from mqpsh.services.catalog_service import catalog_service
from mqpsh.services.hessian_service import hessian_service

SMOOTH = ["normsq", "neg_normsq", "saddle_q1", "pluriharmonic", "im4", "neg_z1sq", "log1p_normsq", "exp_re"]


@pytest.mark.parametrize("name", SMOOTH)
def test_finite_differences_match_closed_forms(name, rng):
    fn = catalog_service.build(name)
    for _ in range(20):
        z = rng.uniform(-0.9, 0.9, 2) + 1j * rng.uniform(-0.9, 0.9, 2)
        H = hessian_service.complex_hessian(fn, z)
        assert np.max(np.abs(H.entries - fn.hessian(z))) <= 1e-6


def test_im4_hessian_off_the_real_axis(rng):
    fn = catalog_service.build("im4")
    y = rng.uniform(0.1, 0.9, 100) * rng.choice([-1.0, 1.0], 100)
    z = (rng.uniform(-0.9, 0.9, 100) + 1j * y)[:, None]
    H = hessian_service.complex_hessians(fn, z)
    assert np.max(np.abs(H[:, 0, 0] - 3.0 * y ** 2)) <= 1e-6


def test_kink_on_the_real_axis():
    fn = catalog_service.build("im4_abs")
    with pytest.raises(NonSmoothPointError):
        hessian_service.complex_hessian(fn, np.array([0.3 + 0j]))
    H = hessian_service.complex_hessian(fn, np.array([0.3 + 0.5j]))
    assert H.entries[0, 0].real == pytest.approx(0.75, abs=1e-6)


def test_stencil_touching_neg_inf():
    fn = catalog_service.build("char", {"radius": 0.5})
    with pytest.raises(NonSmoothPointError):
        hessian_service.complex_hessian(fn, np.array([0.5 + 0j]))


def test_stencil_domain_and_dimension():
    fn = catalog_service.build("normsq")
    inside = Stencil.uniform(0.1, 2, domain=(np.array([-1.0, -1.0]), np.array([1.0, 1.0])))
    with pytest.raises(InputError):
        hessian_service.real_hessian(fn, np.array([0.95, 0.0]), inside)
    with pytest.raises(DimensionError):
        hessian_service.real_hessian(fn, np.zeros(3))
    with pytest.raises(DimensionError):
        hessian_service.real_to_complex_array(np.zeros((3, 3)))


def _random_quartic(n: int, rng: np.random.Generator):
    d = 2 * n
    dirs = rng.standard_normal((3, d))
    weights = rng.uniform(-1.0, 1.0, 3)
    B = rng.standard_normal((d, d))
    B = 0.5 * (B + B.T)
    g = rng.standard_normal(d)

    def f(z):
        x = to_real(z)
        proj = x @ dirs.T
        return (proj ** 4) @ weights + np.einsum("...i,ij,...j->...", x, B, x) + x @ g

    def exact(x):
        proj = dirs @ x
        return np.einsum("k,ki,kj->ij", 12.0 * weights * proj ** 2, dirs, dirs) + 2.0 * B

    return f, exact


@pytest.mark.slow
def test_complex_hessian_identity_and_convergence(rng):
    n = 2
    for _ in range(200):
        f, exact = _random_quartic(n, rng)
        x = rng.uniform(-1.0, 1.0, 2 * n)

        HR = hessian_service.real_hessian(f, x, detect_kinks=False)
        HC = hessian_service.real_to_complex_hessian(HR)
        xi = rng.standard_normal((50, n)) + 1j * rng.standard_normal((50, n))
        zeta = np.concatenate([xi, 1j * xi], axis=1)
        lhs = HC.quadratic_form(xi)
        rhs = 0.25 * np.einsum("sk,kl,sl->s", zeta.conj(), HR, zeta).real
        assert np.all(np.abs(lhs - rhs) <= 1e-8 * np.maximum(1.0, np.abs(lhs)))

        coarse = hessian_service.real_hessian(f, x, Stencil.uniform(1e-2, 2 * n), detect_kinks=False)
        fine = hessian_service.real_hessian(f, x, Stencil.uniform(5e-3, 2 * n), detect_kinks=False)
        H = exact(x)
        ratio = np.max(np.abs(coarse - H)) / np.max(np.abs(fine - H))
        assert 3.0 <= ratio <= 5.0


def test_real_to_complex_hessian_is_linear(rng):
    for _ in range(50):
        n = int(rng.integers(1, 4))
        H1, H2 = rng.normal(size=(2, 2 * n, 2 * n))
        H1, H2 = H1 + H1.T, H2 + H2.T
        a, b = rng.normal(size=2)
        combined = hessian_service.real_to_complex_hessian(a * H1 + b * H2)
        parts = a * hessian_service.real_to_complex_hessian(H1).entries + b * hessian_service.real_to_complex_hessian(H2).entries
        assert np.allclose(combined.entries, parts, atol=1e-12)
