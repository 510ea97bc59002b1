import numpy as np
import pytest

from mqpsh.core.errors import DimensionError, InputError
from mqpsh.models.matrix import HermitianMatrix, InertiaSignature


def test_from_array_checks_hermitian():
    with pytest.raises(InputError):
        HermitianMatrix.from_array([[1, 1], [0, 1]])
    A = HermitianMatrix.from_array([[1, 1j], [-1j, 2]])
    assert A.entries[0, 1] == 1j
    assert A.entries.dtype == complex


def test_constructor_rejects_a_non_hermitian_matrix():
    with pytest.raises(InputError, match="not Hermitian"):
        HermitianMatrix(np.array([[1.0, 2.0], [0.0, 1.0]]))
    with pytest.raises(InputError):
        HermitianMatrix(np.array([[1.0, 1j], [1j, 1.0]]))
    with pytest.raises(InputError):
        HermitianMatrix(np.array([[1.0 + 0.5j, 0.0], [0.0, 1.0]]))


def test_constructor_absorbs_rounding_and_stores_exactly_hermitian():
    a = np.array([[1e6, 1.0 + 2j], [1.0 - 2j + 1e-8, -3.0]])
    A = HermitianMatrix(a)
    assert np.array_equal(A.entries, A.entries.conj().T)
    assert A.entries[1, 0] == pytest.approx(1.0 - 2j, abs=1e-8)


def test_shape_and_dimension_errors():
    with pytest.raises(DimensionError):
        HermitianMatrix(np.zeros((2, 3)))
    with pytest.raises(DimensionError):
        HermitianMatrix.identity(2) + HermitianMatrix.identity(3)


def test_form_has_the_matrix_as_complex_hessian_symbol():
    M = HermitianMatrix.from_array([[2, 1 + 1j], [1 - 1j, -1]])
    y = np.array([0.3 - 0.2j, -1.1 + 0.5j])
    expected = (y @ M.entries @ y.conj()).real
    assert M.form(y) == pytest.approx(expected)
    assert M.quadratic_form(y) == pytest.approx((y.conj() @ M.entries @ y).real)


def test_congruence_and_arithmetic():
    A = HermitianMatrix.diag([1.0, -2.0])
    C = np.array([[0, 1], [1, 0]], dtype=complex)
    assert np.allclose(A.congruence(C).entries, np.diag([-2.0, 1.0]))
    assert np.allclose((A - A).entries, 0)
    assert np.allclose((-A).entries, np.diag([-1.0, 2.0]))
    assert A.scaled(3).allclose(HermitianMatrix.diag([3.0, -6.0]))


def test_inertia_signature_counts():
    s = InertiaSignature(negative=1, zero=0, positive=2, tol=1e-9)
    assert s.n == 3
    assert s.as_tuple() == (1, 0, 2)
    with pytest.raises(ValueError):
        InertiaSignature(negative=-1, zero=0, positive=0, tol=0.0)
