import numpy as np
import pytest

from mqpsh.core.errors import KernelError
from mqpsh.models.grid import NEG_INF, BoxGrid, ScalarField
from mqpsh.models.kernel import Kernel


def test_quadratic_kernel():
    k = Kernel.quadratic(2.0)
    assert k.evaluate(np.array([[1.0, 1.0]]))[0] == pytest.approx(-4.0)
    assert k.semiconvex_delta == 2.0
    assert k.is_nonpositive(2)
    with pytest.raises(KernelError):
        Kernel.quadratic(2.0, semiconvex_delta=1.0)
    with pytest.raises(KernelError):
        Kernel.quadratic(0.0)


def test_radial_kernel_must_be_nonincreasing():
    with pytest.raises(KernelError):
        Kernel.radial(lambda t: np.asarray(t, dtype=float))
    k = Kernel.radial(lambda t: -np.asarray(t, dtype=float) ** 2)
    assert k.evaluate(np.array([[3.0, 4.0]]))[0] == pytest.approx(-25.0)


def test_radial_kernel_identically_neg_inf():
    k = Kernel.radial(lambda t: np.full(np.shape(t), NEG_INF))
    assert k.is_identically_neg_inf(2)


def test_tabulated_kernel_lookup():
    grid = BoxGrid.cube(1, 1.0, 3)
    table = ScalarField(grid, -np.arange(grid.size, dtype=float))
    k = Kernel.tabulated(table)
    assert k.evaluate(np.array([[-1.0, -1.0]]))[0] == 0.0
    assert k.evaluate(np.array([[5.0, 0.0]]))[0] == NEG_INF
    off_centre = BoxGrid(1, (0.0, 0.0), (1.0, 1.0), (3, 3))
    with pytest.raises(KernelError):
        Kernel.tabulated(ScalarField.constant(off_centre, 0.0))
