import numpy as np
import pytest

from mqpsh.core.errors import ConfigError
from mqpsh.services.catalog_service import catalog_service


def test_names_are_sorted_and_complete():
    names = catalog_service.names()
    assert names == sorted(names)
    for expected in ("normsq", "im4_abs", "char", "saddle_q1", "exp_re"):
        assert expected in names


def test_im4_abs_at_i():
    fn = catalog_service.build("im4_abs")
    assert fn(np.array([1j])) == pytest.approx(2.0)
    assert not fn.smooth
    assert fn.hessian is None


def test_smooth_entries_carry_a_hessian():
    fn = catalog_service.build("saddle_q1")
    H = fn.hessian(np.array([0.3 + 0.1j, -0.2j]))
    np.testing.assert_allclose(H, np.diag([1.0, -1.0]), atol=1e-14)


def test_unknown_function_names_the_location():
    with pytest.raises(ConfigError) as exc:
        catalog_service.build("no_such_function")
    assert exc.value.location == "function.catalog"


def test_bad_params_are_rejected():
    with pytest.raises(ConfigError) as exc:
        catalog_service.build("im4", {"k": "two"})
    assert "im4" in exc.value.location


def test_listing_mentions_every_entry():
    listing = catalog_service.catalog_list()
    assert len(listing.splitlines()) == len(catalog_service.names())
    assert "im4_abs" in listing
    assert "nonsmooth" in listing


def test_listing_shows_the_source_column():
    listing = catalog_service.catalog_list().splitlines()
    for line, name in zip(listing, catalog_service.names()):
        assert line.startswith(name)
        assert catalog_service.get(name).source in line


def test_rotated_saddle_hessian_mixes_the_coordinates():
    fn = catalog_service.build("rotated_saddle")
    z = np.array([0.3 + 0.1j, -0.2j])
    H = fn.hessian(z)
    np.testing.assert_allclose(np.linalg.eigvalsh(H), [-0.5, 2.5], atol=1e-14)
    v = np.array([1.0, 1.0]) / np.sqrt(2.0)
    # restricted to the line through z along v, u is -|w|^2 / 2 plus a harmonic part
    w = np.array([0.1, 0.1j, -0.1, -0.1j])
    ring = fn(z[None, :] + w[:, None] * v[None, :])
    assert np.mean(ring) - fn(z[None, :])[0] == pytest.approx(-0.5 * 0.01)
