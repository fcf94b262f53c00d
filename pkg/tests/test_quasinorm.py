import numpy as np
import pytest

from quasibr.domains import Disk, Polygon
from quasibr.quasinorm import (check_compatibility, eval_rho,
                               rho_lipschitz_probe, rho_omega_grid)
from quasibr.errors import IncompatiblePairError


def test_disk_isotropic_rho_closed_form(disk_pair):
    rng = np.random.default_rng(0)
    xi = rng.normal(scale=30.0, size=(400, 2))
    want = np.hypot(xi[:, 0], xi[:, 1]) / 10.0
    got = eval_rho(disk_pair, xi)
    assert np.max(np.abs(got - want) / np.maximum(want, 1e-12)) < 1e-10


def test_disk_anisotropic_rho_quadratic_oracle(disk_aniso_pair):
    # t^{-A} xi on the circle of radius 10 with A = diag(1, 2):
    # (xi1/t)^2 + (xi2/t^2)^2 = 100, so v = t^2 solves
    # 100 v^2 - xi1^2 v - xi2^2 = 0 and rho = sqrt(v).
    rng = np.random.default_rng(1)
    xi = rng.normal(scale=25.0, size=(400, 2))
    a, b, c = 100.0, -xi[:, 0] ** 2, -xi[:, 1] ** 2
    v = (-b + np.sqrt(b * b - 4 * a * c)) / (2 * a)
    want = np.sqrt(v)
    got = eval_rho(disk_aniso_pair, xi)
    assert np.max(np.abs(got - want) / np.maximum(want, 1e-12)) < 1e-10


def test_homogeneity(all_pairs):
    rng = np.random.default_rng(2)
    for name, pair in all_pairs:
        xi = rng.normal(scale=10.0, size=(200, 2))
        base = eval_rho(pair, xi)
        for t in (0.3, 2.0, 17.0):
            scaled = eval_rho(pair, pair.group.apply(t, xi))
            err = np.abs(scaled - t * base) / np.maximum(1.0, t * base)
            assert np.max(err) < 1e-8, name


def test_rho_zero_at_origin(disk_pair):
    assert eval_rho(disk_pair, np.zeros(2)) == 0.0


def test_boundary_projection_lands_on_boundary(all_pairs):
    rng = np.random.default_rng(3)
    for name, pair in all_pairs:
        xi = rng.normal(scale=20.0, size=(100, 2))
        p = pair.boundary_projection(xi)
        th = np.arctan2(p[:, 1], p[:, 0])
        r = np.hypot(p[:, 0], p[:, 1])
        assert np.max(np.abs(r - pair.domain.radial(th))) < 1e-8, name


def test_boundary_angle_orbit_invariant(disk_aniso_pair):
    rng = np.random.default_rng(4)
    xi = rng.normal(scale=5.0, size=(50, 2))
    w0 = disk_aniso_pair.boundary_angle(xi)
    w1 = disk_aniso_pair.boundary_angle(disk_aniso_pair.group.apply(7.0, xi))
    assert np.max(np.abs(np.angle(np.exp(1j * (w1 - w0))))) < 1e-7


def test_incompatible_pair_rejected():
    # a thin slab-like polygon with a strongly shearing dilation has orbit
    # tangents nearly parallel to the long edges
    dom = Polygon([[12, -9], [12, 9], [-12, 9], [-12, -9]])
    A = np.array([[1.0, 0.0], [4.0, 1.0]])
    with pytest.raises(IncompatiblePairError):
        check_compatibility(dom, A)


def test_lipschitz_probe_matches_disk(disk_pair):
    # rho = |xi|/10 has gradient norm 1/10 everywhere
    lip = rho_lipschitz_probe(disk_pair)
    assert 0.09 < lip < 0.11


def test_rho_omega_grid_cached(disk_pair):
    r1, w1 = rho_omega_grid(disk_pair, 64, 8.0)
    r2, w2 = rho_omega_grid(disk_pair, 64, 8.0)
    assert r1 is r2 and w1 is w2
    xi = (np.pi / 8.0) * np.arange(-32, 32)
    X1, X2 = np.meshgrid(xi, xi, indexing="ij")
    assert np.allclose(r1, np.hypot(X1, X2) / 10.0, atol=1e-10)
