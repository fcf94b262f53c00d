import numpy as np
import pytest

from quasibr.errors import ConfigError
from quasibr.tiling import (Tiling, build_sectors, m_shell_range,
                            count_ball_sum_overlaps, active_time_measure)


def test_disk_sector_count_oracle(disk_pair):
    # each sector spans the chord angle 2 asin(1/(2R)) on the circle, so the
    # walk closes after about 2 pi / (2 asin(1/20)) ~ 62.8 sectors
    sectors = build_sectors(disk_pair)
    want = 2 * np.pi / (2 * np.arcsin(1.0 / 20.0))
    assert abs(len(sectors) - want) <= 1.0


def test_sector_walk_closes(all_pairs):
    for name, pair in all_pairs:
        sectors = build_sectors(pair)
        widths = [s.width for s in sectors]
        assert np.isclose(sum(widths), 2 * np.pi, atol=1e-8), name
        for a, b in zip(sectors, sectors[1:]):
            assert np.isclose(np.mod(b.omega_start - a.omega_end, 2 * np.pi),
                              0.0, atol=1e-9), name


def test_sector_tau_normalization(disk_pair):
    # the rotated frame puts the sector's start at graph coordinate -1/2
    for s in build_sectors(disk_pair)[:5]:
        assert abs(s.tau_of_omega(s.omega_start) + 0.5) < 1e-6


def test_m_shell_range_covers_center_annulus():
    for delta in (2.0 ** -4, 2.0 ** -6, 2.0 ** -9):
        m_lo, m_hi = m_shell_range(delta)
        r = (1.0 + 2.0 * delta) / (1.0 - 2.0 * delta)
        assert r ** m_lo * (1.0 - 2.0 * delta) <= 0.5
        assert r ** m_hi * (1.0 + 2.0 * delta) >= 2.0


def test_tile_shells_touch():
    # consecutive radial shells share endpoints exactly: the ratio is
    # (1 + 2 delta)/(1 - 2 delta)
    delta = 2.0 ** -4
    r = (1.0 + 2.0 * delta) / (1.0 - 2.0 * delta)
    assert np.isclose(r * (1.0 - 2.0 * delta), 1.0 + 2.0 * delta)


def test_delta_range_guard(disk_pair):
    with pytest.raises(ConfigError):
        Tiling(disk_pair, 0.25)


def test_multiplicity_covers_annulus(disk_pair):
    delta = 2.0 ** -5
    tiling = Tiling(disk_pair, delta, n_range=(-1, 1))
    rng = np.random.default_rng(0)
    ang = rng.uniform(-np.pi, np.pi, 4000)
    lev = np.exp(rng.uniform(np.log(0.5), np.log(2.0), 4000))
    pts = disk_pair.group.apply(lev, disk_pair.domain.boundary_point(ang))
    mult = tiling.multiplicity(pts)
    assert mult.min() >= 1       # covering
    assert mult.max() <= 8       # bounded overlap


def test_tile_membership_is_invariant_box(disk_pair):
    tiling = Tiling(disk_pair, 2.0 ** -4)
    tile = tiling.tile(tiling.size // 2)
    pts = tile.boundary_samples(40)
    rho = disk_pair.rho(pts)
    assert np.all(tile.contains(pts, rho, tol=1e-9))
    # scaling far out of the rho range leaves the tile
    far = disk_pair.group.apply(10.0, pts)
    assert not np.any(tile.contains(far, disk_pair.rho(far)))


def test_ball_sum_overlap_small(disk_pair):
    delta = 2.0 ** -5
    rep = count_ball_sum_overlaps(disk_pair, delta, u=1.0,
                                  t=delta ** -8)
    assert rep.max_overlap <= 8


def test_active_time_measure_disk(disk_pair):
    # a tile with rho range [r_lo, r_hi] is active for t in an interval of
    # logarithmic length log((r_hi/r_lo) (1+delta)/(1-delta))
    delta = 2.0 ** -4
    tiling = Tiling(disk_pair, delta)
    tile = tiling.tile(0)
    meas = active_time_measure(tile, disk_pair, delta)
    r_lo, r_hi = tiling.rho_lo[0], tiling.rho_hi[0]
    want = np.log((r_hi / r_lo) * (1.0 + delta) / (1.0 - delta))
    assert abs(meas - want) < 0.05 * want
