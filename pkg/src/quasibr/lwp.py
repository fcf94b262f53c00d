"""Littlewood-Paley style square functions for tiles and dyadic shells.

Tile projections use enlarged bumps phi_{i,j,m,n} that are identically 1 on
the support of the matching partition member sigma_{i,j,m,n} and vanish
outside a fixed dilate of the tile, so that phi * sigma = sigma exactly.
"""

import numpy as np

from .bumps import plateau
from .errors import ConfigError
from .grid import GridField
from .quasinorm import rho_omega_grid

_RADIAL_PAD = 2.0   # enlargement of the shell width, in transition units
_ANGULAR_PAD = 2.0  # enlargement of the tau window, in cut-width units


def tile_bump(lib, idx, rho, omega):
    """Enlarged bump for tile idx: 1 on supp sigma, 0 outside a dilate.

    Radial part: sigma's radial factor lives in s = log(rho 2^-n) / log r
    within [m - 1/2 - w, m + 1/2 + w] (w = transition half width) clipped
    to the shell range; the bump is a plateau over a window padded by
    _RADIAL_PAD * w.  Angular part: same construction in tau.
    """
    tiling = lib.tiling
    i = int(tiling.sector_idx[idx])
    j = int(tiling.j_idx[idx])
    m = int(tiling.m_idx[idx])
    n = int(tiling.n_idx[idx])
    logr = lib.log_r
    w = 0.125  # half of the 0.25 radial step width, in s units

    safe = np.where(rho > 0, rho, 1.0)
    s = np.log(safe * 2.0 ** (-float(n))) / logr
    # radial window: supp of psi_m phi0 lies in [m - 1/2 - w, m + 1/2 + w];
    # end members of the psi family extend to the phi0 cutoff instead
    s_lo = m - 0.5 - (1.0 + _RADIAL_PAD) * w
    s_hi = m + 0.5 + (1.0 + _RADIAL_PAD) * w
    if m == lib.m_lo:
        s_lo = min(s_lo, np.log(0.25) / logr - 1.0)
    if m == lib.m_hi:
        s_hi = max(s_hi, np.log(4.0) / logr + 1.0)
    c = 0.5 * (s_lo + s_hi)
    rad = plateau((s - c) / (s_hi - s_lo))
    rad = np.where(rho > 0, rad, 0.0)

    edges = lib._tau_edges[i]
    widths = lib._tau_widths[i]
    sec = tiling.sectors[i]
    tau = np.where(rho > 0, sec.tau_of_omega(omega), 10.0)
    jl = lib._local_index(i, j)
    lo, hi = edges[jl], edges[jl + 1]
    # pad past the tau-step transitions; end steps own the sector margin
    pad_lo = 0.4 if jl == 0 else (1.0 + _ANGULAR_PAD) * 0.5 * widths[jl]
    pad_hi = (0.4 if jl + 2 == len(edges)
              else (1.0 + _ANGULAR_PAD) * 0.5 * widths[jl + 1])
    t_lo, t_hi = lo - pad_lo, hi + pad_hi
    ct = 0.5 * (t_lo + t_hi)
    ang = plateau((tau - ct) / (t_hi - t_lo))
    # confine to the sector's neighborhood: tau_of_omega clamps outside the
    # sector, so the tau window alone would wrap around the circle
    dw = np.mod(omega - lib.mids[i] + np.pi, 2.0 * np.pi) - np.pi
    half = lib.half_widths[i] + 0.25
    ang = ang * plateau(dw / (2.0 * half))
    return rad * ang


def tile_projection_square_function(pair, delta, f, lib, band=None):
    """sqrt(sum over tiles |P~_{i,j,m,n} f|^2) with enlarged tile bumps.

    band, if given, is a boolean frequency mask restricting which tiles
    matter; tiles whose symbol vanishes on the support of f-hat contribute
    exactly zero and are skipped.
    """
    tiling = lib.tiling
    spec = f.to_frequency()
    rho, omega = rho_omega_grid(pair, f.N, f.L)
    amp = np.abs(spec.values)
    live = amp > 1e-10 * max(amp.max(), 1e-300)
    rho_live = rho[live]
    omega_live = omega[live]
    acc = np.zeros((f.N, f.N))
    used = 0
    for idx in range(tiling.size):
        rl = tiling.rho_lo[idx] / 4.0
        rh = tiling.rho_hi[idx] * 4.0
        sel = (rho_live >= rl) & (rho_live <= rh)
        if not np.any(sel):
            continue
        i_sec = int(tiling.sector_idx[idx])
        wlo = lib.mids[i_sec] - 2.0 * (lib.half_widths[i_sec] + 0.25)
        span = 4.0 * (lib.half_widths[i_sec] + 0.25)
        if not np.any(np.mod(omega_live[sel] - wlo, 2.0 * np.pi) <= span):
            continue
        bump = tile_bump(lib, idx, rho, omega)
        piece_spec = bump * spec.values
        if not np.any(piece_spec):
            continue
        used += 1
        piece = GridField(f.N, f.L, piece_spec, "frequency").to_physical()
        acc += np.abs(piece.values) ** 2
    out = GridField(f.N, f.L, np.sqrt(acc), "physical")
    out.tiles_used = used
    return out


def check_tile_bump_reproduction(pair, delta, lib, n_tiles=40, seed=0):
    """Max over sampled tiles of |phi * sigma - sigma| on a frequency grid."""
    tiling = lib.tiling
    rng = np.random.default_rng(seed)
    idxs = rng.choice(tiling.size, size=min(n_tiles, tiling.size),
                      replace=False)
    worst = 0.0
    for idx in idxs:
        pts = tiling.tile(int(idx)).boundary_samples(120)
        jitter = rng.normal(scale=0.01, size=pts.shape)
        pts = np.vstack([pts, pts + jitter])
        rho = pair.rho(pts)
        omega = pair.boundary_angle(pts, rho)
        i = int(tiling.sector_idx[idx])
        j = int(tiling.j_idx[idx])
        m = int(tiling.m_idx[idx])
        n = int(tiling.n_idx[idx])
        sig = lib.sigma(i, j, m, n, rho, omega)
        bump = tile_bump(lib, int(idx), rho, omega)
        worst = max(worst, float(np.max(np.abs(bump * sig - sig))))
    return worst


def dyadic_shell_bump(rho, n):
    """P_n symbol: 1 on {2^n/2 <= rho <= 2^{n+1}}, 0 off (2^{n-2}, 2^{n+2})."""
    safe = np.where(rho > 0, rho, 1.0)
    s = np.log2(safe) - n
    # plateau(s/2) is 1 for |s| <= 1 and vanishes for |s| >= 2
    return np.where(rho > 0, plateau(s / 2.0), 0.0)


def dyadic_projection_square_function(pair, f, n_range=None):
    """sqrt(sum over n |P_n f|^2) with quasiradial dyadic shell bumps."""
    spec = f.to_frequency()
    rho, omega = rho_omega_grid(pair, f.N, f.L)
    pos = rho[rho > 0]
    if pos.size == 0:
        raise ConfigError("empty spectrum")
    if n_range is None:
        n_lo = int(np.floor(np.log2(pos.min()))) - 2
        n_hi = int(np.ceil(np.log2(pos.max()))) + 2
    else:
        n_lo, n_hi = n_range
    acc = np.zeros((f.N, f.N))
    for n in range(n_lo, n_hi + 1):
        piece_spec = dyadic_shell_bump(rho, n) * spec.values
        if not np.any(piece_spec):
            continue
        piece = GridField(f.N, f.L, piece_spec, "frequency").to_physical()
        acc += np.abs(piece.values) ** 2
    return GridField(f.N, f.L, np.sqrt(acc), "physical")
