"""Sector decomposition of the plane and the tile family B_{i,j,m,n}.

Sectors are built by walking the boundary counterclockwise: each sector
gets a rotation placing its arc inside the graph window {|x1| <= 1/2},
and the union of windows covers the boundary.  Tiles are curved boxes
bounded by two quasinorm level sets rho = s(1 +- 2 delta) and two dilation
orbits through refined cap endpoints; dyadic generations are dilates by
(2^{2n})^A.  Membership reduces to two interval tests in the invariant
coordinates (rho, omega), where omega is the polar angle of the orbit
projection onto the boundary.
"""

import numpy as np
from scipy.optimize import brentq

from .caps import DELTA_MAX, decompose
from .domains import boundary_arc
from .errors import ConfigError, GeometryError

TAU_WINDOW = 0.5  # sector half-width in the rotated graph coordinate


def _wrap(a):
    return np.mod(np.asarray(a) + np.pi, 2 * np.pi) - np.pi


def _in_arc(omega, lo, hi):
    """Angles in the ccw arc from lo to hi (arc length < 2 pi)."""
    span = np.mod(hi - lo, 2 * np.pi)
    return np.mod(omega - lo, 2 * np.pi) <= span


class Sector(object):
    """One boundary sector: ccw angular window plus its graph rotation."""

    def __init__(self, index, omega_start, omega_end, rotation, domain):
        self.index = index
        self.omega_start = float(omega_start)
        self.omega_end = float(omega_end)
        self.rotation = float(rotation)
        self.domain = domain
        self.seed = domain.boundary_point(omega_start)
        self.seed_end = domain.boundary_point(omega_end)
        self.arc = boundary_arc(domain, rotation)

    @property
    def width(self):
        return self.omega_end - self.omega_start

    def tau_of_omega(self, omega):
        """Rotated x1 coordinate of the boundary point at polar angle omega."""
        omega = np.asarray(omega, dtype=float)
        return self.domain.radial(omega) * np.cos(omega + self.rotation)

    def omega_of_tau(self, tau):
        """Inverse of tau_of_omega on the graph window (monotone there)."""
        grid = np.linspace(self.omega_start - 0.45, self.omega_end + 0.45, 4001)
        tg = self.tau_of_omega(grid)
        if np.any(np.diff(tg) <= 0):
            # keep the maximal monotone piece around the sector window
            good = np.flatnonzero(np.diff(tg) > 0)
            lo, hi = good.min(), good.max() + 1
            grid, tg = grid[lo:hi + 1], tg[lo:hi + 1]
        return np.interp(tau, tg, grid)


def build_sectors(pair):
    """Cover the boundary by rotated-graph sectors (ccw walk)."""
    domain = pair.domain
    omega0 = -np.pi / 2
    sectors = []
    omega = omega0
    guard = int(4 * np.pi / (2 * np.arcsin(0.5 / domain.max_radius()))) + 8
    for i in range(guard):
        p = domain.boundary_point(omega)
        r = float(np.hypot(p[0], p[1]))
        # rotate the start point to frame angle -pi/2 - asin(1/(2r)),
        # which puts it at x1 = -1/2 on the lower graph
        target = -np.pi / 2 - np.arcsin(TAU_WINDOW / r)
        rotation = target - omega
        # next cut: first angle where the rotated x1 coordinate reaches +1/2
        def g(d):
            w = omega + d
            return domain.radial(w) * np.cos(w + rotation) - TAU_WINDOW
        probe = np.linspace(1e-9, 0.5, 2000)
        vals = g(probe)
        pos = np.flatnonzero(vals >= 0)
        if len(pos) == 0:
            raise GeometryError("sector walk failed to reach the window edge")
        k = pos[0]
        delta_omega = brentq(g, probe[max(k - 1, 0)], probe[k], xtol=1e-13)
        omega_end = omega + delta_omega
        if omega_end >= omega0 + 2 * np.pi:
            omega_end = omega0 + 2 * np.pi
        sectors.append(Sector(i, omega, omega_end, rotation, domain))
        omega = omega_end
        if omega >= omega0 + 2 * np.pi - 1e-12:
            break
    else:
        raise GeometryError("sector walk did not close after the guard count")
    return sectors


def m_shell_range(delta):
    """Indices m with shells r^m [1-2d, 1+2d] sandwiching [1/2, 2] in [1/4, 4].

    r = (1+2 delta)/(1-2 delta), so consecutive shells meet exactly.
    """
    r = (1.0 + 2.0 * delta) / (1.0 - 2.0 * delta)
    m_lo = int(np.floor(np.log(0.5 / (1.0 + 2.0 * delta)) / np.log(r)))
    m_hi = int(np.ceil(np.log(2.0 / (1.0 - 2.0 * delta)) / np.log(r)))
    return m_lo, m_hi


class Tile(object):
    """Single tile view with exact membership."""

    def __init__(self, tiling, idx):
        self.tiling = tiling
        t = tiling
        self.i = int(t.sector_idx[idx])
        self.j = int(t.j_idx[idx])
        self.m = int(t.m_idx[idx])
        self.n = int(t.n_idx[idx])
        self.rho_lo = float(t.rho_lo[idx])
        self.rho_hi = float(t.rho_hi[idx])
        self.omega_lo = float(t.omega_lo[idx])
        self.omega_hi = float(t.omega_hi[idx])
        self.tau_lo = float(t.tau_lo[idx])
        self.tau_hi = float(t.tau_hi[idx])

    def contains(self, points, rho_vals=None, tol=0.0):
        """Exact membership; tol >= 0 dilates the tile (conservative)."""
        pair = self.tiling.pair
        points = np.asarray(points, dtype=float)
        if rho_vals is None:
            rho_vals = pair.rho(points)
        rho_vals = np.asarray(rho_vals, dtype=float)
        ok = ((rho_vals >= self.rho_lo * (1.0 - tol))
              & (rho_vals <= self.rho_hi * (1.0 + tol)))
        omega = np.full(np.shape(rho_vals), np.nan)
        if np.any(ok):
            sub = points[ok] if points.ndim > 1 else points
            omega_ok = pair.boundary_angle(sub, np.asarray(rho_vals)[ok])
            lo = self.omega_lo - tol
            hi = self.omega_hi + tol
            inside = _in_arc(omega_ok, lo, hi)
            out = np.zeros(np.shape(rho_vals), dtype=bool)
            out[np.flatnonzero(ok)] = inside
            return out
        return np.zeros(np.shape(rho_vals), dtype=bool)

    def boundary_samples(self, n_omega=9, n_rho=3):
        """Point cloud covering the tile (corners, edges, interior)."""
        pair = self.tiling.pair
        w = np.linspace(self.omega_lo, self.omega_hi, n_omega)
        base = pair.domain.boundary_point(w)
        rho = np.exp(np.linspace(np.log(self.rho_lo), np.log(self.rho_hi), n_rho))
        pts = [pair.group.apply(r, base) for r in rho]
        return np.concatenate(pts)

    def bbox(self, margin_rel=0.02):
        pts = self.boundary_samples(17, 3)
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        pad = margin_rel * np.maximum(hi - lo, 1e-12)
        return np.array([lo - pad, hi + pad])


class Tiling(object):
    """The full family {B_{i,j,m,n}} for one pair and delta.

    Flat arrays indexed per tile; Tile(self, k) gives an object view.
    """

    def __init__(self, pair, delta, n_range=(0, 0)):
        if not 0.0 < delta < DELTA_MAX:
            raise ConfigError("delta must lie in (0, %g)" % DELTA_MAX)
        self.pair = pair
        self.delta = float(delta)
        self.n_lo, self.n_hi = int(n_range[0]), int(n_range[1])
        self.sectors = build_sectors(pair)
        self.ratio = (1.0 + 2.0 * delta) / (1.0 - 2.0 * delta)
        self.m_lo, self.m_hi = m_shell_range(delta)
        self.decomps = []
        sector_idx, j_idx, tau_lo, tau_hi, omega_lo, omega_hi = [], [], [], [], [], []
        for s in self.sectors:
            dec = decompose(s.arc, delta)
            self.decomps.append(dec)
            # keep intervals meeting the sector's own angular window with a
            # small margin for the bump transitions
            t0 = -TAU_WINDOW - 0.02
            t1 = s.tau_of_omega(s.omega_end) + 0.02
            for j, (a, b) in enumerate(dec.refined):
                if b < t0 or a > t1:
                    continue
                wa, wb = s.omega_of_tau(a), s.omega_of_tau(b)
                sector_idx.append(s.index)
                j_idx.append(j)
                tau_lo.append(a)
                tau_hi.append(b)
                omega_lo.append(wa)
                omega_hi.append(wb)
        base_i = np.asarray(sector_idx, dtype=int)
        base_j = np.asarray(j_idx, dtype=int)
        base_tlo = np.asarray(tau_lo)
        base_thi = np.asarray(tau_hi)
        base_wlo = np.asarray(omega_lo)
        base_whi = np.asarray(omega_hi)
        ms = np.arange(self.m_lo, self.m_hi + 1)
        ns = np.arange(self.n_lo, self.n_hi + 1)
        nb, nm, nn = len(base_i), len(ms), len(ns)
        rep = nm * nn
        self.sector_idx = np.repeat(base_i, rep)
        self.j_idx = np.repeat(base_j, rep)
        self.tau_lo = np.repeat(base_tlo, rep)
        self.tau_hi = np.repeat(base_thi, rep)
        self.omega_lo = np.repeat(base_wlo, rep)
        self.omega_hi = np.repeat(base_whi, rep)
        self.m_idx = np.tile(np.repeat(ms, nn), nb)
        self.n_idx = np.tile(np.tile(ns, nm), nb)
        scale = self.ratio ** self.m_idx * 4.0 ** self.n_idx
        self.rho_lo = scale * (1.0 - 2.0 * delta)
        self.rho_hi = scale * (1.0 + 2.0 * delta)
        self.size = len(self.rho_lo)

    def tile(self, k):
        return Tile(self, k)

    def multiplicity(self, points, rho_vals=None, omega_vals=None):
        """Number of tiles containing each point (vectorized)."""
        points = np.asarray(points, dtype=float)
        if rho_vals is None:
            rho_vals = self.pair.rho(points)
        if omega_vals is None:
            omega_vals = self.pair.boundary_angle(points, rho_vals)
        count = np.zeros(np.shape(rho_vals), dtype=int)
        # group tiles by (sector, j): the (m, n) block shares omega windows
        order = np.lexsort((self.n_idx, self.m_idx, self.j_idx, self.sector_idx))
        block_starts = [0]
        for k in range(1, self.size):
            a, b = order[k - 1], order[k]
            if (self.sector_idx[a] != self.sector_idx[b]
                    or self.j_idx[a] != self.j_idx[b]):
                block_starts.append(k)
        block_starts.append(self.size)
        for bs, be in zip(block_starts[:-1], block_starts[1:]):
            ks = order[bs:be]
            k0 = ks[0]
            in_omega = _in_arc(omega_vals, self.omega_lo[k0], self.omega_hi[k0])
            if not np.any(in_omega):
                continue
            rho_sub = rho_vals[in_omega]
            c = np.zeros(len(rho_sub), dtype=int)
            for k in ks:
                c += (rho_sub >= self.rho_lo[k]) & (rho_sub <= self.rho_hi[k])
            count[in_omega] += c
        return count

    def tiles_meeting_level(self, rho_level, omega_mask_fn=None):
        """Indices of tiles whose rho-range contains rho_level and whose
        angular window meets {omega : omega_mask_fn(omega)} (or any omega)."""
        hit = (self.rho_lo <= rho_level) & (rho_level <= self.rho_hi)
        idx = np.flatnonzero(hit)
        if omega_mask_fn is None:
            return idx
        keep = []
        for k in idx:
            w = np.linspace(self.omega_lo[k], self.omega_hi[k], 33)
            if np.any(omega_mask_fn(w)):
                keep.append(k)
        return np.asarray(keep, dtype=int)


# -- overlap counting ---------------------------------------------------------

class OverlapReport(object):
    def __init__(self, delta, max_overlap, histogram, fit_data=None):
        self.delta = float(delta)
        self.max_overlap = int(max_overlap)
        self.histogram = histogram
        self.fit_data = fit_data or []

    def to_dict(self):
        return {"delta": self.delta, "max_overlap": self.max_overlap,
                "histogram": {str(k): int(v) for k, v in self.histogram.items()},
                "fit_data": self.fit_data}


def _t1_mask(pair, points, rho_vals):
    """Membership of points in T1 = union over k of (2^{4k})^A T0 with
    T0 = {1/4 <= rho <= 4, |x1| <= 1/2} (closure, conservative)."""
    points = np.asarray(points, dtype=float)
    rho_vals = np.asarray(rho_vals, dtype=float)
    out = np.zeros(np.shape(rho_vals), dtype=bool)
    pos = rho_vals > 0
    if not np.any(pos):
        return out
    lg = np.log2(rho_vals[pos])
    kc = np.round(lg / 4.0).astype(int)
    sub = np.zeros(int(np.sum(pos)), dtype=bool)
    for k in np.unique(kc):
        for kk in (k - 1, k, k + 1):
            scale_ok = np.abs(lg - 4.0 * kk) <= 2.0 + 1e-12
            if not np.any(scale_ok):
                continue
            moved = pair.group.apply(2.0 ** (-4.0 * kk), points[pos][scale_ok])
            sub[scale_ok] |= np.abs(moved[..., 0]) <= 0.5 + 1e-12
    out[pos] = sub
    return out


def _level_tiles_in_t1(tiling, t):
    """A_t: tiles meeting {rho = 1/t} inside T1 (closure)."""
    pair = tiling.pair
    level = 1.0 / t

    def mask_fn(omega):
        pts = pair.group.apply(level, pair.domain.boundary_point(omega))
        return _t1_mask(pair, pts, np.full(len(np.atleast_1d(omega)), level))

    return tiling.tiles_meeting_level(level, mask_fn)


def _accumulate_boxes(boxes, x_edges, y_edges):
    """Multiplicity of covering boxes on the cell grid via corner marks."""
    nx, ny = len(x_edges) - 1, len(y_edges) - 1
    acc = np.zeros((nx + 1, ny + 1), dtype=np.int32)
    ix0 = np.clip(np.searchsorted(x_edges, boxes[:, 0, 0], side="right") - 1, 0, nx)
    ix1 = np.clip(np.searchsorted(x_edges, boxes[:, 1, 0], side="left"), 0, nx)
    iy0 = np.clip(np.searchsorted(y_edges, boxes[:, 0, 1], side="right") - 1, 0, ny)
    iy1 = np.clip(np.searchsorted(y_edges, boxes[:, 1, 1], side="left"), 0, ny)
    np.add.at(acc, (ix0, iy0), 1)
    np.add.at(acc, (ix0, iy1), -1)
    np.add.at(acc, (ix1, iy0), -1)
    np.add.at(acc, (ix1, iy1), 1)
    return np.cumsum(np.cumsum(acc, axis=0), axis=1)[:nx, :ny]


def _tile_lattice(tile, spacing):
    """Sample lattice covering the tile at the given spacing (approx)."""
    span_omega = max(tile.omega_hi - tile.omega_lo, 1e-9)
    span_rho = tile.rho_hi - tile.rho_lo
    pair = tile.tiling.pair
    # physical tangential extent ~ |I_j|, radial extent ~ 4 delta * scale
    n_o = max(int(np.ceil((tile.tau_hi - tile.tau_lo) / spacing)) + 2, 4)
    n_r = max(int(np.ceil(span_rho * pair.domain.max_radius() / spacing)) + 2, 3)
    w = np.linspace(tile.omega_lo, tile.omega_hi, min(n_o, 400))
    base = pair.domain.boundary_point(w)
    rho = np.linspace(tile.rho_lo, tile.rho_hi, min(n_r, 60))
    return np.concatenate([pair.group.apply(r, base) for r in rho])


def count_sum_overlaps(pair, delta, u, t, sample_spacing=None, n_span=2,
                       refine_top=12):
    """Max multiplicity of the Minkowski sums {A + B : A in A_t, B in A_u}.

    Conservative two-stage count: bounding-box accumulation on a cell grid
    of spacing <= delta/4, then exact Minkowski membership at the highest
    cells (x in A + B iff (x - A) meets B, tested on a delta/8 lattice
    with delta/8 dilation of B).
    """
    if not 0.5 < u / t < 2.0:
        raise ConfigError("need 1/2 < u/t < 2")
    if sample_spacing is None:
        sample_spacing = delta / 4.0
    if sample_spacing > delta / 4.0 + 1e-15:
        raise ConfigError("sample spacing must be <= delta/4")
    n_lo = int(np.floor(np.log2(1.0 / max(t, u)) / 2.0)) - n_span
    n_hi = int(np.ceil(np.log2(1.0 / min(t, u)) / 2.0)) + n_span
    tiling = Tiling(pair, delta, (n_lo, n_hi))
    at = [tiling.tile(k) for k in _level_tiles_in_t1(tiling, t)]
    au = [tiling.tile(k) for k in _level_tiles_in_t1(tiling, u)]
    if not at or not au:
        return OverlapReport(delta, 0, {0: 0})
    boxes_t = np.array([a.bbox() for a in at])
    boxes_u = np.array([b.bbox() for b in au])
    # Minkowski sum of boxes: componentwise interval sums
    sums = np.empty((len(at) * len(au), 2, 2))
    pair_ids = np.empty((len(at) * len(au), 2), dtype=int)
    q = 0
    for ia in range(len(at)):
        lo = boxes_t[ia, 0] + boxes_u[:, 0]
        hi = boxes_t[ia, 1] + boxes_u[:, 1]
        sums[q:q + len(au), 0] = lo
        sums[q:q + len(au), 1] = hi
        pair_ids[q:q + len(au), 0] = ia
        pair_ids[q:q + len(au), 1] = np.arange(len(au))
        q += len(au)
    lo_all = sums[:, 0].min(axis=0)
    hi_all = sums[:, 1].max(axis=0)
    x_edges = np.arange(lo_all[0], hi_all[0] + sample_spacing, sample_spacing)
    y_edges = np.arange(lo_all[1], hi_all[1] + sample_spacing, sample_spacing)
    if (len(x_edges) - 1) * (len(y_edges) - 1) > 6.0e7:
        raise ConfigError("overlap sample grid too large; raise spacing window")
    counts = _accumulate_boxes(sums, x_edges, y_edges)
    hist_vals, hist_cnt = np.unique(counts, return_counts=True)
    histogram = dict(zip(hist_vals.tolist(), hist_cnt.tolist()))
    # exact refinement at the busiest cells
    flat = counts.ravel()
    top = np.argsort(flat)[::-1][:refine_top]
    best = 0
    lat_t = [_tile_lattice(a, delta / 8.0) for a in at]
    for cell in top:
        if flat[cell] <= best:
            break
        cx = x_edges[cell // counts.shape[1]] + 0.5 * sample_spacing
        cy = y_edges[cell % counts.shape[1]] + 0.5 * sample_spacing
        x = np.array([cx, cy])
        inside = (sums[:, 0, 0] <= x[0]) & (x[0] <= sums[:, 1, 0]) \
            & (sums[:, 0, 1] <= x[1]) & (x[1] <= sums[:, 1, 1])
        mult = 0
        for pid in np.flatnonzero(inside):
            ia, ib = pair_ids[pid]
            diff = x[None, :] - lat_t[ia]
            if np.any(au[ib].contains(diff, tol=delta / 8.0)):
                mult += 1
        best = max(best, mult)
    return OverlapReport(delta, best, histogram,
                         fit_data=[(float(delta), int(best))])


def count_ball_sum_overlaps(pair, delta, u, t, sample_spacing=None, n_span=2,
                            refine_top=12):
    """Max multiplicity of {A + B_rho(0, 2/t)} over A in A_u."""
    if sample_spacing is None:
        sample_spacing = delta / 4.0
    if sample_spacing > delta / 4.0 + 1e-15:
        raise ConfigError("sample spacing must be <= delta/4")
    n_lo = int(np.floor(np.log2(1.0 / u) / 2.0)) - n_span
    n_hi = int(np.ceil(np.log2(1.0 / u) / 2.0)) + n_span
    tiling = Tiling(pair, delta, (n_lo, n_hi))
    au = [tiling.tile(k) for k in _level_tiles_in_t1(tiling, u)]
    if not au:
        return OverlapReport(delta, 0, {0: 0})
    # bbox of the quasinorm ball {rho <= 2/t}
    w = np.linspace(-np.pi, np.pi, 257)
    bp = pair.group.apply(2.0 / t, pair.domain.boundary_point(w))
    ball_lo, ball_hi = bp.min(axis=0), bp.max(axis=0)
    boxes = np.array([b.bbox() for b in au])
    sums = np.stack([boxes[:, 0] + ball_lo, boxes[:, 1] + ball_hi], axis=1)
    lo_all = sums[:, 0].min(axis=0)
    hi_all = sums[:, 1].max(axis=0)
    x_edges = np.arange(lo_all[0], hi_all[0] + sample_spacing, sample_spacing)
    y_edges = np.arange(lo_all[1], hi_all[1] + sample_spacing, sample_spacing)
    if (len(x_edges) - 1) * (len(y_edges) - 1) > 6.0e7:
        raise ConfigError("overlap sample grid too large")
    counts = _accumulate_boxes(sums, x_edges, y_edges)
    hist_vals, hist_cnt = np.unique(counts, return_counts=True)
    histogram = dict(zip(hist_vals.tolist(), hist_cnt.tolist()))
    # refine the max: exact test x - ball meets tile, i.e. tile dilated by
    # the ball contains x; conservative via tile.contains with rho slack
    flat = counts.ravel()
    top = np.argsort(flat)[::-1][:refine_top]
    best = 0
    ball_pts = pair.group.apply(2.0 / t, pair.domain.boundary_point(
        np.linspace(-np.pi, np.pi, 65)))
    ball_pts = np.concatenate([ball_pts, 0.5 * ball_pts, [[0.0, 0.0]]])
    for cell in top:
        if flat[cell] <= best:
            break
        cx = x_edges[cell // counts.shape[1]] + 0.5 * sample_spacing
        cy = y_edges[cell % counts.shape[1]] + 0.5 * sample_spacing
        x = np.array([cx, cy])
        mult = 0
        for b in au:
            diff = x[None, :] - ball_pts
            if np.any(b.contains(diff, tol=delta / 8.0)):
                mult += 1
        best = max(best, mult)
    return OverlapReport(delta, best, histogram)


def active_time_measure(tile, pair, delta, step_factor=1.0 / 16.0):
    """Logarithmic measure of {t : annulus t(1-d) <= rho <= t(1+d) meets
    the tile's rho-range}, scanned at log-step delta/16."""
    step = delta * step_factor
    lo = np.log(tile.rho_lo / (1.0 + delta)) - 4 * step
    hi = np.log(tile.rho_hi / (1.0 - delta)) + 4 * step
    s = np.arange(lo, hi + step, step)
    t = np.exp(s)
    active = (t * (1.0 - delta) <= tile.rho_hi) & (t * (1.0 + delta) >= tile.rho_lo)
    return float(np.sum(active) * step)
