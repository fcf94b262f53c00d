"""Discrete function fields and the multiplier/square-function experiments.

Physical samples live at (2L/N) {-N/2, ..., N/2 - 1}^2 and frequency
samples at (pi/L) {-N/2, ..., N/2 - 1}^2, with continuum-normalized
transforms, so Parseval and multiplier algebra hold exactly on the grid.
"""

import numpy as np
import scipy.fft

from .bumps import annulus_cutoff, interval_bump, plateau
from .errors import ConfigError
from .quasinorm import frequency_grid, rho_omega_grid


class GridField(object):
    """N x N complex samples in physical or frequency space."""

    def __init__(self, N, L, values, space="physical"):
        if space not in ("physical", "frequency"):
            raise ConfigError("space must be 'physical' or 'frequency'")
        values = np.asarray(values)
        if values.shape != (N, N):
            raise ConfigError("values must be N x N")
        self.N = int(N)
        self.L = float(L)
        self.values = values.astype(complex)
        self.space = space
        self.h = 2.0 * L / N

    def x(self):
        return self.h * np.arange(-self.N // 2, self.N // 2)

    def xi(self):
        return frequency_grid(self.N, self.L)

    def to_frequency(self):
        if self.space == "frequency":
            return self
        spec = scipy.fft.fftshift(scipy.fft.fft2(
            scipy.fft.ifftshift(self.values))) * self.h ** 2
        return GridField(self.N, self.L, spec, "frequency")

    def to_physical(self):
        if self.space == "physical":
            return self
        vals = scipy.fft.fftshift(scipy.fft.ifft2(
            scipy.fft.ifftshift(self.values))) / self.h ** 2
        return GridField(self.N, self.L, vals, "physical")

    def norm(self, p=2):
        v = np.abs(self.to_physical().values if self.space == "frequency"
                   else self.values)
        cell = self.h ** 2
        if np.isinf(p):
            return float(v.max())
        return float((np.sum(v ** p) * cell) ** (1.0 / p))


def field_from_symbol_mask(pair, N, L, mask_fn, seed=None, phases="random"):
    """Physical field whose spectrum is supported where mask_fn(rho) holds."""
    rho, _ = rho_omega_grid(pair, N, L)
    mask = mask_fn(rho)
    spec = np.zeros((N, N), dtype=complex)
    if phases == "random":
        rng = np.random.default_rng(seed)
        spec[mask] = np.exp(2j * np.pi * rng.random(int(mask.sum())))
    else:
        spec[mask] = 1.0
    return GridField(N, L, spec, "frequency").to_physical()


def apply_multiplier(f, symbol):
    """F^-1[symbol * F f]; symbol is an N x N array on the frequency grid
    or a callable of (XI1, XI2)."""
    spec = f.to_frequency()
    if callable(symbol):
        xi = spec.xi()
        X1, X2 = np.meshgrid(xi, xi, indexing="ij")
        sym = symbol(X1, X2)
    else:
        sym = np.asarray(symbol)
    out = GridField(f.N, f.L, spec.values * sym, "frequency")
    return out.to_physical() if f.space == "physical" else out


def apply_quasiradial_multiplier(pair, f, m):
    """Multiplier m(rho(xi)) applied to f."""
    rho, _ = rho_omega_grid(pair, f.N, f.L)
    return apply_multiplier(f, m(rho))


def br_symbol(rho, t, lam):
    """(1 - rho/t)_+^lambda, zero at rho >= t (including the singular
    sample at rho = t when lambda < 0)."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    inside = rho < t
    out[inside] = (1.0 - rho[inside] / t) ** lam
    return out


def bochner_riesz_mean(pair, f, t, lam):
    if t <= 0:
        raise ConfigError("scale t must be positive")
    rho, _ = rho_omega_grid(pair, f.N, f.L)
    return apply_multiplier(f, br_symbol(rho, t, lam))


def dyadic_decompose_br(pair, lam, delta_min):
    """Symbols summing exactly to (1 - rho)_+^lambda.

    Pieces: m (1 - g_0), m (g_k - g_{k+1}) for k < K, and m g_K, with
    g_k(rho) = plateau(2^k (1 - rho)) and K = ceil(log2(1/delta_min)); the
    k-th piece lives where 1 - rho ~ 2^{-k} and has size ~ 2^{-k lambda}.
    """
    if delta_min <= 0 or delta_min >= 1:
        raise ConfigError("delta_min must lie in (0, 1)")
    K = int(np.ceil(np.log2(1.0 / delta_min)))

    def m(rho):
        return br_symbol(rho, 1.0, lam)

    def g(k, rho):
        return plateau(2.0 ** k * (1.0 - np.asarray(rho, dtype=float)))

    symbols = [lambda rho, _m=m, _g=g: _m(rho) * (1.0 - _g(0, rho))]
    for k in range(K):
        symbols.append(
            lambda rho, _m=m, _g=g, _k=k:
                _m(rho) * (_g(_k, rho) - _g(_k + 1, rho)))
    symbols.append(lambda rho, _m=m, _g=g, _K=K: _m(rho) * _g(_K, rho))
    return symbols


# -- square functions ---------------------------------------------------------

def active_t_grid(pair, f, delta, step=None, pad=2):
    """Log-spaced scales t where the annulus t(1 +- delta) can meet f's
    spectrum, at log-step <= delta/8."""
    if step is None:
        step = delta / 8.0
    if step > delta / 8.0 + 1e-15:
        raise ConfigError("t grid log-step must be <= delta/8")
    spec = f.to_frequency()
    rho, _ = rho_omega_grid(pair, f.N, f.L)
    amp = np.abs(spec.values)
    live = amp > 1e-12 * amp.max()
    if not np.any(live):
        return np.array([1.0])
    rmin = float(rho[live].min())
    rmax = float(rho[live].max())
    lo = np.log(max(rmin, 1e-12) / (1.0 + delta)) - pad * step
    hi = np.log(rmax / (1.0 - delta)) + pad * step
    return np.exp(np.arange(lo, hi + step, step))


def _sqfn_accumulate(pair, f, delta, t_grid, symbol_of_t, support_of_t=None):
    t_grid = np.asarray(t_grid, dtype=float)
    if len(t_grid) > 1:
        steps = np.diff(np.log(t_grid))
        if np.max(steps) > delta / 8.0 + 1e-12:
            raise ConfigError("t grid log-step must be <= delta/8")
        w = np.zeros(len(t_grid))
        w[:-1] += 0.5 * steps
        w[1:] += 0.5 * steps
    else:
        w = np.array([delta])
    spec = f.to_frequency()
    rho, _ = rho_omega_grid(pair, f.N, f.L)
    # work in unshifted FFT layout and evaluate the symbol only on its
    # rho-support (cells presorted by rho); one shift at the very end
    spec_u = scipy.fft.ifftshift(spec.values).ravel()
    rho_u = scipy.fft.ifftshift(rho).ravel()
    order = np.argsort(rho_u)
    rho_sorted = rho_u[order]
    acc = np.zeros((f.N, f.N))
    for t, wt in zip(t_grid, w):
        idx = order
        if support_of_t is not None:
            lo, hi = np.searchsorted(rho_sorted, support_of_t(t))
            idx = order[lo:hi]
        if len(idx) == 0:
            continue
        mult = np.zeros(f.N * f.N, dtype=complex)
        mult[idx] = symbol_of_t(rho_u[idx], t) * spec_u[idx]
        piece = scipy.fft.ifft2(mult.reshape(f.N, f.N), overwrite_x=True)
        acc += wt * (piece.real ** 2 + piece.imag ** 2)
    acc = scipy.fft.fftshift(acc)
    return GridField(f.N, f.L, np.sqrt(acc) / f.h ** 2, "physical")


def square_function_annulus(pair, f, delta, t_grid=None, Phi=None):
    """(integral |psi_t * f|^2 dt/t)^{1/2} with psi_t the delta-annulus
    smoother at scale t (trapezoid in log t)."""
    if t_grid is None:
        t_grid = active_t_grid(pair, f, delta)

    def symbol_of_t(rho, t):
        return annulus_cutoff(delta, Phi, t)(rho)

    def support_of_t(t):
        return (t * (1.0 - 2.0 * delta), t * (1.0 + 2.0 * delta))

    return _sqfn_accumulate(pair, f, delta, t_grid, symbol_of_t,
                            support_of_t if Phi is None else None)


def square_function_glambda(pair, f, lam, t_grid, quad_delta=None):
    """(integral |R_t^lambda f|^2 dt/t)^{1/2} over the truncated t range."""
    t_grid = np.asarray(t_grid, dtype=float)
    if quad_delta is None:
        quad_delta = 8.0 * float(np.max(np.diff(np.log(t_grid)))) if len(t_grid) > 1 else 0.1

    def symbol_of_t(rho, t):
        return br_symbol(rho, t, lam)

    return _sqfn_accumulate(pair, f, quad_delta, t_grid, symbol_of_t,
                            lambda t: (0.0, t))


# -- test-function families ---------------------------------------------------

def standard_family(pair, N, L, delta, seed=0):
    """(name, field) probes: random phases on the delta-annulus, a
    coherent (focusing) annulus sum, and a Gaussian."""
    rng = np.random.default_rng(seed)
    rho, _ = rho_omega_grid(pair, N, L)
    out = []
    band = np.abs(rho - 1.0) <= delta
    if not np.any(band):
        raise ConfigError(
            "frequency window misses the unit rho-annulus; "
            "need pi N / (2 L) above the boundary scale")
    spec = np.zeros((N, N), dtype=complex)
    spec[band] = np.exp(2j * np.pi * rng.random(int(band.sum())))
    out.append(("random-phase", GridField(N, L, spec, "frequency").to_physical()))
    spec2 = np.zeros((N, N), dtype=complex)
    spec2[band] = 1.0
    out.append(("focusing", GridField(N, L, spec2, "frequency").to_physical()))
    x = (2.0 * L / N) * np.arange(-N // 2, N // 2)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    gauss = np.exp(-(X1 ** 2 + X2 ** 2) / 2.0)
    out.append(("gaussian", GridField(N, L, gauss, "physical")))
    return out


class ScalingReport(object):
    def __init__(self, deltas, ratios, slope, residuals):
        self.deltas = list(map(float, deltas))
        self.ratios = ratios  # {delta: {name: ratio}}
        self.slope = float(slope)
        self.residuals = residuals

    def to_dict(self):
        return {"deltas": self.deltas, "slope": self.slope,
                "residuals": list(map(float, self.residuals)),
                "ratios": {str(d): {k: float(v) for k, v in r.items()}
                           for d, r in self.ratios.items()}}


def delta_scaling_experiment(pair, deltas, grid_spec, family="std", seed=0,
                             p=4.0):
    """Fit of log max_f ||S_delta f||_p / ||f||_p against log delta."""
    N, L = grid_spec
    ratios = {}
    max_curve = []
    for delta in deltas:
        fam = (standard_family(pair, N, L, delta, seed=seed)
               if family == "std" else family(pair, N, L, delta, seed))
        row = {}
        for name, f in fam:
            sf = square_function_annulus(pair, f, delta)
            row[name] = sf.norm(p) / f.norm(p)
        ratios[delta] = row
        max_curve.append(max(row.values()))
    x = np.log(np.asarray(deltas, dtype=float))
    y = np.log(np.asarray(max_curve))
    A = np.stack([x, np.ones_like(x)], axis=1)
    coef, _, _, _ = np.linalg.lstsq(A, y, rcond=None)
    resid = y - A @ coef
    return ScalingReport(deltas, ratios, coef[0], resid)


# -- multiplier-norm functional ----------------------------------------------

def _weighted_transform_norm(m, t, alpha, n):
    """Weighted 1-D norm of phi * m(t .) at resolution n (window [0, 4))."""
    s = 4.0 * np.arange(n) / n
    g = interval_bump(s, 0.5, 2.0) * m(t * s)
    ghat = scipy.fft.fft(g) * (4.0 / n)
    tau = scipy.fft.fftfreq(n, d=4.0 / n) * 2.0 * np.pi
    integrand = np.abs(ghat) ** 2 * np.abs(tau) ** (2.0 * alpha)
    dtau = 2.0 * np.pi / 4.0
    return float(np.sqrt(np.sum(integrand) * dtau))


def hormander_sobolev_norm(m, alpha, t_grid=None, base_n=4096, ladder=4,
                           rtol=0.002):
    """sup over t of the |tau|^alpha-weighted transform norm of phi m(t .).

    Refines the 1-D resolution until the value moves by less than rtol per
    doubling; returns inf when it never stabilizes (too rough an m for
    this alpha, or marginal convergence).
    """
    if t_grid is None:
        t_grid = np.exp(np.linspace(np.log(0.25), np.log(4.0), 25))
    worst = 0.0
    for t in np.atleast_1d(t_grid):
        prev = _weighted_transform_norm(m, t, alpha, base_n)
        val = np.inf
        n = base_n
        for _ in range(ladder):
            n *= 2
            cur = _weighted_transform_norm(m, t, alpha, n)
            if abs(cur - prev) <= rtol * max(abs(cur), 1e-300):
                val = cur
                break
            prev = cur
        if not np.isfinite(val):
            return float("inf")
        worst = max(worst, val)
    return worst
