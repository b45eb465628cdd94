"""Singular Hölder and Besov seminorms and exponent estimation on sampled paths.

All suprema are maxima over grid pairs. Planar (complex) paths use the
Euclidean modulus.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid, SampledPath, pair_rows


class DegenerateIntervalWarning(UserWarning):
    """Fewer than two grid points in the requested interval."""


@dataclass(frozen=True)
class SingularNormReport:
    alpha: float
    eta: float
    value: float
    # rows of (eps, ||Y||_{alpha;[eps,T]} * eps^(alpha-eta))
    eps_profile: np.ndarray = field(repr=False)


@dataclass(frozen=True)
class ExponentEstimate:
    alpha_hat: float
    eta_hat: float
    oscillation_slope: float
    profile_slope: float
    degenerate: bool = False
    low_confidence: bool = False
    eps: np.ndarray = field(default=None, repr=False)
    seminorms: np.ndarray = field(default=None, repr=False)


def _check_alpha(alpha: float) -> None:
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")


def _require_positive_domain(path: SampledPath) -> None:
    if path.t[0] <= 0:
        raise ValueError("singular seminorms need a grid on (0, T]; t = 0 is not allowed")


def _row_maxima(t: np.ndarray, v: np.ndarray, alpha: float, *, lag_le_s: bool = False) -> np.ndarray:
    """``r[i] = max_{j > i} |v_j - v_i| / (t_j - t_i)^alpha`` (0 for the last row).

    With ``lag_le_s`` only pairs with ``t_j - t_i <= t_i`` take part.
    """
    n = t.size
    out = np.zeros(n)
    for i0, i1 in pair_rows(n):
        ti = t[i0:i1, None]
        tj = t[None, i0 + 1:]
        dt = tj - ti
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.abs(v[None, i0 + 1:] - v[i0:i1, None]) / dt ** alpha
        keep = dt > 0
        if lag_le_s:
            keep &= dt <= ti
        ratio = np.where(keep, ratio, 0.0)
        if ratio.shape[1]:
            out[i0:i1] = ratio.max(axis=1)
    return out


def _points_in(path: SampledPath, a: float, b: float) -> np.ndarray:
    t = path.t
    tol = 1e-12 * max(1.0, abs(t[0]), abs(t[-1]))
    return (t >= a - tol) & (t <= b + tol)


def holder_seminorm(path: SampledPath, alpha: float, a: float | None = None, b: float | None = None) -> float:
    """Hölder-``alpha`` seminorm over grid pairs inside ``[a, b]``.

    Returns 0 and emits :class:`DegenerateIntervalWarning` when the interval
    holds fewer than two grid points.
    """
    _check_alpha(alpha)
    a = path.t[0] if a is None else a
    b = path.t[-1] if b is None else b
    mask = _points_in(path, a, b)
    if mask.sum() < 2:
        warnings.warn(f"interval [{a}, {b}] has fewer than two grid points", DegenerateIntervalWarning, stacklevel=2)
        return 0.0
    t, v = path.t[mask], path.values[mask]
    return float(_row_maxima(t, v, alpha).max())


def singular_holder_seminorm(path: SampledPath, alpha: float, eta: float) -> SingularNormReport:
    """The weighted seminorm ``max |Y_t - Y_s| / (s^(eta-alpha) |t-s|^alpha)``.

    The eps-profile is evaluated at every grid point except the last one,
    using suffix maxima of the per-row maxima (one O(N^2) pass).
    """
    _check_alpha(alpha)
    if eta > alpha:
        raise ValueError("need eta <= alpha")
    _require_positive_domain(path)
    t, v = path.t, path.values
    rows = _row_maxima(t, v, alpha)
    value = float(np.max(rows / t ** (eta - alpha)))
    suffix = np.maximum.accumulate(rows[::-1])[::-1]
    eps = t[:-1]
    profile = np.column_stack([eps, suffix[:-1] * eps ** (alpha - eta)])
    return SingularNormReport(alpha, eta, value, profile)


def singular_via_eps_profile(path: SampledPath, alpha: float, eta: float) -> float:
    """``max_eps eps^(alpha-eta) * holder_seminorm(path, alpha, eps, T)`` over grid eps.

    Independent of :func:`singular_holder_seminorm`; cubic in the grid size.
    """
    _check_alpha(alpha)
    if eta > alpha:
        raise ValueError("need eta <= alpha")
    _require_positive_domain(path)
    T = path.t[-1]
    best = 0.0
    for eps in path.t[:-1]:
        best = max(best, eps ** (alpha - eta) * holder_seminorm(path, alpha, eps, T))
    return best


def weighted_seminorm(path: SampledPath, alpha: float, delta: float, eta: float, *, restricted: bool = False) -> float:
    """``max |Y_t - Y_s| / (s^(eta-delta) |t-s|^alpha)``, optionally over ``t - s <= s`` only."""
    _check_alpha(alpha)
    if delta <= 0 or eta > delta:
        raise ValueError("need delta > 0 and eta <= delta")
    _require_positive_domain(path)
    rows = _row_maxima(path.t, path.values, alpha, lag_le_s=restricted)
    return float(np.max(rows / path.t ** (eta - delta)))


def restricted_seminorm(path: SampledPath, alpha: float, delta: float, eta: float) -> float:
    """Weighted seminorm over pairs with ``|t - s| <= s``."""
    return weighted_seminorm(path, alpha, delta, eta, restricted=True)


def lemma_constant(alpha: float, eta: float, delta: float) -> float:
    """Constant ``C`` in ``full <= C * restricted`` from the dyadic chain argument.

    Chain ``s, 2s, ..., 2^N s, t`` with ``N = floor(log2(t/s))``. The last link
    costs at most ``s^(eta-delta) (t-s)^alpha``; the first N links sum to
    ``s^(a+...)`` times ``G_N = sum_{n<N} 2^(n a)`` with ``a = alpha+eta-delta``,
    and ``t - s >= 2^(N-1) s`` when ``N >= 1``.
    """
    _check_alpha(alpha)
    if delta <= 0 or eta > delta:
        raise ValueError("need delta > 0 and eta <= delta")
    a = alpha + eta - delta
    if a > 0:
        return 1.0 + 2.0 ** alpha / (2.0 ** a - 1.0)
    if a < 0:
        return 1.0 + 1.0 / (1.0 - 2.0 ** a)
    # a == 0: G_N = N; sup over N >= 1 of N 2^{-(N-1) alpha} is attained near 1/(alpha ln 2)
    n_peak = max(1, int(math.ceil(1.0 / (alpha * math.log(2.0)))) + 1)
    ns = np.arange(1, 4 * n_peak + 8)
    return 1.0 + float(np.max(ns * 2.0 ** (-(ns - 1) * alpha)))


def reparametrize_power(path: SampledPath, beta: float, strict: bool = True) -> SampledPath:
    """``Z(t) = Y(t^beta)`` on the grid ``{t_i^(1/beta)}`` (no interpolation).

    ``strict=False`` permits ``beta < 1``, which is only useful for inverting a
    previous reparametrisation.
    """
    if beta <= 0 or (strict and beta < 1):
        raise ValueError("beta must be >= 1")
    _require_positive_domain(path)
    return SampledPath(Grid(path.t ** (1.0 / beta)), path.values)


def singular_besov_norm(path: SampledPath, delta: float, q: float, eta: float, band: int = 1) -> float:
    """Midpoint-rule discretisation of the singular Besov norm.

    Cells ``i < j`` with ``j - i < band`` (the diagonal band) are dropped; the
    integrand is singular on the diagonal. Path values at cell midpoints are
    linear interpolants.
    """
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    if q < 1:
        raise ValueError("q must be >= 1")
    alpha = delta - 1.0 / q
    if alpha <= 0:
        raise ValueError("need delta - 1/q > 0")
    if eta > alpha + 1e-12:
        raise ValueError("need eta <= delta - 1/q")
    if band < 1:
        raise ValueError("band must be >= 1")
    _require_positive_domain(path)
    t, v = path.t, path.values
    mid = 0.5 * (t[1:] + t[:-1])
    vm = 0.5 * (v[1:] + v[:-1])
    h = np.diff(t)
    n = mid.size
    total = 0.0
    for i0, i1 in pair_rows(n):
        j0 = i0 + band
        if j0 >= n:
            break
        s = mid[i0:i1, None]
        tt = mid[None, j0:]
        idx_i = np.arange(i0, i1)[:, None]
        idx_j = np.arange(j0, n)[None, :]
        keep = idx_j - idx_i >= band
        num = np.abs(vm[None, j0:] - vm[i0:i1, None]) ** q
        with np.errstate(divide="ignore", invalid="ignore"):
            den = s ** (q * (eta - alpha)) * (tt - s) ** (1.0 + delta * q)
            cell = np.where(keep, num / den, 0.0) * h[i0:i1, None] * h[None, j0:]
        total += float(cell.sum())
    return total ** (1.0 / q)


DEFAULT_ALPHA_GRID = np.round(np.arange(0.01, 1.0, 0.01), 2)


def oscillation_slope(path: SampledPath, a: float | None = None, max_lag_fraction: int = 32) -> float:
    """Log-log slope of the maximal increment against the time lag on ``[a, T]``.

    Lags are dyadic in the grid index, up to ``n // max_lag_fraction``. At every
    lag the maximum runs over the same number ``M = max_lag_fraction`` of
    evenly spread increments, so the maxima are comparable across scales
    (no extreme-value drift from a lag-dependent sample count). ``a``
    defaults to ``T/2``. Returns nan when every increment vanishes.
    """
    T = path.t[-1]
    a = T / 2 if a is None else a
    mask = path.t >= a
    t, v = path.t[mask], path.values[mask]
    n = t.size
    m = max_lag_fraction
    osc, scale = [], []
    k = 1
    while k <= max(1, n // m):
        start = np.unique(np.round(np.linspace(0, n - 1 - k, m)).astype(int))
        osc.append(np.abs(v[start + k] - v[start]).max())
        scale.append(np.median(t[start + k] - t[start]))
        k *= 2
    osc = np.asarray(osc)
    if len(osc) < 2 or np.all(osc == 0):
        return float("nan")
    good = osc > 0
    slope, _ = np.polyfit(np.log(np.asarray(scale)[good]), np.log(osc[good]), 1)
    return float(slope)


def estimate_exponents(
    path: SampledPath,
    alpha_grid=None,
    *,
    min_block_points: int = 32,
    residual_tol: float = 0.2,
) -> ExponentEstimate:
    """Estimate ``(alpha, eta)`` with ``||Y||_{alpha;[eps,T]} ~ eps^(eta - alpha)``.

    ``alpha_hat`` is the largest entry of ``alpha_grid`` not exceeding the
    oscillation slope fitted on ``[T/2, T]``. ``eta_hat`` adds the log-log slope
    of the interval seminorm over dyadic ``eps = T 2^-k``, stopping once
    ``[eps, 2 eps]`` holds fewer than ``min_block_points`` grid points.
    """
    _require_positive_domain(path)
    if len(path) < 64:
        raise ValueError("need at least 64 grid points")
    grid_a = DEFAULT_ALPHA_GRID if alpha_grid is None else np.sort(np.asarray(alpha_grid, dtype=float))
    slope = oscillation_slope(path)
    if not np.isfinite(slope):
        return ExponentEstimate(float("nan"), float("nan"), slope, float("nan"), degenerate=True)
    admissible = grid_a[grid_a <= slope]
    low = admissible.size == 0
    alpha_hat = float(admissible[-1]) if admissible.size else float(grid_a[0])

    t = path.t
    T = t[-1]
    rows = _row_maxima(t, path.values, alpha_hat)
    suffix = np.maximum.accumulate(rows[::-1])[::-1]
    eps_list, norms = [], []
    k = 1
    while True:
        eps = T * 2.0 ** (-k)
        if np.count_nonzero((t >= eps) & (t <= 2 * eps)) < min_block_points:
            break
        i = int(np.searchsorted(t, eps * (1 - 1e-12)))
        eps_list.append(eps)
        norms.append(suffix[i])
        k += 1
    eps_arr, norm_arr = np.asarray(eps_list), np.asarray(norms)
    if eps_arr.size < 3 or np.any(norm_arr <= 0):
        return ExponentEstimate(alpha_hat, float("nan"), slope, float("nan"), degenerate=bool(np.any(norm_arr <= 0)),
                                low_confidence=True, eps=eps_arr, seminorms=norm_arr)
    x, y = np.log(eps_arr), np.log(norm_arr)
    b, c = np.polyfit(x, y, 1)
    resid = y - (b * x + c)
    low = low or float(np.std(resid)) > residual_tol
    return ExponentEstimate(alpha_hat, alpha_hat + float(b), slope, float(b), low_confidence=bool(low),
                            eps=eps_arr, seminorms=norm_arr)


def log_log_slope(x, y) -> float:
    """Least-squares slope of ``log y`` against ``log x``."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0)
    if keep.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def profile_trend(eps_profile: np.ndarray, eps_max: float | None = None) -> float:
    """Slope of ``log P(eps)`` against ``log eps`` over dyadic eps.

    ``eps_profile`` rows are ``(eps, P(eps))``. The profile is sampled at the
    dyadic points ``T 2^-k`` (T the largest eps) that the rows reach, restricted
    to ``eps <= eps_max``. A negative slope means P grows as eps decreases.
    """
    eps, p = eps_profile[:, 0], eps_profile[:, 1]
    top = eps.max() if eps_max is None else eps_max
    dy, vals = [], []
    e = top
    while e >= eps.min() * (1 - 1e-12):
        i = int(np.argmin(np.abs(eps - e)))
        dy.append(eps[i])
        vals.append(p[i])
        e /= 2
    return log_log_slope(dy, vals)
