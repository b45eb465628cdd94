"""Chordal SLE: exponent algebra, discrete Loewner traces and a Monte Carlo
check of the trace's singular Hölder regularity at the origin.

Traces are computed by composing exact inverse slit maps of a
piecewise-constant driver, so the zero driver reproduces ``2i sqrt(t)`` up to
the tip offset only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .grid import Grid, RngStream, SampledPath, make_geometric_grid, make_uniform_grid, map_replications, positive_part
from .norms import estimate_exponents, profile_trend, reparametrize_power, singular_holder_seminorm

# Shared with roughvol: a profile slope below -TREND_TOL counts as growth at small eps.
TREND_TOL = 0.05


def moment_exponents(r: float, kappa: float) -> tuple[float, float]:
    """``(q(r), zeta(r))`` of the SLE moment bound."""
    q = (1.0 + kappa / 4.0) * r - kappa * r * r / 8.0
    zeta = r - kappa * r * r / 8.0
    return q, zeta


def r_critical(kappa: float) -> float:
    return 0.5 + 4.0 / kappa


def r_star(kappa: float) -> float:
    return (-8.0 + 4.0 * math.sqrt(8.0 + kappa)) / kappa


def alpha_star(kappa: float) -> float:
    """Hölder exponent bound ``1 - kappa / (24 + 2 kappa - 8 sqrt(kappa + 8))``; equals 1 at 0."""
    if not 0 <= kappa < 8:
        raise ValueError("kappa must lie in [0, 8)")
    if kappa == 0:
        return 1.0
    return 1.0 - kappa / (24.0 + 2.0 * kappa - 8.0 * math.sqrt(kappa + 8.0))


def _objective(r: float, kappa: float) -> float:
    q, z = moment_exponents(r, kappa)
    return (z + q - 2.0) / (2.0 * q)


def alpha_star_numeric(kappa: float, grid_points: int = 2001) -> tuple[float, float]:
    """Maximum and maximiser of ``(zeta + q - 2) / (2q)`` over ``(1, r_c)``.

    Coarse grid search followed by a bounded scalar refinement.
    """
    lo, hi = admissible_interval(kappa, verify=False)
    r = np.linspace(lo, hi, grid_points)[1:-1]
    vals = np.array([_objective(x, kappa) for x in r])
    k = int(np.argmax(vals))
    a, b = r[max(k - 1, 0)], r[min(k + 1, r.size - 1)]
    res = minimize_scalar(lambda x: -_objective(x, kappa), bounds=(a, b), method="bounded",
                          options={"xatol": 1e-12})
    return float(-res.fun), float(res.x)


def admissible_interval(kappa: float, verify: bool = True, samples: int = 101) -> tuple[float, float]:
    """``(1, r_c)``: the r for which ``q > 1``, ``q + zeta > 2`` and ``r < r_c``.

    With ``verify`` the three conditions are checked on interior samples and
    shown to fail just outside; a failed check raises ``AssertionError``.
    """
    if not 0 < kappa < 8:
        raise ValueError("kappa must lie in (0, 8)")
    rc = r_critical(kappa)
    if verify:
        for r in np.linspace(1.0, rc, samples)[1:-1]:
            q, z = moment_exponents(r, kappa)
            assert q > 1 and q + z > 2 and r < rc, r
        q, z = moment_exponents(1.0 - 1e-3, kappa)
        assert not (q + z > 2)
        q, z = moment_exponents(rc + 1e-2, kappa)
        assert not (rc + 1e-2 < rc and q + z > 2)
    return 1.0, rc


@dataclass(frozen=True)
class SleParams:
    kappa: float
    r_c: float
    r_star: float
    alpha_star: float

    @classmethod
    def from_kappa(cls, kappa: float) -> "SleParams":
        if not 0 < kappa < 8:
            raise ValueError("kappa must lie in (0, 8)")
        return cls(kappa, r_critical(kappa), r_star(kappa), alpha_star(kappa))


@dataclass(frozen=True)
class EtaInterval:
    lower: float
    upper: float

    @property
    def empty(self) -> bool:
        return not self.upper > self.lower


def delta_window(kappa: float, r: float) -> tuple[float, float]:
    q, z = moment_exponents(r, kappa)
    return 1.0 / q, (z + q) / (2.0 * q)


def admissible_eta(kappa: float, r: float, delta: float, q: float | None = None) -> EtaInterval:
    """Singular exponents ``eta`` allowed by the Besov embedding of the trace.

    Upper bound ``min(delta - zeta/(2q), delta - 1/q)``; lower bound 0.
    """
    lo, hi = admissible_interval(kappa, verify=False)
    if not lo < r < hi:
        raise ValueError("r outside the admissible interval")
    q0, z = moment_exponents(r, kappa)
    if q is None:
        q = q0
    if not q + z > 2:
        raise ValueError("need q + zeta > 2")
    d_lo, d_hi = 1.0 / q, (z + q) / (2.0 * q)
    if not d_lo < delta < d_hi:
        raise ValueError(f"delta must lie in ({d_lo}, {d_hi})")
    return EtaInterval(0.0, min(delta - z / (2.0 * q), delta - 1.0 / q))


# ------------------------------------------------------------------ traces


@dataclass(frozen=True)
class TraceConfig:
    """Loewner discretisation.

    ``n`` steps on ``[0, T]``; the tip at step k sits ``c_tip * sqrt(dt_k)``
    above the driver. ``geometric_levels`` switches to a grid refined towards
    0 with ``n // geometric_levels`` points per dyadic block.
    """

    n: int = 4096
    c_tip: float = 0.25
    T: float = 1.0
    geometric_levels: int | None = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("n must be >= 2")
        if not self.c_tip > 0:
            raise ValueError("c_tip must be positive")
        if not self.T > 0:
            raise ValueError("T must be positive")
        if self.geometric_levels is not None and self.n // self.geometric_levels < 1:
            raise ValueError("fewer steps than levels")

    def grid(self) -> Grid:
        if self.geometric_levels is None:
            return make_uniform_grid(0.0, self.T, self.n + 1)
        return make_geometric_grid(self.T, self.geometric_levels, self.n // self.geometric_levels, include_zero=True)


@dataclass(frozen=True)
class Trace:
    path: SampledPath
    flagged: np.ndarray = field(repr=False)

    @property
    def n_flagged(self) -> int:
        return int(self.flagged.sum())


BRANCH_TOL = 1e-14


def loewner_trace_detail(driver: SampledPath, cfg: TraceConfig) -> Trace:
    """Trace together with the per-point branch-ambiguity flags."""
    t = driver.t
    if abs(t[0]) > 0:
        raise ValueError("driver grid must start at 0")
    U = np.asarray(driver.values, dtype=float)
    dt = np.diff(t)
    n = dt.size
    # w[k-1] follows the tip of step k through g_k^-1, ..., g_1^-1
    w = U[1:] + 1j * cfg.c_tip * np.sqrt(dt)
    flagged = np.zeros(n, dtype=bool)
    for j in range(n, 0, -1):
        sl = slice(j - 1, n)
        z = w[sl] - U[j - 1]
        root = np.sqrt(z * z - 4.0 * dt[j - 1])
        ambiguous = np.abs(root.imag) < BRANCH_TOL
        flagged[sl] |= ambiguous
        root = np.where(root.imag < 0, -root, root)
        w[sl] = U[j - 1] + root
    vals = np.concatenate([[U[0] + 0j], w])
    vals = vals.real + 1j * np.maximum(vals.imag, 0.0)
    return Trace(SampledPath(driver.grid, vals), np.concatenate([[False], flagged]))


def loewner_trace(driver: SampledPath, cfg: TraceConfig) -> SampledPath:
    """Planar trace ``gamma(t_k)`` of the Loewner chain driven by ``driver``.

    The driver is held constant on each step; the tip is pulled back through
    ``g_j^-1(w) = U + sqrt((w - U)^2 - 4 dt_j)`` on the upper-half-plane branch.
    """
    return loewner_trace_detail(driver, cfg).path


# -------------------------------------------------------------- experiment


@dataclass
class SleReport:
    kappa: float
    alpha_star: float
    alpha: float
    eta: float
    alpha_hat: np.ndarray
    trends: np.ndarray
    failures: int
    eps_profile: np.ndarray = field(repr=False)

    @property
    def alpha_hat_median(self) -> float:
        return float(np.median(self.alpha_hat))

    @property
    def alpha_hat_quartiles(self) -> tuple[float, float]:
        return float(np.quantile(self.alpha_hat, 0.25)), float(np.quantile(self.alpha_hat, 0.75))

    @property
    def no_upward_fraction(self) -> float:
        return float(np.mean(self.trends >= -TREND_TOL))

    def to_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "alpha_star": self.alpha_star,
            "alpha": self.alpha,
            "eta": self.eta,
            "alpha_hat_median": self.alpha_hat_median,
            "alpha_hat_quartiles": list(self.alpha_hat_quartiles),
            "no_upward_trend_fraction": self.no_upward_fraction,
            "trend_median": float(np.median(self.trends)) if self.trends.size else float("nan"),
            "replications_used": int(self.alpha_hat.size),
            "failures": self.failures,
            "eps_profile": [[float(e), float(p)] for e, p in self.eps_profile],
        }


def _one_replication(args):
    kappa, cfg, stream, alpha, eta = args
    grid = cfg.grid()
    gen = stream.generator()
    inc = gen.standard_normal(len(grid) - 1) * np.sqrt(np.diff(grid.points))
    driver = SampledPath(grid, math.sqrt(kappa) * np.concatenate([[0.0], np.cumsum(inc)]))
    tr = loewner_trace_detail(driver, cfg)
    if tr.n_flagged:
        return None
    gamma = positive_part(tr.path)
    est = estimate_exponents(reparametrize_power(gamma, 2.0))
    rep = singular_holder_seminorm(gamma, alpha, eta)
    return est.alpha_hat, profile_trend(rep.eps_profile), rep.eps_profile


def sle_regularity_experiment(
    kappa: float,
    cfg: TraceConfig | None = None,
    replications: int = 50,
    rng: RngStream | None = None,
    *,
    alpha: float = 0.65,
    eta: float = 0.45,
    workers: int = 1,
) -> SleReport:
    """Monte Carlo regularity study of SLE traces started at the origin.

    Per replication: ``alpha_hat`` of ``t -> gamma(t^2)`` and the slope of the
    ``(alpha, eta)`` eps-profile of ``gamma``. Traces with branch flags are
    dropped and counted.
    """
    if not 0 <= kappa < 1:
        raise ValueError("kappa must lie in [0, 1)")
    if replications < 30:
        raise ValueError("need at least 30 replications")
    cfg = cfg or TraceConfig(n=12 * 256, geometric_levels=12)
    rng = rng or RngStream(0)
    args = [(kappa, cfg, rng.spawn(r), alpha, eta) for r in range(replications)]
    out = map_replications(_one_replication, args, workers)
    good = [o for o in out if o is not None]
    if good:
        profiles = np.stack([g[2] for g in good])
        median_profile = np.column_stack([profiles[0, :, 0], np.median(profiles[:, :, 1], axis=0)])
    else:
        median_profile = np.zeros((0, 2))
    return SleReport(
        kappa=kappa,
        alpha_star=alpha_star(kappa),
        alpha=alpha,
        eta=eta,
        alpha_hat=np.array([g[0] for g in good]),
        trends=np.array([g[1] for g in good]),
        failures=len(out) - len(good),
        eps_profile=median_profile,
    )
