"""Young and rough integration on grids, their improper extensions at 0+,
Chen-relation checks, controlled-path algebra and the level-2 Young lift.

All discrete integrals are left-point sums. Improper limits are taken along
the dyadic anchors ``2^-n t``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .grid import Grid, SampledPath, TwoParamField, pair_rows, snap_to_grid


def _same_grid(a: SampledPath, b: SampledPath) -> None:
    if a.grid is not b.grid and not np.array_equal(a.t, b.t):
        raise ValueError("paths must share a grid")


# ---------------------------------------------------------------- level 1


def young_integral(Y: SampledPath, X: SampledPath, s: float, t: float) -> float:
    """Left-point Riemann sum of ``Y dX`` over the grid points in ``[s, t]``."""
    _same_grid(Y, X)
    i = snap_to_grid(Y.grid, s, "s")
    j = snap_to_grid(Y.grid, t, "t")
    if j < i:
        raise ValueError("need s <= t")
    return float(np.dot(Y.values[i:j], np.diff(X.values[i:j + 1])))


def _cumulative_young(Y: SampledPath, X: SampledPath) -> np.ndarray:
    return np.concatenate([[0.0], np.cumsum(Y.values[:-1] * np.diff(X.values))])


@dataclass
class ImproperReport:
    """Dyadic sequence ``I_n = int_{2^-n t}^t``, its extrapolated limit and fitted rate."""

    limit: float
    sequence: np.ndarray
    increments: np.ndarray
    anchors: np.ndarray
    fitted_rate: float
    predicted_rate: float
    diverged: bool
    conditions: dict = field(default_factory=dict)
    Z: "ControlledPath | None" = None

    def to_dict(self) -> dict:
        return {
            "value": self.limit,
            "I_n": [float(x) for x in self.sequence],
            "anchors": [float(x) for x in self.anchors],
            "fitted_rate": self.fitted_rate,
            "predicted_rate": self.predicted_rate,
            "flags": {"diverged": self.diverged, **{k: bool(v) for k, v in self.conditions.items()}},
        }


def _dyadic_anchors(grid: Grid, t: float, n_max: int | None) -> list[int]:
    first = grid.points[0]
    if n_max is None:
        n_max = int(math.floor(math.log2(t / first) + 1e-9)) if first > 0 else 0
        # keep at least one grid cell inside the smallest block
        while n_max > 0 and np.count_nonzero((grid.points >= t * 2.0 ** -n_max) & (grid.points <= t * 2.0 ** (1 - n_max))) < 2:
            n_max -= 1
    if n_max < 3:
        raise ValueError("grid is not refined enough towards 0 for a dyadic sequence")
    return [snap_to_grid(grid, t * 2.0 ** (-n), "dyadic anchor") for n in range(n_max + 1)]


def _fit_sequence(seq: np.ndarray) -> tuple[float, float, np.ndarray]:
    """Limit by geometric-tail extrapolation and decay rate of the increments (base 2)."""
    inc = np.diff(seq)
    n = np.arange(1, seq.size)
    good = np.abs(inc) > 0
    if good.sum() < 2:
        # exactly stationary sequence: converged with infinite rate
        return float(seq[-1]), float("inf"), inc
    slope = np.polyfit(n[good], np.log2(np.abs(inc[good])), 1)[0]
    rate = -float(slope)
    d1, d0 = inc[-1], inc[-2]
    limit = float(seq[-1])
    if d0 != 0:
        r = d1 / d0
        if abs(r) < 1:
            limit += d1 * r / (1.0 - r)
    return limit, rate, inc


def improper_young(
    Y: SampledPath, X: SampledPath, t: float | None = None, *, eta1: float, eta2: float, n_max: int | None = None
) -> ImproperReport:
    """Improper Young integral ``int_{0+}^t Y dX`` along dyadic anchors.

    ``eta1``, ``eta2`` are the singular exponents of Y and X; they only feed
    the reported preconditions and the predicted rate ``min(eta1, 0) + eta2``.
    """
    _same_grid(Y, X)
    if Y.t[0] <= 0:
        raise ValueError("improper integrals need a grid on (0, T]")
    t = Y.t[-1] if t is None else t
    idx = _dyadic_anchors(Y.grid, t, n_max)
    cum = _cumulative_young(Y, X)
    j = idx[0]
    seq = np.array([cum[j] - cum[i] for i in idx])
    limit, rate, inc = _fit_sequence(seq)
    conditions = {"eta2>0": eta2 > 0, "eta1+eta2>0": eta1 + eta2 > 0, "eta1!=0": eta1 != 0}
    return ImproperReport(
        limit=limit,
        sequence=seq,
        increments=inc,
        anchors=Y.t[idx],
        fitted_rate=rate,
        predicted_rate=min(eta1, 0.0) + eta2,
        diverged=not rate > 0,
        conditions=conditions,
    )


# ---------------------------------------------------------------- level 2


@dataclass(frozen=True)
class InhomRoughPath:
    """``(X, X_hat, XX)`` with regularities ``alpha``, ``beta`` and ``alpha + beta``."""

    X: SampledPath
    X_hat: SampledPath
    XX: TwoParamField
    alpha: float
    beta: float

    def __post_init__(self):
        _same_grid(self.X, self.X_hat)
        if len(self.XX.grid) != len(self.X.grid):
            raise ValueError("second level must live on the path grid")
        if not (0 < self.alpha < 1 and 0 < self.beta < 1):
            raise ValueError("alpha, beta must lie in (0, 1)")
        if self.alpha + 2 * self.beta <= 1:
            raise ValueError("need alpha + 2 beta > 1")

    @property
    def grid(self) -> Grid:
        return self.X.grid


@dataclass(frozen=True)
class ControlledPath:
    """``(Y, Y')`` controlled by ``controller``; the remainder is always derived.

    ``tag`` names which component of the rough path controls Y (``"X_hat"``
    for integrands, ``"X"`` for integrals).
    """

    Y: SampledPath
    Y_prime: SampledPath
    controller: SampledPath
    gamma: float
    tag: str = "X_hat"

    def __post_init__(self):
        _same_grid(self.Y, self.Y_prime)
        _same_grid(self.Y, self.controller)
        if self.tag not in ("X", "X_hat"):
            raise ValueError("tag must be 'X' or 'X_hat'")

    def remainder(self, i, j) -> np.ndarray:
        y, yp, c = self.Y.values, self.Y_prime.values, self.controller.values
        i, j = np.asarray(i), np.asarray(j)
        return y[j] - y[i] - yp[i] * (c[j] - c[i])

    def remainder_field(self) -> TwoParamField:
        return TwoParamField(self.Y.grid, self.remainder)


def levy_area_leftpoint(X_hat: SampledPath, X: SampledPath) -> TwoParamField:
    """``XX[s, t] = sum_{u in [s, t)} (X_hat_u - X_hat_s)(X_{u+} - X_u)``.

    Held through the prefix sums ``A_k = sum_{u<k} X_hat_u dX_u`` as
    ``XX[i, j] = A_j - A_i - X_hat_i (X_j - X_i)``; satisfies the discrete
    Chen relation identically.
    """
    _same_grid(X_hat, X)
    xh, x = X_hat.values.copy(), X.values.copy()
    A = np.concatenate([[0.0], np.cumsum(xh[:-1] * np.diff(x))])

    def rule(i, j):
        return (A[j] - A[i]) - xh[i] * (x[j] - x[i])

    return TwoParamField(X.grid, rule)


def _chen_terms(field_: TwoParamField, xh: np.ndarray, x: np.ndarray, s, u, t, tensor: bool) -> np.ndarray:
    lhs = field_(s, t) - field_(s, u) - field_(u, t)
    a = xh[u] - xh[s]
    b = x[t] - x[u]
    cross = a[..., :, None] * b[..., None, :] if tensor else a * b
    d = np.abs(lhs - cross)
    if tensor:
        d = d.reshape(d.shape[:-2] + (-1,)).max(axis=-1)
    return d


def _chen_defect(field_, xh, x, max_triples, seed, tensor):
    n = len(field_.grid)
    total = n * (n - 1) * (n - 2) // 6
    if total == 0:
        return 0.0, 0, True
    if total <= max_triples:
        worst = 0.0
        for u in range(1, n - 1):
            s = np.arange(u)[:, None]
            t = np.arange(u + 1, n)[None, :]
            uu = np.full((1, 1), u)
            worst = max(worst, float(_chen_terms(field_, xh, x, s, uu, t, tensor).max()))
        return worst, total, True
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.integers(0, n, size=(max_triples, 3)), axis=1)
    idx = idx[(idx[:, 0] < idx[:, 1]) & (idx[:, 1] < idx[:, 2])]
    worst = 0.0
    for k0 in range(0, idx.shape[0], 200_000):
        blk = idx[k0:k0 + 200_000]
        worst = max(worst, float(_chen_terms(field_, xh, x, blk[:, 0], blk[:, 1], blk[:, 2], tensor).max()))
    return worst, idx.shape[0], False


def chen_defect_detail(rp: InhomRoughPath, max_triples: int = 10 ** 6, seed: int = 0) -> tuple[float, int, bool]:
    """``(defect, triples checked, exhaustive?)``; random triples above ``max_triples``."""
    return _chen_defect(rp.XX, rp.X_hat.values, rp.X.values, max_triples, seed, tensor=False)


def chen_defect(rp: InhomRoughPath, max_triples: int = 10 ** 6, seed: int = 0) -> float:
    """``max |XX_st - XX_su - XX_ut - (X_hat_u - X_hat_s)(X_t - X_u)|`` over grid triples."""
    return chen_defect_detail(rp, max_triples, seed)[0]


def tensor_chen_defect(field_: TwoParamField, path: SampledPath, max_triples: int = 10 ** 6, seed: int = 0) -> float:
    """Chen defect of a 2x2 level-2 field over a planar path."""
    xy = _planar(path)
    return _chen_defect(field_, xy, xy, max_triples, seed, tensor=True)[0]


def rough_integral(cp: ControlledPath, rp: InhomRoughPath, s: float, t: float, stride: int = 1) -> float:
    """Compensated sum ``sum Y_u (X_v - X_u) + Y'_u XX[u, v]`` over the partition.

    The partition takes every ``stride``-th grid point from ``s`` and always
    ends at ``t``. With left-point second levels on the same grid, ``stride=1``
    reduces to the Young sum since ``XX[u, u+] = 0``.
    """
    _check_controller(cp, rp)
    i = snap_to_grid(rp.grid, s, "s")
    j = snap_to_grid(rp.grid, t, "t")
    if j < i:
        raise ValueError("need s <= t")
    if stride < 1:
        raise ValueError("stride must be >= 1")
    part = np.arange(i, j, stride)
    nxt = np.append(part[1:], j)
    y, yp, x = cp.Y.values, cp.Y_prime.values, rp.X.values
    # two dot products so that Y' = 0 reproduces the Young sum bit for bit
    return float(np.dot(y[part], x[nxt] - x[part]) + np.dot(yp[part], rp.XX(part, nxt)))


def _check_controller(cp: ControlledPath, rp: InhomRoughPath) -> None:
    if cp.tag != "X_hat":
        raise ValueError("integrand must be controlled by X_hat")
    _same_grid(cp.Y, rp.X)
    if not np.array_equal(cp.controller.values, rp.X_hat.values):
        raise ValueError("controller does not match X_hat of the rough path")


def _cumulative_rough(cp: ControlledPath, rp: InhomRoughPath) -> np.ndarray:
    k = np.arange(len(rp.grid) - 1)
    steps = cp.Y.values[:-1] * np.diff(rp.X.values) + cp.Y_prime.values[:-1] * rp.XX(k, k + 1)
    return np.concatenate([[0.0], np.cumsum(steps)])


def improper_rough(
    cp: ControlledPath,
    rp: InhomRoughPath,
    t: float | None = None,
    *,
    eta1: float,
    eta2: float,
    n_max: int | None = None,
    stride: int = 1,
) -> ImproperReport:
    """Improper rough integral ``int_{0+}^t Y dX`` along dyadic anchors.

    Preconditions of the convergence theorem are evaluated and reported, not
    enforced. The report's ``Z`` is the couple ``(Z, Y)`` controlled by X on
    the grid points from the smallest anchor to T, with the extrapolated
    contribution of ``(0, 2^-n_max t]`` added.
    """
    _check_controller(cp, rp)
    grid = rp.grid
    if grid.points[0] <= 0:
        raise ValueError("improper integrals need a grid on (0, T]")
    t = grid.T if t is None else t
    idx = _dyadic_anchors(grid, t, n_max)
    seq = np.array([rough_integral(cp, rp, grid.points[i], t, stride) for i in idx])
    limit, rate, inc = _fit_sequence(seq)
    a, b = rp.alpha, rp.beta
    predicted = eta2 - b + min(eta2 - a + min(eta1 - b, 0.0), 0.0)
    conditions = {
        "eta2>max(alpha,beta)": eta2 > max(a, b),
        "2(eta2-beta)+eta1-alpha>0": 2 * (eta2 - b) + eta1 - a > 0,
        "eta1 not in {0,beta}": eta1 != 0 and eta1 != b,
    }
    # (Z, Y) on [first anchor, T]
    i0 = idx[-1]
    cum = _cumulative_rough(cp, rp)
    tail = limit - (cum[idx[0]] - cum[i0])
    zgrid = Grid(grid.points[i0:])
    Zvals = tail + cum[i0:] - cum[i0]
    Z = ControlledPath(
        SampledPath(zgrid, Zvals),
        SampledPath(zgrid, cp.Y.values[i0:]),
        SampledPath(zgrid, rp.X.values[i0:]),
        gamma=rp.beta,
        tag="X",
    )
    return ImproperReport(limit, seq, inc, grid.points[idx], rate, predicted, not rate > 0, conditions, Z)


def controlled_compose(f: Callable, Df: Callable, cp: ControlledPath) -> ControlledPath:
    """``(f(Y), Df(Y) Y')`` with the same controller."""
    y = cp.Y.values
    return ControlledPath(
        SampledPath(cp.Y.grid, f(y)),
        SampledPath(cp.Y.grid, Df(y) * cp.Y_prime.values),
        cp.controller,
        cp.gamma,
        cp.tag,
    )


@dataclass(frozen=True)
class ControlledNormReport:
    value: float
    derivative_part: float
    remainder_part: float
    eps_profile: np.ndarray = field(repr=False)


def _controlled_row_maxima(cp: ControlledPath, gamma: float, beta: float) -> tuple[np.ndarray, np.ndarray]:
    t = cp.Y.t
    yp = cp.Y_prime.values
    n = t.size
    rd, rr = np.zeros(n), np.zeros(n)
    for i0, i1 in pair_rows(n, 2_000_000):
        ii = np.arange(i0, i1)[:, None]
        jj = np.arange(i0 + 1, n)[None, :]
        if jj.size == 0:
            continue
        dt = t[jj] - t[ii]
        keep = dt > 0
        with np.errstate(divide="ignore", invalid="ignore"):
            dpart = np.where(keep, np.abs(yp[jj] - yp[ii]) / dt ** gamma, 0.0)
            rpart = np.where(keep, np.abs(cp.remainder(ii, jj)) / dt ** (gamma + beta), 0.0)
        rd[i0:i1] = dpart.max(axis=1)
        rr[i0:i1] = rpart.max(axis=1)
    return rd, rr


def singular_controlled_norm(cp: ControlledPath, gamma: float, beta: float, eta: float) -> ControlledNormReport:
    """Singular controlled seminorm: the larger of the two weighted suprema.

    Derivative increments carry ``s^(eta-(gamma+beta)) |t-s|^gamma``, the
    remainder ``s^(eta-(gamma+beta)) |t-s|^(gamma+beta)``. Both parts are
    also reported. The eps-profile rows are
    ``(eps, eps^(gamma+beta-eta) * max(part_1, part_2) on [eps, T])``.
    """
    if eta > gamma + beta:
        raise ValueError("need eta <= gamma + beta")
    t = cp.Y.t
    if t[0] <= 0:
        raise ValueError("singular norms need a grid on (0, T]")
    rd, rr = _controlled_row_maxima(cp, gamma, beta)
    w = t ** (eta - (gamma + beta))
    dpart = float(np.max(rd / w))
    rpart = float(np.max(rr / w))
    both = np.maximum(rd, rr)
    suffix = np.maximum.accumulate(both[::-1])[::-1]
    eps = t[:-1]
    profile = np.column_stack([eps, suffix[:-1] * eps ** (gamma + beta - eta)])
    return ControlledNormReport(max(dpart, rpart), dpart, rpart, profile)


# ---------------------------------------------------------------- planar lift


def _planar(path: SampledPath) -> np.ndarray:
    v = path.values
    if not path.is_planar:
        raise ValueError("expected a planar (complex) path")
    return np.column_stack([v.real, v.imag])


def level2_lift_young(path: SampledPath, a: float | None = None) -> tuple[SampledPath, TwoParamField]:
    """Left-point iterated integrals ``int_s^t (g_r - g_s) (x) dg_r`` on ``[a, T]``.

    Returns the restricted path and a field with 2x2 values; the
    antisymmetric part is the signed (Lévy) area.
    """
    if a is not None:
        keep = path.t >= a - 1e-12 * max(1.0, abs(a))
        path = SampledPath(Grid(path.t[keep]), path.values[keep])
    g = _planar(path)
    dg = np.diff(g, axis=0)
    A = np.concatenate([np.zeros((1, 2, 2)), np.cumsum(g[:-1, :, None] * dg[:, None, :], axis=0)])

    def rule(i, j):
        i, j = np.asarray(i), np.asarray(j)
        gi = g[i]
        inc = g[j] - gi
        return A[j] - A[i] - gi[..., :, None] * inc[..., None, :]

    return path, TwoParamField(path.grid, rule)


def signed_area(field_: TwoParamField, i, j) -> np.ndarray:
    v = field_(i, j)
    return 0.5 * (v[..., 0, 1] - v[..., 1, 0])


def shoelace_area(path: SampledPath) -> float:
    """Signed area of the polygon closed by the chord from the last point back to the first."""
    z = path.values
    x, y = z.real - z.real[0], z.imag - z.imag[0]
    return 0.5 * float(np.sum(x[:-1] * y[1:] - x[1:] * y[:-1]))
