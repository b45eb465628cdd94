"""Time grids, sampled paths, two-parameter fields and seeded Gaussian sampling.

Every other module works on these containers. Paths are stored on finite
grids and all suprema become maxima over grid pairs; off-grid evaluation is
linear interpolation.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np


@dataclass(frozen=True)
class Grid:
    """Strictly increasing finite set of times; the last point is the horizon."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 1 or pts.size < 2:
            raise ValueError("a grid needs at least 2 points")
        if not np.all(np.isfinite(pts)):
            raise ValueError("grid points must be finite")
        if np.any(np.diff(pts) <= 0):
            raise ValueError("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def T(self) -> float:
        return float(self.points[-1])

    @property
    def t_min(self) -> float:
        return float(self.points[0])

    def __len__(self) -> int:
        return self.points.size

    def index_of(self, t: float, tol: float = 1e-12) -> int:
        """Index of the grid point equal to ``t`` (within ``tol``), else KeyError."""
        i = int(np.argmin(np.abs(self.points - t)))
        if abs(self.points[i] - t) > tol * max(1.0, abs(t)):
            raise KeyError(f"{t!r} is not a grid point")
        return i

    def nearest_index(self, t: float) -> int:
        return int(np.argmin(np.abs(self.points - t)))


def make_uniform_grid(t_min: float, T: float, N: int) -> Grid:
    """``N`` equally spaced points from ``t_min`` to ``T`` inclusive."""
    if N < 2:
        raise ValueError("N must be at least 2")
    if not t_min < T:
        raise ValueError("need t_min < T")
    pts = np.linspace(t_min, T, N)
    pts[-1] = T
    return Grid(pts)


def make_geometric_grid(T: float, levels: int, per_level: int, include_zero: bool = False) -> Grid:
    """Grid refined geometrically towards 0.

    Each dyadic block ``[2^-k T, 2^-k+1 T)`` for ``k = 1..levels`` carries
    ``per_level`` equally spaced points, plus the endpoint ``T``. The point set
    is closed under doubling inside ``(0, T]``, so every anchor ``2^-n T`` and
    every chain ``s, 2s, 4s, ...`` stays on the grid.

    With ``include_zero`` the first block ``[0, 2^-levels T)`` is also filled
    with ``per_level`` uniform points starting at 0.
    """
    if levels < 1 or per_level < 1:
        raise ValueError("levels and per_level must be positive")
    j = np.arange(per_level) / per_level
    blocks = [T * 2.0 ** (-k) * (1.0 + j) for k in range(levels, 0, -1)]
    if include_zero:
        blocks.insert(0, T * 2.0 ** (-levels) * j)
    pts = np.concatenate(blocks + [np.array([T])])
    return Grid(pts)


@dataclass(frozen=True)
class SampledPath:
    """Values of a real or planar path on a grid.

    Planar paths are stored as complex numbers (x + iy).
    """

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values)
        if not np.iscomplexobj(vals):
            vals = vals.astype(float)
        if vals.shape != self.grid.points.shape:
            raise ValueError("values must have one entry per grid point")
        if not np.all(np.isfinite(vals)):
            raise ValueError("path values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @property
    def t(self) -> np.ndarray:
        return self.grid.points

    @property
    def is_planar(self) -> bool:
        return np.iscomplexobj(self.values)

    def __len__(self) -> int:
        return self.values.size

    def __call__(self, t):
        """Linear interpolation at arbitrary times inside the grid range."""
        t = np.asarray(t, dtype=float)
        if self.is_planar:
            return np.interp(t, self.t, self.values.real) + 1j * np.interp(t, self.t, self.values.imag)
        return np.interp(t, self.t, self.values)

    def increments(self) -> np.ndarray:
        return np.diff(self.values)

    def at(self, t: float) -> complex | float:
        return self(t)[()]


@dataclass(frozen=True)
class TwoParamField:
    """Values ``F[i, j]`` on ordered grid-index pairs ``i <= j``.

    The field is held as a vectorised rule ``rule(i, j)`` so that fields built
    from prefix sums cost O(N) memory; ``dense()`` materialises the matrix.
    Values may carry trailing dimensions (e.g. 2x2 tensors).
    """

    grid: Grid
    rule: Callable[[np.ndarray, np.ndarray], np.ndarray]
    check_diagonal: bool = field(default=True, repr=False)

    def __post_init__(self):
        if self.check_diagonal:
            idx = np.arange(len(self.grid))
            diag = np.asarray(self.rule(idx, idx))
            if np.any(np.abs(diag) > 0):
                raise ValueError("two-parameter field must vanish on the diagonal")

    def __call__(self, i, j) -> np.ndarray:
        return np.asarray(self.rule(np.asarray(i), np.asarray(j)))

    def dense(self) -> np.ndarray:
        n = len(self.grid)
        i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
        out = self(i, j)
        mask = i > j
        out = np.array(out, copy=True)
        out[mask] = 0
        return out

    @classmethod
    def from_dense(cls, grid: Grid, matrix: np.ndarray) -> "TwoParamField":
        m = np.asarray(matrix)
        n = len(grid)
        if m.shape[:2] != (n, n):
            raise ValueError("matrix shape does not match grid")
        m = m.copy()
        m.setflags(write=False)
        return cls(grid, lambda i, j: m[i, j])


@dataclass(frozen=True)
class RngStream:
    """One reproducible random stream per (seed, stream index).

    Backed by the counter-based Philox generator keyed through ``SeedSequence``
    so replications can run in any order or in parallel.
    """

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream),))
        return np.random.Generator(np.random.Philox(ss))

    def spawn(self, index: int) -> "RngStream":
        """Child stream for replication ``index``; disjoint from the parent."""
        return RngStream(self.seed, self.stream * 1_000_003 + index + 1)


def sample_brownian(grid: Grid, rng: RngStream | np.random.Generator) -> SampledPath:
    """Standard Brownian motion on ``grid`` started at 0 at ``grid.t_min``."""
    gen = rng.generator() if isinstance(rng, RngStream) else rng
    dt = np.diff(grid.points)
    inc = gen.standard_normal(dt.size) * np.sqrt(dt)
    return SampledPath(grid, np.concatenate([[0.0], np.cumsum(inc)]))


def restrict(path: SampledPath, a: float, b: float) -> SampledPath:
    """Restriction to ``[a, b]``; missing endpoints are linearly interpolated."""
    if not a < b:
        raise ValueError("need a < b")
    t = path.t
    tol = 1e-12 * max(1.0, abs(t[0]), abs(t[-1]))
    if a < t[0] - tol or b > t[-1] + tol:
        raise ValueError("[a, b] must lie inside the path domain")
    inside = (t > a + tol) & (t < b - tol)
    ts = np.concatenate([[a], t[inside], [b]])
    vs = np.concatenate([[path.at(a)], path.values[inside], [path.at(b)]])
    # keep exact grid values at endpoints that are grid points
    for k, e in ((0, a), (-1, b)):
        hit = np.nonzero(np.abs(t - e) <= tol)[0]
        if hit.size:
            vs[k] = path.values[hit[0]]
    if ts.size < 2:
        raise ValueError("empty restriction")
    return SampledPath(Grid(ts), vs)


def positive_part(path: SampledPath) -> SampledPath:
    """Restriction to grid points with ``t > 0`` (no interpolation)."""
    keep = path.t > 0
    if keep.sum() < 2:
        raise ValueError("fewer than two positive grid points")
    return SampledPath(Grid(path.t[keep]), path.values[keep])


def write_path_csv(path: SampledPath, dest: str | Path) -> None:
    """CSV with header ``t,value`` (or ``t,re,im``), 17 significant digits."""
    with open(dest, "w", newline="") as fh:
        w = csv.writer(fh)
        if path.is_planar:
            w.writerow(["t", "re", "im"])
            for t, v in zip(path.t, path.values):
                w.writerow([f"{t:.17g}", f"{v.real:.17g}", f"{v.imag:.17g}"])
        else:
            w.writerow(["t", "value"])
            for t, v in zip(path.t, path.values):
                w.writerow([f"{t:.17g}", f"{v:.17g}"])


def read_path_csv(src: str | Path) -> SampledPath:
    with open(src, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    data = np.array([[float(x) for x in r] for r in body if r])
    if header == ["t", "value"]:
        return SampledPath(Grid(data[:, 0]), data[:, 1])
    if header == ["t", "re", "im"]:
        return SampledPath(Grid(data[:, 0]), data[:, 1] + 1j * data[:, 2])
    raise ValueError(f"unrecognised path CSV header {header!r}")


def pair_rows(n: int, max_cells: int = 4_000_000) -> Iterable[tuple[int, int]]:
    """Row blocks ``[i0, i1)`` so that each block of an n x n pair scan stays small."""
    rows = max(1, max_cells // max(n, 1))
    for i0 in range(0, n, rows):
        yield i0, min(n, i0 + rows)


def map_replications(fn: Callable, args: Sequence, workers: int = 1) -> list:
    """``[fn(a) for a in args]``, optionally across a process pool.

    Results come back in input order, so output is independent of ``workers``.
    """
    if workers <= 1 or len(args) <= 1:
        return [fn(a) for a in args]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, args))


def snap_to_grid(grid: Grid, t: float, what: str = "time") -> int:
    """Nearest grid index; warns when ``t`` is not already a grid point."""
    i = grid.nearest_index(t)
    if not math.isclose(grid.points[i], t, rel_tol=1e-12, abs_tol=1e-14):
        warnings.warn(f"{what} {t!r} is off-grid; snapped to {grid.points[i]!r}", stacklevel=3)
    return i
