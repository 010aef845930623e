"""Pareto dominance, non-dominated filtering and hypervolume.

All functions use the maximization convention: larger objective values are
better and the reference point ``r`` lies below the front, so the dominated
region is the union of boxes ``[r, y]``.

Two exact engines compute the hypervolume: :func:`hv_hso` (slicing
objectives) and :func:`hv_sweep` (dimension sweep with domination pruning).
Two independent oracles exist for testing: :func:`hv_ie_oracle`
(inclusion-exclusion) and :func:`hv_mc_oracle` (uniform sampling).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from kernmobo.exceptions import (
    DataError,
    DimensionMismatch,
    EmptyFront,
    EmptyInput,
    ReferenceNotDominated,
    TooManyPoints,
)
from kernmobo.validation import check_points, check_vector


def dominates(a, b) -> bool:
    """True iff ``a >= b`` componentwise with at least one strict inequality."""
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise DimensionMismatch(f"cannot compare {a.size}-D and {b.size}-D points")
    return bool(np.all(a >= b) and np.any(a > b))


@dataclass(frozen=True)
class ParetoFront:
    """Mutually non-dominated, deduplicated points.

    Attributes:
        points: ``(k, d)`` array, rows in original input order.
        indices: position of each row in the array passed to :func:`pareto_filter`.
    """

    points: np.ndarray
    indices: tuple[int, ...] = ()

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n_objectives(self) -> int:
        return self.points.shape[1]


def pareto_filter(points) -> ParetoFront:
    """Maximal elements of ``points`` (exact duplicates collapse to the first).

    Survivors keep their input order.
    """
    P = check_points(points)
    keep: list[int] = []
    seen: set[tuple] = set()
    for i, p in enumerate(P):
        key = tuple(p.tolist())
        if key in seen:
            continue
        seen.add(key)
        ge = np.all(P >= p, axis=1)
        gt = np.any(P > p, axis=1)
        if not np.any(ge & gt):
            keep.append(i)
    return ParetoFront(P[keep].copy(), tuple(keep))


def _front_array(front) -> np.ndarray:
    if isinstance(front, ParetoFront):
        return front.points
    return np.asarray(front, dtype=float)


def _prepare(front, r) -> tuple[np.ndarray, np.ndarray]:
    P = _front_array(front)
    if P.size == 0:
        r = check_vector(r, name="reference point")
        return P.reshape(0, r.size), r
    P = check_points(P)
    r = check_vector(r, P.shape[1], "reference point")
    bad = ~np.all(P > r, axis=1)
    if np.any(bad):
        i = int(np.flatnonzero(bad)[0])
        raise ReferenceNotDominated(
            f"point {P[i].tolist()} does not strictly dominate reference {r.tolist()}")
    return P, r


# -- slicing objectives -------------------------------------------------------------

def _weakly_dominates_from(a, b, k: int) -> bool:
    return all(a[j] >= b[j] for j in range(k, len(a)))


def _hso_insert(p, k: int, pl: list) -> list:
    """Insert ``p`` into ``pl`` (sorted by coordinate ``k`` descending), keeping
    only points that are non-dominated in coordinates ``k..d-1``."""
    if any(_weakly_dominates_from(q, p, k) for q in pl):
        return pl
    kept = [q for q in pl if not _weakly_dominates_from(p, q, k)]
    pos = 0
    while pos < len(kept) and kept[pos][k] >= p[k]:
        pos += 1
    return kept[:pos] + [p] + kept[pos:]


def _hso_slice(pl: list, k: int, m: float, r) -> list:
    out = []
    p = pl[0]
    ql = _hso_insert(p, k + 1, [])
    for q in pl[1:]:
        width = p[k] - q[k]
        if width > 0:
            out.append((m * width, ql))
        ql = _hso_insert(q, k + 1, ql)
        p = q
    out.append((m * (p[k] - r[k]), ql))
    return out


def hv_hso(front, r) -> float:
    """Hypervolume by slicing objectives.

    Points are sorted on objective 1 (descending, ties by input order) and
    sliced one objective at a time. Each slice carries the product of the
    widths cut so far as its multiplier. The last objective is measured
    directly.

    Raises:
        ReferenceNotDominated: a point is not strictly above ``r`` in every
            coordinate.
    """
    P, r = _prepare(front, r)
    if len(P) == 0:
        return 0.0
    n, d = P.shape
    rr = r.tolist()
    order = sorted(range(n), key=lambda i: (-P[i, 0], i))
    pl = [tuple(P[i].tolist()) for i in order]
    if d == 1:
        return pl[0][0] - rr[0]
    slices = [(1.0, pl)]
    for k in range(d - 1):
        nxt = []
        for m, sub in slices:
            nxt.extend(_hso_slice(sub, k, m, rr))
        slices = nxt
    return float(sum(m * (sub[0][d - 1] - rr[d - 1]) for m, sub in slices))


# -- dimension sweep -------------------------------------------------------------

def _hv2d(P: np.ndarray, r: np.ndarray) -> float:
    order = np.lexsort((P[:, 1], -P[:, 0]))  # x descending, then y ascending
    hv = 0.0
    best_y = r[1]
    for i in order:
        x, y = P[i, 0], P[i, 1]
        if y > best_y:
            hv += (x - r[0]) * (y - best_y)
            best_y = y
    return float(hv)


def _sweep(P: np.ndarray, r: np.ndarray) -> float:
    n, d = P.shape
    if d == 1:
        return float(P[:, 0].max() - r[0])
    if d == 2:
        return _hv2d(P, r)
    last = d - 1
    order = sorted(range(n), key=lambda i: (-P[i, last], i))
    lower: list[np.ndarray] = []
    lower_hv = 0.0
    hv = 0.0
    for pos, i in enumerate(order):
        proj = P[i, :last]
        # pruning: a point dominated in the remaining coordinates by an
        # already-swept point adds nothing to the lower-dimensional slice
        if not any(np.all(q >= proj) for q in lower):
            lower = [q for q in lower if not np.all(proj >= q)]
            lower.append(proj)
            lower_hv = _sweep(np.asarray(lower), r[:last])
        below = P[order[pos + 1], last] if pos + 1 < n else r[last]
        height = P[i, last] - below
        if height > 0:
            hv += lower_hv * height
    return float(hv)


def hv_sweep(front, r) -> float:
    """Hypervolume by recursive dimension sweep.

    Sweeps the highest objective in descending order. Each slab between
    consecutive levels contributes ``height * HV_{d-1}`` of the points
    already swept. Points dominated in the other ``d - 1`` objectives by an
    already-swept point skip the recursive call. The base case is the
    2-D sort-and-scan.

    Same contract and errors as :func:`hv_hso`.
    """
    P, r = _prepare(front, r)
    if len(P) == 0:
        return 0.0
    return _sweep(P, r)


hypervolume = hv_sweep


# -- oracles -------------------------------------------------------------------------

def hv_ie_oracle(front, r, max_points: int = 12) -> float:
    """Inclusion-exclusion over all non-empty subsets (test oracle, n <= 12)."""
    P = _front_array(front)
    r = check_vector(r, name="reference point")
    if P.size == 0:
        return 0.0
    P = check_points(P, r.size)
    n = len(P)
    if n > max_points:
        raise TooManyPoints(f"inclusion-exclusion limited to {max_points} points, got {n}")
    total = 0.0
    for size in range(1, n + 1):
        sign = 1.0 if size % 2 else -1.0
        for subset in itertools.combinations(range(n), size):
            corner = P[list(subset)].min(axis=0)
            total += sign * float(np.prod(np.clip(corner - r, 0.0, None)))
    return total


def hv_mc_oracle(front, r, samples: int, rng=None, return_stderr: bool = False,
                 chunk: int = 250_000):
    """Uniform-sampling estimate over the box ``[r, max(front)]`` (test oracle).

    Returns the estimate, or ``(estimate, binomial standard error)`` when
    ``return_stderr`` is set.
    """
    if samples < 1:
        raise EmptyInput("samples must be >= 1")
    rng = np.random.default_rng(rng)
    P = check_points(_front_array(front))
    r = check_vector(r, P.shape[1], "reference point")
    upper = P.max(axis=0)
    widths = np.clip(upper - r, 0.0, None)
    volume = float(np.prod(widths))
    if volume == 0.0:
        return (0.0, 0.0) if return_stderr else 0.0
    hits = 0
    done = 0
    while done < samples:
        m = min(chunk, samples - done)
        Z = r + rng.random((m, P.shape[1])) * widths
        dominated = np.zeros(m, dtype=bool)
        for p in P:
            inside = np.ones(m, dtype=bool)
            for j in range(P.shape[1]):
                inside &= Z[:, j] <= p[j]
            dominated |= inside
        hits += int(dominated.sum())
        done += m
    frac = hits / samples
    estimate = frac * volume
    if return_stderr:
        return estimate, volume * math.sqrt(frac * (1.0 - frac) / samples)
    return estimate


# -- improvement ---------------------------------------------------------------

def hvi(front, y, r) -> float:
    """Hypervolume gained by adding ``y`` to ``front``.

    ``y`` is clipped to ``r`` from below, so a coordinate at or below the
    reference contributes zero measure. Returns exactly 0 when ``y`` is
    weakly dominated by a front point.
    """
    P, r = _prepare(front, r)
    y = check_vector(y, r.size, "candidate")
    y = np.maximum(y, r)
    if np.any(y <= r):
        return 0.0
    if len(P) and np.any(np.all(P >= y, axis=1)):
        return 0.0
    if len(P) == 0:
        return float(np.prod(y - r))
    before = _sweep(P, r)
    after = _sweep(np.vstack([P, y]), r)
    return max(after - before, 0.0)


class ImprovementBoxes:
    """Disjoint box decomposition of the region above ``r`` not dominated by a front.

    The first ``d - 1`` objectives are cut on the grid of front coordinates.
    Within each grid cell the non-dominated part is one box whose last
    objective runs from the highest dominating level to ``+inf``. Then
    ``HVI(y) = sum_b vol([lower_b, min(upper_b, y)])`` exactly, for many ``y``
    at once. Front points not strictly above ``r`` contribute nothing.
    """

    def __init__(self, front, r):
        r = check_vector(r, name="reference point")
        P = _front_array(front)
        P = P.reshape(-1, r.size) if P.size else np.empty((0, r.size))
        P = P[np.all(P > r, axis=1)]
        d = r.size
        self.r = r
        if d == 1:
            top = P[:, 0].max() if len(P) else r[0]
            self.lower = np.array([[top]])
            self.upper = np.array([[np.inf]])
            return
        edges = []
        for j in range(d - 1):
            vals = np.unique(np.concatenate([[r[j]], P[:, j]]))
            edges.append(vals)
        lows, highs = [], []
        for cell in itertools.product(*[range(len(e)) for e in edges]):
            lo = np.array([edges[j][c] for j, c in enumerate(cell)])
            hi = np.array([edges[j][c + 1] if c + 1 < len(edges[j]) else np.inf
                           for j, c in enumerate(cell)])
            level = r[-1]
            if len(P) and np.all(np.isfinite(hi)):
                covering = np.all(P[:, :-1] >= hi, axis=1)
                if np.any(covering):
                    level = max(level, P[covering, -1].max())
            lows.append(np.append(lo, level))
            highs.append(np.append(hi, np.inf))
        self.lower = np.asarray(lows)
        self.upper = np.asarray(highs)

    def __len__(self) -> int:
        return len(self.lower)

    def improvement(self, Y, chunk: int = 4096) -> np.ndarray:
        """HVI for each row of ``Y`` (shape ``(m, d)``)."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        out = np.empty(len(Y))
        for start in range(0, len(Y), chunk):
            block = Y[start:start + chunk, None, :]
            ext = np.minimum(block, self.upper[None]) - self.lower[None]
            out[start:start + chunk] = np.prod(np.clip(ext, 0.0, None), axis=2).sum(axis=1)
        return out


# -- reference point ----------------------------------------------------------------

@dataclass(frozen=True)
class ReferencePointConfig:
    """Settings for :func:`infer_reference_point`.

    Attributes:
        floor: componentwise lower bound on the reference (``None``: unbounded).
        scale: fraction of the front's range to step below the nadir.
        eps: minimum range used when an objective has zero spread.
    """

    floor: Sequence[float] | None = None
    scale: float = 0.1
    eps: float = 1e-6

    def __post_init__(self):
        if not (self.scale >= 0 and math.isfinite(self.scale)):
            raise DataError(f"scale must be finite and >= 0, got {self.scale}")
        if not (self.eps > 0 and math.isfinite(self.eps)):
            raise DataError(f"eps must be finite and > 0, got {self.eps}")
        if self.floor is not None:
            object.__setattr__(self, "floor", tuple(float(v) for v in self.floor))
            if not all(math.isfinite(v) for v in self.floor):
                raise DataError("floor entries must be finite")


def infer_reference_point(front, config: ReferencePointConfig | None = None) -> np.ndarray:
    """``max(nadir - scale * max(ideal - nadir, eps), floor)`` per objective."""
    config = config or ReferencePointConfig()
    P = _front_array(front)
    if P.size == 0:
        raise EmptyFront("cannot infer a reference point from an empty front")
    P = check_points(P)
    nadir = P.min(axis=0)
    ideal = P.max(axis=0)
    ref = nadir - config.scale * np.maximum(ideal - nadir, config.eps)
    if config.floor is not None:
        floor = check_vector(config.floor, P.shape[1], "reference floor")
        ref = np.maximum(ref, floor)
    return ref
