"""Discrete Ampere force between the current fields of two frames.

For a source element (a, b) at p_k and a target element (c, d) at p_j, with
r = p_j - p_k and s = a*r_y - b*r_x (the z component of source x r), the
pair term is A * (d*s, -c*s) / |r|^3. Coincident positions contribute
nothing.

Every per-target sum runs sequentially over the sources in canonical (y, x)
order, whatever the worker count or the cutoff strategy, so results are
bitwise reproducible. The vectorised kernels rely on ``np.cumsum`` being a
strictly left-to-right accumulation. Excluded pairs are added as +0.0, which
is the same as skipping them because an accumulator seeded with +0.0 can
never become -0.0.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, NamedTuple, Optional, Tuple

import numpy as np

from .edges import CurrentElement, CurrentField
from .raster_io import RegionMask

WORKERS_ENV = "EMFLOW_WORKERS"
_BLOCK = 128


@dataclass(frozen=True)
class ForceParams:
    A: float = 1.0
    cutoff: float = math.inf

    def __post_init__(self):
        if not (self.A > 0 and math.isfinite(self.A)):
            raise ValueError(f"constant A must be a positive finite number, got {self.A}")
        if not self.cutoff > 0:
            raise ValueError(f"cutoff must be positive or infinite, got {self.cutoff}")


class ForceSample(NamedTuple):
    x: int
    y: int
    fx: float
    fy: float
    magnitude: float


class ForceField:
    """Per-target forces aligned index for index with the target elements."""

    def __init__(self, xs, ys, fx, fy, width: int, height: int,
                 params: Optional[ForceParams] = None, included_pairs: Optional[int] = None):
        self.xs = np.asarray(xs, dtype=np.int64).ravel()
        self.ys = np.asarray(ys, dtype=np.int64).ravel()
        self.fx = np.asarray(fx, dtype=np.float64).ravel()
        self.fy = np.asarray(fy, dtype=np.float64).ravel()
        if not (len(self.xs) == len(self.ys) == len(self.fx) == len(self.fy)):
            raise ValueError("force field arrays differ in length")
        self.width = int(width)
        self.height = int(height)
        self.params = params
        self.included_pairs = included_pairs

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.fx, self.fy)

    def __len__(self):
        return len(self.xs)

    @property
    def samples(self) -> List[ForceSample]:
        mag = self.magnitude
        return [ForceSample(int(self.xs[i]), int(self.ys[i]), float(self.fx[i]),
                            float(self.fy[i]), float(mag[i])) for i in range(len(self))]

    def identical(self, other: "ForceField") -> bool:
        """Bitwise equality of positions and forces."""
        return (self.width == other.width and self.height == other.height
                and all(a.tobytes() == b.tobytes() for a, b in (
                    (self.xs, other.xs), (self.ys, other.ys),
                    (self.fx, other.fx), (self.fy, other.fy))))

    def __repr__(self):
        return f"ForceField({len(self)} samples, {self.width}x{self.height})"


@dataclass(frozen=True)
class InductionMap:
    """Out-of-plane induction Bz at a set of query positions."""

    positions: Tuple[Tuple[int, int], ...]
    values: np.ndarray
    params: ForceParams

    def lookup(self) -> Dict[Tuple[int, int], float]:
        return {p: float(v) for p, v in zip(self.positions, self.values)}

    def __getitem__(self, position) -> float:
        try:
            i = self.positions.index(tuple(position))
        except ValueError:
            raise KeyError(f"no induction value at {tuple(position)}") from None
        return float(self.values[i])


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        if n < 1:
            raise ValueError(f"{WORKERS_ENV} must be at least 1, got {n}")
        return n
    return min(4, os.cpu_count() or 1)


# ---------------------------------------------------------------------------
# reference (scalar) path


def pair_force(target: CurrentElement, source: CurrentElement, A: float = 1.0) -> Tuple[float, float]:
    if not A > 0:
        raise ValueError("A must be positive")
    tx, ty, c, d = target
    sx, sy, a, b = source
    rx = float(tx - sx)
    ry = float(ty - sy)
    r = math.sqrt(rx * rx + ry * ry)
    if r == 0.0:
        return (0.0, 0.0)
    s = a * ry - b * rx
    r3 = r * r * r
    return (A * (d * s / r3), A * (-c * s / r3))


def element_force(target: CurrentElement, sources: CurrentField,
                  params: ForceParams = ForceParams()) -> ForceSample:
    """Brute-force force on one target: a plain loop over the sources."""
    tx, ty, c, d = target
    cutoff = params.cutoff
    acc_x = 0.0
    acc_y = 0.0
    for sx, sy, a, b in sources:
        rx = float(tx - sx)
        ry = float(ty - sy)
        r = math.sqrt(rx * rx + ry * ry)
        if r == 0.0 or r > cutoff:
            continue
        s = a * ry - b * rx
        r3 = r * r * r
        acc_x += d * s / r3
        acc_y += -c * s / r3
    fx = params.A * acc_x
    fy = params.A * acc_y
    return ForceSample(int(tx), int(ty), fx, fy, math.hypot(fx, fy))


# ---------------------------------------------------------------------------
# vectorised path


def _seq_sum(terms: np.ndarray) -> np.ndarray:
    """Row sums accumulated strictly left to right from +0.0."""
    rows = terms.shape[0]
    if terms.shape[1] == 0:
        return np.zeros(rows)
    padded = np.empty((rows, terms.shape[1] + 1))
    padded[:, 0] = 0.0
    padded[:, 1:] = terms
    return np.cumsum(padded, axis=1)[:, -1]


def _block_terms(tx, ty, sx, sy, sa, sb, cutoff):
    rx = (tx[:, None] - sx[None, :]).astype(np.float64)
    ry = (ty[:, None] - sy[None, :]).astype(np.float64)
    r = np.sqrt(rx * rx + ry * ry)
    include = r > 0.0
    if math.isfinite(cutoff):
        include &= r <= cutoff
    s = sa[None, :] * ry - sb[None, :] * rx
    r3 = r * r * r
    r3[~include] = 1.0
    return s, r3, include


def _force_block(tx, ty, tc, td, sx, sy, sa, sb, cutoff):
    s, r3, include = _block_terms(tx, ty, sx, sy, sa, sb, cutoff)
    fx_terms = np.where(include, (td[:, None] * s) / r3, 0.0)
    fy_terms = np.where(include, ((-tc)[:, None] * s) / r3, 0.0)
    return _seq_sum(fx_terms), _seq_sum(fy_terms), int(include.sum())


def _induction_block(tx, ty, sx, sy, sa, sb, cutoff):
    s, r3, include = _block_terms(tx, ty, sx, sy, sa, sb, cutoff)
    return _seq_sum(np.where(include, s / r3, 0.0)), int(include.sum())


def _plan(tx, ty, sx, sy, cutoff) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Split work into (target indices, source indices) blocks.

    With a finite cutoff, sources are bucketed on a grid of cell size >=
    cutoff so only the 3x3 neighbouring cells are candidates. Source indices
    are always ascending, i.e. canonical order.
    """
    n_t = len(tx)
    all_sources = np.arange(len(sx))
    if not math.isfinite(cutoff) or len(sx) == 0:
        return [(np.arange(i, min(i + _BLOCK, n_t)), all_sources)
                for i in range(0, n_t, _BLOCK)]
    cell = max(1.0, float(cutoff))
    scx = np.floor(sx / cell).astype(np.int64)
    scy = np.floor(sy / cell).astype(np.int64)
    tcx = np.floor(tx / cell).astype(np.int64)
    tcy = np.floor(ty / cell).astype(np.int64)
    buckets: Dict[Tuple[int, int], List[int]] = {}
    for i, key in enumerate(zip(tcx.tolist(), tcy.tolist())):
        buckets.setdefault(key, []).append(i)
    plan = []
    for (cx, cy), idx in sorted(buckets.items(), key=lambda kv: kv[1][0]):
        near = (np.abs(scx - cx) <= 1) & (np.abs(scy - cy) <= 1)
        cand = np.nonzero(near)[0]
        idx = np.asarray(idx)
        for i in range(0, len(idx), _BLOCK):
            plan.append((idx[i:i + _BLOCK], cand))
    return plan


def _run(plan, fn, workers):
    if workers is None:
        workers = default_workers()
    if workers <= 1 or len(plan) <= 1:
        return [fn(item) for item in plan]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, plan))


def restrict_targets(targets: CurrentField, roi: Optional[RegionMask]) -> CurrentField:
    if roi is None:
        return targets
    roi.check_frame(targets.width, targets.height)
    return targets.subset(roi.contains(targets.xs, targets.ys))


def force_field(targets: CurrentField, sources: CurrentField,
                params: ForceParams = ForceParams(), roi: Optional[RegionMask] = None,
                workers: Optional[int] = None) -> ForceField:
    """Force on every target element (inside ``roi``) from all sources.

    The ROI only filters targets; every source contributes.
    """
    targets = restrict_targets(targets, roi)
    tx, ty, tc, td = targets.xs, targets.ys, targets.vx, targets.vy
    sx, sy, sa, sb = sources.xs, sources.ys, sources.vx, sources.vy
    plan = _plan(tx, ty, sx, sy, params.cutoff)

    def work(item):
        ti, si = item
        return _force_block(tx[ti], ty[ti], tc[ti], td[ti],
                            sx[si], sy[si], sa[si], sb[si], params.cutoff)

    fx = np.zeros(len(tx))
    fy = np.zeros(len(tx))
    pairs = 0
    for (ti, _), (bx, by, n) in zip(plan, _run(plan, work, workers)):
        fx[ti] = bx
        fy[ti] = by
        pairs += n
    return ForceField(tx, ty, params.A * fx, params.A * fy, targets.width, targets.height,
                      params=params, included_pairs=pairs)


def total_force(targets: CurrentField, sources: CurrentField,
                params: ForceParams = ForceParams(), workers: Optional[int] = None) -> Tuple[float, float]:
    return field_total(force_field(targets, sources, params, workers=workers))


def field_total(field: ForceField) -> Tuple[float, float]:
    """Component sums of a force field in canonical sample order."""
    if len(field) == 0:
        return (0.0, 0.0)
    both = np.stack([field.fx, field.fy])
    fx, fy = _seq_sum(both)
    return (float(fx), float(fy))


def induction_map(sources: CurrentField, positions, A: float = 1.0,
                  cutoff: float = math.inf, workers: Optional[int] = None) -> InductionMap:
    """Bz = A * sum_k s_k / r_k^3 at each query position."""
    params = ForceParams(A, cutoff)
    pos = [(int(x), int(y)) for x, y in positions]
    px = np.array([p[0] for p in pos], dtype=np.int64)
    py = np.array([p[1] for p in pos], dtype=np.int64)
    sx, sy, sa, sb = sources.xs, sources.ys, sources.vx, sources.vy
    plan = _plan(px, py, sx, sy, cutoff)

    def work(item):
        ti, si = item
        return _induction_block(px[ti], py[ti], sx[si], sy[si], sa[si], sb[si], cutoff)

    bz = np.zeros(len(pos))
    for (ti, _), (vals, _n) in zip(plan, _run(plan, work, workers)):
        bz[ti] = vals
    return InductionMap(tuple(pos), A * bz, params)


def force_via_induction(targets: CurrentField, induction: InductionMap) -> ForceField:
    """Lorentz form: force = element x (0, 0, Bz) = (d*Bz, -c*Bz)."""
    table = induction.lookup()
    bz = np.empty(len(targets))
    for i, (x, y) in enumerate(zip(targets.xs.tolist(), targets.ys.tolist())):
        try:
            bz[i] = table[(x, y)]
        except KeyError:
            raise KeyError(f"induction map has no value at target ({x}, {y})") from None
    return ForceField(targets.xs, targets.ys, targets.vy * bz, -targets.vx * bz,
                      targets.width, targets.height, params=induction.params)
