"""Rate-region computation and set-sequence diagnostics.

A RateRegion is the down-closed convex hull of achievable rate pairs; region
families indexed by block length support Minkowski arithmetic, Hausdorff
distances, and sup-additivity / convergence checks.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np

from . import geometry, hot
from .channels import FeedbackFn, FsMac
from .dirinfo import pmf_grid
from .errors import SizingError, SpecError
from .probcore import Alphabet, CausalChannelLaw, CausalKernel, channel_causal_law

_LOG2 = np.log(2.0)


@dataclass(frozen=True)
class RatePoint:
    r1: float
    r2: float

    def __post_init__(self):
        if not (np.isfinite(self.r1) and np.isfinite(self.r2)):
            raise SpecError("rate points must be finite")

    @property
    def sum(self) -> float:
        return self.r1 + self.r2


@dataclass(frozen=True)
class Pentagon:
    """Bounds on R1, R2 and R1+R2 for one input-policy pair."""

    c1: float
    c2: float
    c12: float

    def __post_init__(self):
        for v in (self.c1, self.c2, self.c12):
            if v < 0:
                raise SpecError("pentagon bounds must be clamped at 0")

    def corner_points(self) -> list[tuple[float, float]]:
        r1max = min(self.c1, self.c12)
        r2max = min(self.c2, self.c12)
        pts = [(0.0, 0.0), (r1max, 0.0), (0.0, r2max),
               (r1max, max(min(self.c2, self.c12 - r1max), 0.0)),
               (max(min(self.c1, self.c12 - r2max), 0.0), r2max)]
        return pts

    def dominates(self, other: "Pentagon") -> bool:
        return self.c1 >= other.c1 and self.c2 >= other.c2 and self.c12 >= other.c12


class RateRegion:
    """Down-closed convex region stored by its hull vertices (CCW)."""

    def __init__(self, points, metadata: dict | None = None, down_close: bool = True):
        pts = np.asarray(
            [(p.r1, p.r2) if isinstance(p, RatePoint) else tuple(p) for p in points],
            dtype=float,
        ).reshape(-1, 2)
        if pts.size == 0:
            raise SpecError("a rate region needs at least one point")
        pts = np.clip(pts, 0.0, None)
        if down_close:
            extra = [pts, np.stack([pts[:, 0], np.zeros(len(pts))], axis=1),
                     np.stack([np.zeros(len(pts)), pts[:, 1]], axis=1),
                     np.zeros((1, 2))]
            pts = np.concatenate(extra, axis=0)
        self.vertices = geometry.convex_hull(pts)
        self.metadata = metadata or {}

    # -- set operations ----------------------------------------------------
    def contains(self, point, tol: float = 1e-12) -> bool:
        return geometry.contains_point(self.vertices, point, tol)

    def __add__(self, other: "RateRegion") -> "RateRegion":
        return RateRegion(geometry.minkowski_sum(self.vertices, other.vertices),
                          down_close=False)

    def scaled(self, c: float) -> "RateRegion":
        return RateRegion(geometry.scale(self.vertices, c), down_close=False)

    def max_sum_rate(self) -> float:
        return float(self.vertices.sum(axis=1).max())

    def max_r1(self) -> float:
        return float(self.vertices[:, 0].max())

    def max_r2(self) -> float:
        return float(self.vertices[:, 1].max())

    def __repr__(self):
        return f"RateRegion({len(self.vertices)} vertices, meta={self.metadata})"


def convex_hull_region(points, metadata=None) -> RateRegion:
    return RateRegion(points, metadata=metadata)


def minkowski_sum(a: RateRegion, b: RateRegion) -> RateRegion:
    return a + b


def scale_region(a: RateRegion, c: float) -> RateRegion:
    return a.scaled(c)


def hausdorff_distance(a: RateRegion, b: RateRegion) -> float:
    return geometry.hausdorff_distance(a.vertices, b.vertices)


# ---------------------------------------------------------------------------
# Pentagons from directed information
# ---------------------------------------------------------------------------
def _law_tensors(channel: FsMac, n: int, s0_mode: str) -> list[np.ndarray]:
    """Per-s0 (or single averaged/given) dense law tensors for the sweep."""
    S = channel.states.size
    if s0_mode == "worst":
        return [np.ascontiguousarray(channel_causal_law(channel, s0=s, n=n).tensor)
                for s in range(S)]
    if s0_mode == "stationary":
        return [np.ascontiguousarray(
            channel_causal_law(channel, n=n, average_over_stationary=True).tensor)]
    if s0_mode.startswith("given:"):
        s0 = int(s0_mode.split(":", 1)[1])
        return [np.ascontiguousarray(channel_causal_law(channel, s0=s0, n=n).tensor)]
    raise SpecError(f"unknown s0 mode {s0_mode!r}")


def _pair_bounds(q1y, q2y, laws, n, a1, a2, b) -> tuple[float, float, float]:
    """Componentwise min over the supplied law tensors of the three rates."""
    best = None
    for W in laws:
        triple = hot.pair_directed_infos(q1y, q2y, W, n, a1, a2, b)
        best = triple if best is None else tuple(min(x, y) for x, y in zip(best, triple))
    return best


def pentagon_inner(Q1: CausalKernel, Q2: CausalKernel, channel: FsMac, n: int,
                   f1=None, f2=None) -> Pentagon:
    """Achievable pentagon: worst initial state minus the log|S|/n penalty."""
    laws = _law_tensors(channel, n, "worst")
    q1y = np.ascontiguousarray(Q1.history_tensor_for_output(f1, channel.out))
    q2y = np.ascontiguousarray(Q2.history_tensor_for_output(f2, channel.out))
    i1, i2, i12 = _pair_bounds(q1y, q2y, laws, n,
                               channel.in1.size, channel.in2.size, channel.out.size)
    penalty = np.log2(channel.states.size) / n
    return Pentagon(max(i1 / n - penalty, 0.0), max(i2 / n - penalty, 0.0),
                    max(i12 / n - penalty, 0.0))


def pentagon_outer(Q1: CausalKernel, Q2: CausalKernel, channel: FsMac, n: int,
                   s0_mode: str = "worst", f1=None, f2=None) -> Pentagon:
    """Converse pentagon: the three directed-information bounds, no penalty."""
    laws = _law_tensors(channel, n, s0_mode)
    q1y = np.ascontiguousarray(Q1.history_tensor_for_output(f1, channel.out))
    q2y = np.ascontiguousarray(Q2.history_tensor_for_output(f2, channel.out))
    i1, i2, i12 = _pair_bounds(q1y, q2y, laws, n,
                               channel.in1.size, channel.in2.size, channel.out.size)
    return Pentagon(max(i1 / n, 0.0), max(i2 / n, 0.0), max(i12 / n, 0.0))


# ---------------------------------------------------------------------------
# Unions over policy grids
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class PolicyGrid:
    """Grid of input policies swept in region unions.

    kind 'iid': one pmf per user, repeated at every step (feedback-blind);
    kind 'causal': every feedback-history row ranges over the pmf grid.
    """

    kind: str = "iid"
    resolution: int = 16
    max_pairs: int = 2_000_000

    def policies(self, user: int, n: int, input_alphabet: Alphabet,
                 feedback_alphabet: Alphabet) -> Iterable[CausalKernel]:
        grid = pmf_grid(input_alphabet.size, self.resolution)
        if self.kind == "iid":
            for pmf in grid:
                yield CausalKernel.iid(user, n, pmf, feedback_alphabet)
        elif self.kind == "causal":
            rows_per_step = [feedback_alphabet.size**i for i in range(n)]
            for combo in product(range(len(grid)), repeat=sum(rows_per_step)):
                rows = []
                k = 0
                for cnt in rows_per_step:
                    rows.append(grid[list(combo[k:k + cnt])])
                    k += cnt
                yield CausalKernel(user, n, input_alphabet, feedback_alphabet, rows)
        else:
            raise SpecError(f"unknown policy grid kind {self.kind!r}")

    def count(self, n: int, input_size: int, feedback_size: int) -> int:
        g = len(pmf_grid(input_size, self.resolution))
        if self.kind == "iid":
            return g
        return g ** sum(feedback_size**i for i in range(n))


def region_union(channel: FsMac, n: int, grid: PolicyGrid,
                 feedback: tuple[FeedbackFn, FeedbackFn] | None = None,
                 variant: str = "inner", s0_mode: str = "worst") -> RateRegion:
    """Convex hull of pentagon corners over a policy grid (an inner
    approximation of the union; the grid is recorded in the metadata)."""
    if variant not in ("inner", "outer"):
        raise SpecError("variant must be 'inner' or 'outer'")
    if feedback is None:
        f1 = FeedbackFn.null(1, channel.out)
        f2 = FeedbackFn.null(2, channel.out)
    else:
        f1, f2 = feedback
    z1 = Alphabet(f1.range_size)
    z2 = Alphabet(f2.range_size)
    n1 = grid.count(n, channel.in1.size, z1.size)
    n2 = grid.count(n, channel.in2.size, z2.size)
    if n1 * n2 > grid.max_pairs:
        raise SizingError(f"policy grid would evaluate {n1 * n2} pairs, "
                          f"budget {grid.max_pairs}")

    laws = _law_tensors(channel, n, "worst" if variant == "inner" else s0_mode)
    a1, a2, b = channel.in1.size, channel.in2.size, channel.out.size
    penalty = np.log2(channel.states.size) / n if variant == "inner" else 0.0

    pol1 = [np.ascontiguousarray(Q.history_tensor_for_output(f1, channel.out))
            for Q in grid.policies(1, n, channel.in1, z1)]
    pol2 = [np.ascontiguousarray(Q.history_tensor_for_output(f2, channel.out))
            for Q in grid.policies(2, n, channel.in2, z2)]
    points: list[tuple[float, float]] = [(0.0, 0.0)]
    for q1y in pol1:
        for q2y in pol2:
            i1, i2, i12 = _pair_bounds(q1y, q2y, laws, n, a1, a2, b)
            pent = Pentagon(max(i1 / n - penalty, 0.0), max(i2 / n - penalty, 0.0),
                            max(i12 / n - penalty, 0.0))
            points.extend(pent.corner_points())
    meta = {"n": n, "variant": variant, "s0_mode": s0_mode,
            "grid": {"kind": grid.kind, "resolution": grid.resolution},
            "feedback": "null" if feedback is None else "declared",
            "pairs": n1 * n2}
    return RateRegion(points, metadata=meta)


# ---------------------------------------------------------------------------
# Sequence diagnostics
# ---------------------------------------------------------------------------
@dataclass
class SupadditivityReport:
    pairs: list[tuple[int, int]]
    violations: list[float]  # max distance of nR_n + lR_l outside (n+l)R_{n+l}
    slack: float

    @property
    def ok(self) -> bool:
        return all(v <= self.slack for v in self.violations)


def supadditivity_check(regions: dict[int, RateRegion],
                        pairs: Sequence[tuple[int, int]],
                        slack: float = 0.0) -> SupadditivityReport:
    """Check (n+l) R_{n+l} contains n R_n + l R_l, up to the declared slack."""
    violations = []
    for n, l in pairs:
        if n not in regions or l not in regions or (n + l) not in regions:
            raise SpecError(f"missing region for pair ({n}, {l})")
        lhs = regions[n + l].scaled(n + l)
        rhs = regions[n].scaled(n) + regions[l].scaled(l)
        worst = max(geometry.point_to_hull_distance(v, lhs.vertices)
                    for v in rhs.vertices)
        violations.append(worst)
    return SupadditivityReport(list(pairs), violations, slack)


@dataclass
class LimitEstimate:
    region: RateRegion
    gaps: list[float]  # Hausdorff distances between consecutive regions


def limit_region_estimate(regions: Sequence[RateRegion]) -> LimitEstimate:
    if len(regions) < 2:
        raise SpecError("need at least two regions to estimate a limit")
    pts = np.concatenate([r.vertices for r in regions], axis=0)
    limit = RateRegion(pts, metadata={"kind": "closure-of-union"})
    gaps = [hausdorff_distance(regions[i], regions[i + 1])
            for i in range(len(regions) - 1)]
    return LimitEstimate(limit, gaps)


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------
def save_region(region: RateRegion, path: str) -> None:
    """Write hull vertices as CSV (CCW from the origin) plus a JSON sidecar."""
    verts = region.vertices
    # rotate so the vertex closest to the origin comes first
    start = int(np.argmin((verts**2).sum(axis=1)))
    verts = np.roll(verts, -start, axis=0)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["R1", "R2"])
        for r1, r2 in verts:
            writer.writerow([f"{r1:.12g}", f"{r2:.12g}"])
    with open(str(path) + ".json", "w") as fh:
        json.dump(region.metadata, fh, indent=1)
