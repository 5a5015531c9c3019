"""Optimal matching of two persistence diagrams, per dimension.

Real-to-real match costs are squared diagram distances, optionally
multiplied by a spatial weight: the squared normalized distance between the
creators' reference pixels, floored at 0.05 so location never fully
dominates. Points may also go to the diagonal at half their squared
persistence. The assignment is solved exactly on the standard augmented
bipartite problem (each side gets diagonal slots for the other).

The reported ``total_cost`` sums costs of the left diagram's assignments
only; ``assignment_cost`` additionally counts diagonal costs of unmatched
right-diagram points and is the quantity the optimizer minimizes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment

from .persistence import Diagram, PersistencePair

SPATIAL_FLOOR = 0.05
LOCATORS = ("determining", "max-face")


def diagram_distance_sq(p: PersistencePair, t: PersistencePair) -> float:
    """Squared birth/death distance between two same-dimension features."""
    if p.dim != t.dim:
        raise ValueError(f"dimension mismatch: {p.dim} vs {t.dim}")
    return (p.birth - t.birth) ** 2 + (p.death - t.death) ** 2


def diagonal_gap_sq(p: PersistencePair) -> float:
    """Squared distance to the diagonal target at the birth/death midpoint."""
    mid = 0.5 * (p.birth + p.death)
    return (p.birth - mid) ** 2 + (p.death - mid) ** 2


def creator_locator(
    p: PersistencePair, shape: Tuple[int, int], locator: str = "determining"
) -> Tuple[float, float]:
    """Creator reference pixel in coordinates normalized by image shape."""
    if locator not in LOCATORS:
        raise ValueError(f"unknown creator locator {locator!r}")
    pixel = p.creator_pixel if locator == "determining" else p.creator_max_pixel
    return (pixel[0] / shape[0], pixel[1] / shape[1])


def spatial_weight(
    p: PersistencePair,
    t: PersistencePair,
    shape: Tuple[int, int],
    locator: str = "determining",
) -> float:
    """Floored squared normalized distance between the two creators."""
    pr, pc = creator_locator(p, shape, locator)
    tr, tc = creator_locator(t, shape, locator)
    return max(SPATIAL_FLOOR, (pr - tr) ** 2 + (pc - tc) ** 2)


def cost_matrix(
    l_pairs: List[PersistencePair],
    t_pairs: List[PersistencePair],
    mode: str,
    shape: Tuple[int, int],
    locator: str = "determining",
) -> np.ndarray:
    """Real-to-real block of the matching costs (n_left x n_right)."""
    if not l_pairs or not t_pairs:
        return np.zeros((len(l_pairs), len(t_pairs)), dtype=np.float64)

    def columns(pairs):
        b = np.array([p.birth for p in pairs])
        d = np.array([p.death for p in pairs])
        loc = np.array([creator_locator(p, shape, locator) for p in pairs])
        return b, d, loc

    lb, ld, lloc = columns(l_pairs)
    tb, td, tloc = columns(t_pairs)
    dsq = (lb[:, None] - tb[None, :]) ** 2 + (ld[:, None] - td[None, :]) ** 2
    if mode != "spatial":
        return dsq
    w = (lloc[:, None, 0] - tloc[None, :, 0]) ** 2 + (lloc[:, None, 1] - tloc[None, :, 1]) ** 2
    return np.maximum(SPATIAL_FLOOR, w) * dsq


@dataclass(frozen=True)
class Match:
    """Assignment of one left-diagram feature; ``target`` None means diagonal."""

    l_index: int
    target: Optional[int]
    weight: float
    cost: float


@dataclass(frozen=True)
class DimMatching:
    dim: int
    matches: Tuple[Match, ...]
    unmatched_t: Tuple[int, ...]
    total_cost: float
    assignment_cost: float


@dataclass(frozen=True)
class MatchingResult:
    mode: str
    dims: Tuple[DimMatching, ...]
    total_cost: float
    assignment_cost: float

    def dim(self, d: int) -> DimMatching:
        for m in self.dims:
            if m.dim == d:
                return m
        raise KeyError(d)


def match_diagrams(
    dl: Diagram,
    dt: Diagram,
    mode: str = "spatial",
    locator: str = "determining",
) -> MatchingResult:
    """Minimum-cost assignment between two diagrams, per dimension.

    Both diagrams must come from images of the same shape (the locator
    normalization uses it). Cost ties are resolved toward lower
    (left index, right index) pairs.
    """
    if mode not in ("vanilla", "spatial"):
        raise ValueError(f"unknown matching mode {mode!r}")
    if dl.shape != dt.shape:
        raise ValueError(f"shape mismatch: diagrams over {dl.shape} and {dt.shape}")
    dims = tuple(
        _match_dim(dl.pairs_of_dim(d), dt.pairs_of_dim(d), d, mode, dl.shape, locator)
        for d in (0, 1)
    )
    return MatchingResult(
        mode=mode,
        dims=dims,
        total_cost=math.fsum(m.total_cost for m in dims),
        assignment_cost=math.fsum(m.assignment_cost for m in dims),
    )


def _match_dim(
    l_pairs: List[PersistencePair],
    t_pairs: List[PersistencePair],
    dim: int,
    mode: str,
    shape: Tuple[int, int],
    locator: str,
) -> DimMatching:
    nl, nt = len(l_pairs), len(t_pairs)
    l_diag = [diagonal_gap_sq(p) for p in l_pairs]
    t_diag = [diagonal_gap_sq(t) for t in t_pairs]

    if nl == 0 and nt == 0:
        return DimMatching(dim, (), (), 0.0, 0.0)

    real = cost_matrix(l_pairs, t_pairs, mode, shape, locator)
    size = nl + nt
    aug = np.full((size, size), np.inf)
    aug[:nl, :nt] = real
    for i in range(nl):
        aug[i, nt + i] = l_diag[i]
    for j in range(nt):
        aug[nl + j, j] = t_diag[j]
    aug[nl:, nt:] = 0.0

    rows, cols = linear_sum_assignment(aug)
    assigned = dict(zip(rows.tolist(), cols.tolist()))
    targets: List[Optional[int]] = [
        assigned[i] if assigned[i] < nt else None for i in range(nl)
    ]
    _normalize_ties(targets, real, l_diag)

    matches = []
    for i, tgt in enumerate(targets):
        if tgt is None:
            matches.append(Match(i, None, 1.0, l_diag[i]))
        else:
            w = spatial_weight(l_pairs[i], t_pairs[tgt], shape, locator) if mode == "spatial" else 1.0
            matches.append(Match(i, tgt, w, float(real[i, tgt])))
    matched_t = {m.target for m in matches if m.target is not None}
    unmatched_t = tuple(j for j in range(nt) if j not in matched_t)
    total = math.fsum(m.cost for m in matches)
    assignment = math.fsum([m.cost for m in matches] + [t_diag[j] for j in unmatched_t])
    return DimMatching(dim, tuple(matches), unmatched_t, total, assignment)


def _normalize_ties(
    targets: List[Optional[int]], real: np.ndarray, l_diag: List[float]
) -> None:
    """Reorder real targets toward lower (left, right) index pairs.

    Among cost-equal optima the canonical matching gives the lowest-index
    real-matched left feature the lowest-index right feature. The sorted
    reassignment is adopted only when its exact cost equals the current one,
    so the optimum is never degraded.
    """
    holders = [i for i, t in enumerate(targets) if t is not None]
    if len(holders) < 2:
        return
    current = [targets[i] for i in holders]
    candidate = sorted(current)
    if candidate == current:
        return
    cur_cost = math.fsum(float(real[i, targets[i]]) for i in holders)
    cand_cost = math.fsum(float(real[i, t]) for i, t in zip(holders, candidate))
    if cand_cost == cur_cost:
        for i, t in zip(holders, candidate):
            targets[i] = t


def matching_records(result: MatchingResult) -> dict:
    """JSON-ready representation of a matching (schema 1)."""
    dims = {}
    for dm in result.dims:
        dims[str(dm.dim)] = {
            "matches": [
                {
                    "l_index": m.l_index,
                    "target": "diagonal" if m.target is None else m.target,
                    "s": m.weight,
                    "cost": m.cost,
                }
                for m in dm.matches
            ],
            "unmatched_t": list(dm.unmatched_t),
            "total_cost": dm.total_cost,
            "assignment_cost": dm.assignment_cost,
        }
    return {
        "schema": 1,
        "mode": result.mode,
        "dims": dims,
        "total_cost": result.total_cost,
        "assignment_cost": result.assignment_cost,
    }
