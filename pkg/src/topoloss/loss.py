"""Topology loss, its surrogate gradient, and the pixel loss.

The topology term sums, over matched features of the likelihood diagram,
the spatially weighted squared residuals of birth and death against the
matched target (a ground-truth feature, or the diagonal midpoint for
unmatched features). The loss is not differentiable through the homology
computation itself, so the gradient acts only on the critical pixels whose
values realize each birth and death; everything else about the matching is
held fixed.

Both inputs are padded with a 1-pixel ring of ones before diagram
computation by default, so loops cut by the patch border are represented;
gradient mass landing on the synthetic ring is discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from .matching import MatchingResult, match_diagrams
from .persistence import Diagram, compute_persistence, diagram_of_mask
from .raster import pad_border
from .validation import check_image, check_mask, check_same_shape

BCE_EPS = 1e-7


@dataclass(frozen=True)
class PairTerm:
    """One matched feature with everything its loss term depends on.

    Pixel coordinates live in the frame the diagrams were computed on
    (padded when padding is enabled). Target values are constants: for
    diagonal matches they are the birth/death midpoint of the feature
    itself, fixed at match time.
    """

    dim: int
    l_index: int
    target: Optional[int]
    weight: float
    birth: float
    death: float
    target_birth: float
    target_death: float
    creator_pixel: Tuple[int, int]
    destroyer_pixel: Optional[Tuple[int, int]]
    essential: bool

    @property
    def contribution(self) -> float:
        return self.weight * (
            (self.birth - self.target_birth) ** 2 + (self.death - self.target_death) ** 2
        )


@dataclass(frozen=True)
class LossReport:
    topo_by_dim: Dict[int, float]
    topo_loss: float
    pixel_loss: float
    lam: float
    total: float
    terms: Tuple[PairTerm, ...]
    unmatched_t: Dict[int, Tuple[int, ...]]
    mode: str
    pad: bool


def _prepare(L, T, pad: bool, pad_value: float):
    img = check_image(L, "likelihood")
    mask = check_mask(T, "target")
    check_same_shape(img, mask, "likelihood and target")
    compute_img = pad_border(img, pad_value) if pad else img
    return img, mask, compute_img


def frozen_terms(
    L: np.ndarray,
    T: np.ndarray,
    mode: str = "spatial",
    pad: bool = True,
    pad_value: float = 1.0,
    locator: str = "determining",
) -> Tuple[Tuple[PairTerm, ...], MatchingResult, Diagram, Diagram]:
    """Match the diagrams and freeze every per-pair loss term."""
    img, mask, compute_img = _prepare(L, T, pad, pad_value)
    dl = compute_persistence(compute_img)
    dt = diagram_of_mask(mask, pad=pad, pad_value=pad_value)
    result = match_diagrams(dl, dt, mode=mode, locator=locator)

    terms: List[PairTerm] = []
    for dm in result.dims:
        l_pairs = dl.pairs_of_dim(dm.dim)
        t_pairs = dt.pairs_of_dim(dm.dim)
        for m in dm.matches:
            p = l_pairs[m.l_index]
            if m.target is None:
                mid = 0.5 * (p.birth + p.death)
                tb, td = mid, mid
            else:
                t = t_pairs[m.target]
                tb, td = t.birth, t.death
            terms.append(
                PairTerm(
                    dim=dm.dim,
                    l_index=m.l_index,
                    target=m.target,
                    weight=m.weight,
                    birth=p.birth,
                    death=p.death,
                    target_birth=tb,
                    target_death=td,
                    creator_pixel=p.creator_pixel,
                    destroyer_pixel=p.destroyer_pixel,
                    essential=p.essential,
                )
            )
    return tuple(terms), result, dl, dt


def frozen_topo_value(terms, image) -> float:
    """Topology loss of frozen terms re-evaluated at possibly changed pixels.

    ``image`` must be in the frame the terms were computed on (padded
    frame when padding was enabled).
    """
    vals = []
    for t in terms:
        b = float(image[t.creator_pixel])
        d = float(image[t.destroyer_pixel]) if t.destroyer_pixel is not None else t.death
        vals.append(t.weight * ((b - t.target_birth) ** 2 + (d - t.target_death) ** 2))
    return math.fsum(vals)


def loss_report(
    L: np.ndarray,
    T: np.ndarray,
    lam: float = 0.01,
    mode: str = "spatial",
    pad: bool = True,
    pad_value: float = 1.0,
    locator: str = "determining",
) -> LossReport:
    """Full loss breakdown: pixel loss + lam * topology loss."""
    if lam < 0:
        raise ValueError(f"lambda must be >= 0: {lam}")
    terms, result, _, _ = frozen_terms(L, T, mode, pad, pad_value, locator)
    topo_by_dim = {
        d: math.fsum(t.contribution for t in terms if t.dim == d) for d in (0, 1)
    }
    topo = math.fsum(topo_by_dim.values())
    pixel, _ = bce_loss_and_grad(L, T)
    return LossReport(
        topo_by_dim=topo_by_dim,
        topo_loss=topo,
        pixel_loss=pixel,
        lam=lam,
        total=pixel + lam * topo,
        terms=terms,
        unmatched_t={dm.dim: dm.unmatched_t for dm in result.dims},
        mode=mode,
        pad=pad,
    )


def gradient_from_terms(
    terms: Tuple[PairTerm, ...], compute_shape: Tuple[int, int], pad: bool
) -> np.ndarray:
    """Assemble the critical-pixel gradient from frozen terms.

    ``compute_shape`` is the frame the terms were computed on; the returned
    array is unpadded (ring contributions dropped when padding is on).
    """
    grad = np.zeros(compute_shape, dtype=np.float64)
    for t in terms:
        grad[t.creator_pixel] += 2.0 * t.weight * (t.birth - t.target_birth)
        if t.destroyer_pixel is not None:
            grad[t.destroyer_pixel] += 2.0 * t.weight * (t.death - t.target_death)
    if pad:
        grad = grad[1:-1, 1:-1]
    return grad


def topo_gradient(
    L: np.ndarray,
    T: np.ndarray,
    mode: str = "spatial",
    pad: bool = True,
    pad_value: float = 1.0,
    locator: str = "determining",
) -> np.ndarray:
    """Surrogate gradient of the topology loss with respect to each pixel.

    Nonzero only at critical pixels: 2*w*(birth residual) at each creator,
    2*w*(death residual) at each destroyer; contributions at shared pixels
    accumulate. Ring contributions are dropped when padding is on.
    """
    img = check_image(L, "likelihood")
    terms, _, dl, _ = frozen_terms(L, T, mode, pad, pad_value, locator)
    grad = gradient_from_terms(terms, dl.shape, pad)
    assert grad.shape == img.shape
    return grad


def bce_loss_and_grad(L: np.ndarray, T: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean binary cross-entropy and its per-pixel gradient.

    Likelihood values are clamped into [eps, 1-eps] before the logs.
    """
    img = check_image(L, "likelihood")
    mask = check_mask(T, "target")
    check_same_shape(img, mask, "likelihood and target")
    lc = np.clip(img, BCE_EPS, 1.0 - BCE_EPS)
    t = mask.astype(np.float64)
    loss = float(np.mean(-(t * np.log(lc) + (1.0 - t) * np.log1p(-lc))))
    grad = (lc - t) / (lc * (1.0 - lc)) / img.size
    return loss, grad


def loss_records(report: LossReport) -> dict:
    """JSON-ready loss report (schema 1)."""
    return {
        "schema": 1,
        "mode": report.mode,
        "pad": report.pad,
        "lambda": report.lam,
        "pixel_loss": report.pixel_loss,
        "topo_loss": {
            "dim0": report.topo_by_dim[0],
            "dim1": report.topo_by_dim[1],
            "total": report.topo_loss,
        },
        "total": report.total,
        "pairs": [
            {
                "dim": t.dim,
                "l_index": t.l_index,
                "target": "diagonal" if t.target is None else t.target,
                "s": t.weight,
                "contribution": t.contribution,
            }
            for t in report.terms
        ],
        "unmatched_t": {str(d): list(v) for d, v in report.unmatched_t.items()},
    }
