"""Gradient descent on the likelihood pixels themselves.

A desk-scale check that the topology term steers the binarized iterate
toward the target's component and loop counts: the likelihood image is the
optimization variable, the objective is pixel loss plus a weighted topology
loss, and diagrams are recomputed from scratch every step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from .loss import bce_loss_and_grad, frozen_terms, gradient_from_terms
from .metrics import betti_error
from .raster import binarize
from .validation import check_image, check_mask, check_same_shape

MODES = ("vanilla", "spatial", "none")
KINDS = ("two-blobs", "ring", "broken-line")


@dataclass(frozen=True)
class DescentConfig:
    steps: int = 300
    learning_rate: float = 0.5
    lam: float = 0.01
    mode: str = "spatial"
    clamp_eps: float = 1e-3
    record_every: int = 10
    seed: int = 0
    init_noise: float = 0.0  # optional jitter on the start image, drawn from seed
    pad: bool = True
    pad_value: float = 1.0
    threshold: float = 0.5

    def validate(self) -> None:
        if self.steps < 0 or self.record_every < 1:
            raise ValueError("steps must be >= 0 and record_every >= 1")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be > 0: {self.learning_rate}")
        if self.lam < 0:
            raise ValueError(f"lambda must be >= 0: {self.lam}")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")
        if not 0.0 < self.clamp_eps < 0.5:
            raise ValueError(f"clamp_eps must lie in (0, 0.5): {self.clamp_eps}")


@dataclass(frozen=True)
class TracePoint:
    step: int
    total: float
    pixel: float
    topo: float
    b0_err: int
    b1_err: int


@dataclass
class DescentTrace:
    points: List[TracePoint] = field(default_factory=list)
    final_image: Optional[np.ndarray] = None

    def first_step_with_zero_b0(self) -> Optional[int]:
        for p in self.points:
            if p.b0_err == 0:
                return p.step
        return None

    def settled_step_zero_b0(self) -> Optional[int]:
        """First recorded step from which the component error stays zero."""
        settled = None
        for p in self.points:
            if p.b0_err == 0:
                if settled is None:
                    settled = p.step
            else:
                settled = None
        return settled


def optimize_likelihood(
    L0: np.ndarray, T: np.ndarray, cfg: DescentConfig, on_record=None
) -> DescentTrace:
    """Run plain gradient descent on the pixels of ``L0`` toward ``T``.

    Every iterate is clamped into [clamp_eps, 1-clamp_eps]. With lam = 0 or
    mode "none" the topology gradient is never evaluated, so the trajectory
    is bitwise identical to pure pixel-loss descent. ``on_record(step, img)``
    is invoked at every recorded step when given.
    """
    cfg.validate()
    img = check_image(L0, "initial likelihood")
    mask = check_mask(T, "target")
    check_same_shape(img, mask, "initial likelihood and target")

    lo, hi = cfg.clamp_eps, 1.0 - cfg.clamp_eps
    cur = np.clip(img, lo, hi)
    if cfg.init_noise > 0.0:
        rng = np.random.default_rng(cfg.seed)
        cur = np.clip(cur + rng.uniform(-cfg.init_noise, cfg.init_noise, cur.shape), lo, hi)

    use_topo = cfg.mode != "none" and cfg.lam > 0.0
    trace = DescentTrace()

    for step in range(cfg.steps + 1):
        pixel, pixel_grad = bce_loss_and_grad(cur, mask)
        if use_topo:
            terms, _, dl, _ = frozen_terms(cur, mask, mode=cfg.mode, pad=cfg.pad, pad_value=cfg.pad_value)
            topo = math.fsum(t.contribution for t in terms)
            grad = pixel_grad + cfg.lam * gradient_from_terms(terms, dl.shape, cfg.pad)
        else:
            topo = 0.0
            grad = pixel_grad
        if step % cfg.record_every == 0 or step == cfg.steps:
            b0e, b1e = betti_error(binarize(cur, cfg.threshold), mask)
            trace.points.append(
                TracePoint(step, pixel + cfg.lam * topo, pixel, topo, b0e, b1e)
            )
            if on_record is not None:
                on_record(step, cur)
        if step == cfg.steps:
            break
        cur = np.clip(cur - cfg.learning_rate * grad, lo, hi)

    trace.final_image = cur
    return trace


def make_synthetic_instance(
    kind: str,
    shape: Tuple[int, int] = (32, 32),
    noise: float = 0.0,
    seed: int = 0,
    blur_sigma: float = 1.0,
) -> Tuple[np.ndarray, np.ndarray]:
    """Deterministic target mask of a named topology plus a corrupted start.

    The likelihood is the target blurred, rescaled to peak 1, with uniform
    noise in [-noise, noise] added and the result clamped to [0, 1]. With
    zero blur and zero noise it equals the target exactly.

    The two-blobs corruption additionally plants a decoy lump of the same
    footprint at a wrong location, with amplitude scaled by the noise level:
    a spurious component whose persistence rivals the real blobs', so the
    matching has a genuinely ambiguous elimination decision to get right.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}")
    rows, cols = shape
    if rows < 16 or cols < 16:
        raise ValueError(f"shape must be at least 16x16: {shape}")
    if not 0.0 <= noise < 0.5:
        raise ValueError(f"noise must lie in [0, 0.5): {noise}")

    mask = np.zeros(shape, dtype=bool)
    extra = np.zeros(shape, dtype=np.float64)
    if kind == "two-blobs":
        side = max(3, min(rows, cols) // 8)
        r0 = rows // 2 - side // 2
        c1 = max(1, cols // 6)
        c2 = cols - c1 - side
        mask[r0 : r0 + side, c1 : c1 + side] = True
        mask[r0 : r0 + side, c2 : c2 + side] = True
        d0 = max(1, rows // 6)
        dc = (cols - side) // 2
        extra[d0 : d0 + side, dc : dc + side] = min(1.0, 5.0 * noise)
    elif kind == "ring":
        rr, cc = np.mgrid[0:rows, 0:cols]
        dist = np.hypot(rr - (rows - 1) / 2.0, cc - (cols - 1) / 2.0)
        mask = (dist <= min(rows, cols) * 0.34) & (dist >= min(rows, cols) * 0.17)
    else:  # broken-line
        thick = max(1, rows // 16)
        r0 = rows // 2 - thick // 2
        gap = max(2, cols // 10)
        g0 = cols // 2 - gap // 2
        mask[r0 : r0 + thick, 2 : cols - 2] = True
        mask[r0 : r0 + thick, g0 : g0 + gap] = False

    img = np.clip(mask.astype(np.float64) + extra, 0.0, 1.0)
    if blur_sigma > 0.0:
        img = ndimage.gaussian_filter(img, sigma=blur_sigma)
        peak = img.max()
        if peak > 0.0:
            img = img / peak
    if noise > 0.0:
        rng = np.random.default_rng(seed)
        img = img + rng.uniform(-noise, noise, size=shape)
    return np.clip(img, 0.0, 1.0), mask


def trace_to_csv(trace: DescentTrace) -> str:
    lines = ["step,total,pixel,topo,b0err,b1err"]
    for p in trace.points:
        lines.append(f"{p.step},{p.total!r},{p.pixel!r},{p.topo!r},{p.b0_err},{p.b1_err}")
    return "\n".join(lines) + "\n"
