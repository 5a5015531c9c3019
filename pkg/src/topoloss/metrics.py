"""Evaluation metrics: Betti errors, accuracy, Dice, and centerline Dice.

Centerline Dice uses Zhang-Suen thinning (8-connectivity). One guard is
added to the textbook parallel scheme: a sub-iteration that would delete
every remaining pixel is not applied, so a nonempty mask always keeps a
nonempty skeleton contained in itself (a 2x2 block would otherwise vanish
entirely). Scores are therefore comparable only between runs of this
implementation.

Metrics are computed per patch, without padding, and averaged over batches.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, List, Tuple

import numpy as np

from .persistence import betti_numbers
from .validation import check_mask, check_same_shape


@dataclass(frozen=True)
class MetricReport:
    accuracy: float
    dice: float
    cldice: float
    betti0_err: float
    betti1_err: float
    n_patches: int


def betti_error(P: np.ndarray, T: np.ndarray) -> Tuple[int, int]:
    """Absolute component and loop count differences."""
    p = check_mask(P, "prediction")
    t = check_mask(T, "target")
    check_same_shape(p, t, "prediction and target")
    pb0, pb1 = betti_numbers(p)
    tb0, tb1 = betti_numbers(t)
    return (abs(pb0 - tb0), abs(pb1 - tb1))


def dice_and_accuracy(P: np.ndarray, T: np.ndarray) -> Tuple[float, float]:
    """(Dice overlap, pixel accuracy); Dice of two empty masks is 1."""
    p = check_mask(P, "prediction")
    t = check_mask(T, "target")
    check_same_shape(p, t, "prediction and target")
    inter = int((p & t).sum())
    total = int(p.sum()) + int(t.sum())
    dice = 1.0 if total == 0 else 2.0 * inter / total
    accuracy = float((p == t).mean())
    return (dice, accuracy)


def _neighbors(padded: np.ndarray):
    # clockwise from north: p2..p9
    return (
        padded[:-2, 1:-1],
        padded[:-2, 2:],
        padded[1:-1, 2:],
        padded[2:, 2:],
        padded[2:, 1:-1],
        padded[2:, :-2],
        padded[1:-1, :-2],
        padded[:-2, :-2],
    )


def thin(mask: np.ndarray) -> np.ndarray:
    """Zhang-Suen skeleton of a mask (two parallel sub-iterations per pass)."""
    img = check_mask(mask).astype(np.uint8)
    if not img.any():
        return img.astype(bool)
    while True:
        deleted_any = False
        for step in (0, 1):
            padded = np.pad(img, 1)
            nb = _neighbors(padded)
            b = sum(n.astype(np.int32) for n in nb)
            seq = nb + (nb[0],)
            a = sum(
                ((seq[k] == 0) & (seq[k + 1] == 1)).astype(np.int32) for k in range(8)
            )
            p2, _, p4, _, p6, _, p8, _ = nb
            if step == 0:
                cond = (p2 * p4 * p6 == 0) & (p4 * p6 * p8 == 0)
            else:
                cond = (p2 * p4 * p8 == 0) & (p2 * p6 * p8 == 0)
            remove = (img == 1) & (b >= 2) & (b <= 6) & (a == 1) & cond
            if not remove.any():
                continue
            if remove.sum() == img.sum():
                return img.astype(bool)
            img = img & ~remove
            deleted_any = True
        if not deleted_any:
            return img.astype(bool)


def cl_dice(P: np.ndarray, T: np.ndarray) -> float:
    """Centerline Dice: harmonic mean of skeleton precision and sensitivity.

    1 when both masks are empty, 0 when exactly one is empty or a
    denominator vanishes.
    """
    p = check_mask(P, "prediction")
    t = check_mask(T, "target")
    check_same_shape(p, t, "prediction and target")
    p_any, t_any = bool(p.any()), bool(t.any())
    if not p_any and not t_any:
        return 1.0
    if p_any != t_any:
        return 0.0
    sp = thin(p)
    st = thin(t)
    if sp.sum() == 0 or st.sum() == 0:
        return 0.0
    tprec = float((sp & t).sum()) / float(sp.sum())
    tsens = float((st & p).sum()) / float(st.sum())
    if tprec + tsens == 0.0:
        return 0.0
    return 2.0 * tprec * tsens / (tprec + tsens)


def evaluate_batch(pairs: Iterable[Tuple[np.ndarray, np.ndarray]]) -> MetricReport:
    """Arithmetic mean of all metrics over (prediction, target) pairs."""
    rows: List[Tuple[float, float, float, float, float]] = []
    for P, T in pairs:
        dice, acc = dice_and_accuracy(P, T)
        b0e, b1e = betti_error(P, T)
        rows.append((acc, dice, cl_dice(P, T), float(b0e), float(b1e)))
    if not rows:
        raise ValueError("evaluate_batch: empty input list")
    n = len(rows)
    acc, dice, cld, b0, b1 = (math.fsum(col) / n for col in zip(*rows))
    return MetricReport(
        accuracy=acc, dice=dice, cldice=cld, betti0_err=b0, betti1_err=b1, n_patches=n
    )


def metric_records(report: MetricReport) -> dict:
    return {
        "schema": 1,
        "accuracy": report.accuracy,
        "dice": report.dice,
        "cldice": report.cldice,
        "betti0_err": report.betti0_err,
        "betti1_err": report.betti1_err,
        "n_patches": report.n_patches,
    }


def metric_table(report: MetricReport) -> str:
    """Aligned plain-text rendering of a metric report."""
    rows = [
        ("accuracy", f"{report.accuracy:.4f}"),
        ("dice", f"{report.dice:.4f}"),
        ("cldice", f"{report.cldice:.4f}"),
        ("betti0_err", f"{report.betti0_err:.4f}"),
        ("betti1_err", f"{report.betti1_err:.4f}"),
        ("n_patches", str(report.n_patches)),
    ]
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows) + "\n"
