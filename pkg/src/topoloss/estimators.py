"""Scikit-learn style wrappers around the core operations.

These make the diagram computation and the descent harness usable inside
sklearn pipelines and grid searches (``get_params``/``set_params``/`clone`
come from ``BaseEstimator``). Both are thin: all logic lives in the
functional core.
"""

from __future__ import annotations

from typing import List, Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .descent import DescentConfig, DescentTrace, optimize_likelihood
from .persistence import compute_persistence, diagram_records
from .raster import binarize, pad_border
from .validation import check_image, check_mask


class CubicalDiagram(BaseEstimator, TransformerMixin):
    """Stateless transformer: grayscale images to persistence diagram records.

    ``transform`` maps a sequence of 2D arrays (or a single 3D stack) to a
    list of record lists, one per image, in the diagram CSV schema.
    """

    def __init__(self, pad: bool = True, pad_value: float = 1.0):
        self.pad = pad
        self.pad_value = pad_value

    def fit(self, X, y=None):
        return self

    def transform(self, X) -> List[List[dict]]:
        out = []
        for img in _iter_images(X):
            arr = check_image(img)
            if self.pad:
                arr = pad_border(arr, self.pad_value)
            out.append(diagram_records(compute_persistence(arr)))
        return out


class LikelihoodDescent(BaseEstimator):
    """Estimator facade over the pixel-space descent harness.

    ``fit(X, y)`` optimizes the likelihood ``X`` toward the mask ``y``;
    the trace lands in ``trace_``, the final image in ``image_``, and
    ``predict()`` returns the binarized result.
    """

    def __init__(
        self,
        steps: int = 300,
        learning_rate: float = 0.5,
        lam: float = 0.01,
        mode: str = "spatial",
        clamp_eps: float = 1e-3,
        record_every: int = 10,
        seed: int = 0,
        threshold: float = 0.5,
    ):
        self.steps = steps
        self.learning_rate = learning_rate
        self.lam = lam
        self.mode = mode
        self.clamp_eps = clamp_eps
        self.record_every = record_every
        self.seed = seed
        self.threshold = threshold

    def fit(self, X, y):
        cfg = DescentConfig(
            steps=self.steps,
            learning_rate=self.learning_rate,
            lam=self.lam,
            mode=self.mode,
            clamp_eps=self.clamp_eps,
            record_every=self.record_every,
            seed=self.seed,
            threshold=self.threshold,
        )
        self.trace_: DescentTrace = optimize_likelihood(check_image(X), check_mask(y), cfg)
        self.image_: np.ndarray = self.trace_.final_image
        return self

    def predict(self, X=None) -> np.ndarray:
        if not hasattr(self, "image_"):
            raise ValueError("LikelihoodDescent is not fitted yet; call fit first")
        return binarize(self.image_, self.threshold)


def _iter_images(X) -> Sequence[np.ndarray]:
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return list(X)
    if isinstance(X, np.ndarray) and X.ndim == 2:
        return [X]
    return list(X)
