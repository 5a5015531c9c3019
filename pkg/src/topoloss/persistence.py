"""Persistence pairs of the super-level filtration with critical-cell tracking.

Connected components (dim 0) are paired by a union-find over edges in
descending value order; loops (dim 1) come from the dual sweep over squares
and the outside region in the reverse order. Both sweeps honor one total
cell order (value descending, dimension ascending, grid position ascending),
so output is deterministic. Pairs born and dying at the same value are
dropped.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import ndimage

from . import _kernels
from .cubical import Cell, FilteredComplex, build_complex
from .validation import check_image, check_mask

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=np.int64)


@dataclass(frozen=True)
class PersistencePair:
    """One persistent feature with its critical cells.

    Births and deaths are filtration values with birth >= death; essential
    features carry the sentinel death 0.0 and no destroyer. Pixel fields
    hold (row, col) coordinates in the image the complex was built on.
    """

    dim: int
    birth: float
    death: float
    creator_cell: Cell
    creator_pixel: Cell
    creator_max_pixel: Cell
    destroyer_cell: Optional[Cell] = None
    destroyer_pixel: Optional[Cell] = None
    essential: bool = False

    @property
    def persistence(self) -> float:
        return self.birth - self.death

    @property
    def plot_point(self) -> Tuple[float, float]:
        return (1.0 - self.birth, 1.0 - self.death)


@dataclass(frozen=True)
class Diagram:
    """Persistence pairs of one image, grouped by dimension on demand."""

    rows: int
    cols: int
    pairs: Tuple[PersistencePair, ...]

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.rows, self.cols)

    def pairs_of_dim(self, dim: int) -> List[PersistencePair]:
        return [p for p in self.pairs if p.dim == dim]


def _edge_tables(arr: np.ndarray):
    """Endpoint ids, values and grid coordinates for every 1-cell."""
    rows, cols = arr.shape
    flat = arr.ravel()
    pid = np.arange(rows * cols, dtype=np.int64).reshape(rows, cols)

    hu = pid[:, :-1].ravel()
    hv = pid[:, 1:].ravel()
    vu = pid[:-1, :].ravel()
    vv = pid[1:, :].ravel()
    edge_u = np.concatenate([hu, vu])
    edge_v = np.concatenate([hv, vv])
    edge_values = np.minimum(flat[edge_u], flat[edge_v])

    hr, hc = np.divmod(np.arange(hu.shape[0], dtype=np.int64), max(cols - 1, 1))
    vr, vc = np.divmod(np.arange(vu.shape[0], dtype=np.int64), cols)
    egr = np.concatenate([2 * hr, 2 * vr + 1])
    egc = np.concatenate([2 * hc + 1, 2 * vc])
    return edge_u, edge_v, edge_values, egr, egc


def _dual_endpoints(rows: int, cols: int, n_h: int, n_edges: int):
    """Square ids (or the outside index) on both sides of every 1-cell."""
    nq = (rows - 1) * (cols - 1)
    outer = nq
    q1 = np.empty(n_edges, dtype=np.int64)
    q2 = np.empty(n_edges, dtype=np.int64)

    he = np.arange(n_h, dtype=np.int64)
    hr, hc = np.divmod(he, max(cols - 1, 1))
    q1[:n_h] = np.where(hr >= 1, (hr - 1) * (cols - 1) + hc, outer)
    q2[:n_h] = np.where(hr <= rows - 2, hr * (cols - 1) + hc, outer)

    ve = np.arange(n_edges - n_h, dtype=np.int64)
    vr, vc = np.divmod(ve, cols)
    q1[n_h:] = np.where(vc >= 1, vr * (cols - 1) + (vc - 1), outer)
    q2[n_h:] = np.where(vc <= cols - 2, vr * (cols - 1) + vc, outer)
    if nq == 0:
        q1[:] = outer
        q2[:] = outer
    return q1, q2


def _edge_cell(e: int, rows: int, cols: int) -> Cell:
    n_h = rows * (cols - 1)
    if e < n_h:
        r, c = divmod(e, cols - 1)
        return (2 * r, 2 * c + 1)
    r, c = divmod(e - n_h, cols)
    return (2 * r + 1, 2 * c)


def compute_persistence(complex_: FilteredComplex | np.ndarray) -> Diagram:
    """Exact dim-0/dim-1 persistence pairs of an image's filtered complex.

    Accepts a prebuilt :class:`FilteredComplex` or a grayscale array. The
    single essential component gets death 0.0. Every finite pair carries its
    creator and destroyer cells with their value-determining pixels.
    """
    if isinstance(complex_, np.ndarray):
        complex_ = build_complex(complex_)
    arr = complex_.source
    rows, cols = arr.shape
    pairs: List[PersistencePair] = []

    edge_u, edge_v, edge_values, egr, egc = _edge_tables(arr)
    n_h = rows * (cols - 1)

    if edge_values.shape[0] > 0:
        fwd = np.lexsort((egc, egr, -edge_values))
        b0, d0, cre0, des0, essential = _kernels.component_sweep(
            arr.ravel(), fwd, edge_values, edge_u, edge_v
        )
        for i in range(b0.shape[0]):
            cr, cc = divmod(int(cre0[i]), cols)
            dcell = _edge_cell(int(des0[i]), rows, cols)
            pairs.append(
                PersistencePair(
                    dim=0,
                    birth=float(b0[i]),
                    death=float(d0[i]),
                    creator_cell=(2 * cr, 2 * cc),
                    creator_pixel=(cr, cc),
                    creator_max_pixel=(cr, cc),
                    destroyer_cell=dcell,
                    destroyer_pixel=complex_.determining_pixel(dcell),
                )
            )
        er, ec = divmod(int(essential), cols)
    else:
        er, ec = 0, 0
    if arr[er, ec] > 0.0:  # a component born at the floor has zero persistence
        pairs.append(
            PersistencePair(
                dim=0,
                birth=float(arr[er, ec]),
                death=0.0,
                creator_cell=(2 * er, 2 * ec),
                creator_pixel=(er, ec),
                creator_max_pixel=(er, ec),
                essential=True,
            )
        )

    if rows > 1 and cols > 1:
        sq = np.minimum(
            np.minimum(arr[:-1, :-1], arr[:-1, 1:]),
            np.minimum(arr[1:, :-1], arr[1:, 1:]),
        ).ravel()
        q1, q2 = _dual_endpoints(rows, cols, n_h, edge_values.shape[0])
        rev = np.lexsort((-egc, -egr, edge_values))
        b1, d1, cre1, des1 = _kernels.loop_sweep(sq, rev, edge_values, q1, q2)
        for i in range(b1.shape[0]):
            ccell = _edge_cell(int(cre1[i]), rows, cols)
            qr, qc = divmod(int(des1[i]), cols - 1)
            dcell = (2 * qr + 1, 2 * qc + 1)
            pairs.append(
                PersistencePair(
                    dim=1,
                    birth=float(b1[i]),
                    death=float(d1[i]),
                    creator_cell=ccell,
                    creator_pixel=complex_.determining_pixel(ccell),
                    creator_max_pixel=complex_.max_face_pixel(ccell),
                    destroyer_cell=dcell,
                    destroyer_pixel=complex_.determining_pixel(dcell),
                )
            )

    pairs.sort(key=lambda p: (p.dim, -p.birth, -p.death, p.creator_cell))
    return Diagram(rows=rows, cols=cols, pairs=tuple(pairs))


def betti_numbers(mask: np.ndarray) -> Tuple[int, int]:
    """(components, independent loops) of a mask's foreground, 4-adjacency.

    The loop count comes from the Euler characteristic of the mask's cell
    complex: vertices - edges + squares counted over foreground pixels.
    """
    m = check_mask(mask)
    if not m.any():
        return (0, 0)
    _, b0 = ndimage.label(m, structure=FOUR_CONNECTED)
    v = int(m.sum())
    e = int((m[:, :-1] & m[:, 1:]).sum() + (m[:-1, :] & m[1:, :]).sum())
    f = int((m[:-1, :-1] & m[:-1, 1:] & m[1:, :-1] & m[1:, 1:]).sum())
    chi = v - e + f
    return (int(b0), int(b0) - chi)


def diagram_of_mask(mask: np.ndarray, pad: bool = True, pad_value: float = 1.0) -> Diagram:
    """Diagram of a binary mask; every retained pair sits at birth 1, death 0."""
    from .raster import pad_border

    m = check_mask(mask)
    img = m.astype(np.float64)
    if pad:
        img = pad_border(img, pad_value)
    return compute_persistence(img)


def diagram_records(diagram: Diagram) -> List[dict]:
    """Rows of the diagram CSV schema as dictionaries."""
    out = []
    for p in diagram.pairs:
        out.append(
            {
                "dim": p.dim,
                "birth": p.birth,
                "death": p.death,
                "creator_row": p.creator_pixel[0],
                "creator_col": p.creator_pixel[1],
                "destroyer_row": None if p.destroyer_pixel is None else p.destroyer_pixel[0],
                "destroyer_col": None if p.destroyer_pixel is None else p.destroyer_pixel[1],
                "plot_x": 1.0 - p.birth,
                "plot_y": 1.0 - p.death,
            }
        )
    return out


def diagram_to_csv(diagram: Diagram) -> str:
    """Serialize a diagram in the CSV export schema (destroyer blank if essential)."""
    lines = ["dim,birth,death,creator_row,creator_col,destroyer_row,destroyer_col,plot_x,plot_y"]
    for rec in diagram_records(diagram):
        fields = [
            str(rec["dim"]),
            repr(rec["birth"]),
            repr(rec["death"]),
            str(rec["creator_row"]),
            str(rec["creator_col"]),
            "" if rec["destroyer_row"] is None else str(rec["destroyer_row"]),
            "" if rec["destroyer_col"] is None else str(rec["destroyer_col"]),
            repr(rec["plot_x"]),
            repr(rec["plot_y"]),
        ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"
