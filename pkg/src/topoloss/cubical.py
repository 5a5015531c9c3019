"""Cubical complex of a 2D image with super-level filtration values.

Pixels are vertices (0-cells); edges join 4-adjacent pixels and unit squares
fill each 2x2 pixel block. Cells live on a (2*rows-1) x (2*cols-1) grid:
0-cells at even/even coordinates (pixel (gr//2, gc//2)), 1-cells at mixed
parity, 2-cells at odd/odd. The image is thresholded from high to low, so a
cell enters the complex at the minimum of its corner pixel values.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .validation import check_image

Cell = Tuple[int, int]


def cell_dim(cell: Cell) -> int:
    return (cell[0] % 2) + (cell[1] % 2)


@dataclass(frozen=True)
class FilteredComplex:
    """Cell grid of an image with one filtration value per cell."""

    rows: int
    cols: int
    cell_values: np.ndarray  # (2*rows-1, 2*cols-1) float64
    source: np.ndarray  # the pixel grid the complex was built from

    @property
    def grid_shape(self) -> Tuple[int, int]:
        return self.cell_values.shape

    def value(self, cell: Cell) -> float:
        self._check(cell)
        return float(self.cell_values[cell])

    def faces(self, cell: Cell) -> List[Cell]:
        """(n-1)-cells on the boundary of ``cell``."""
        self._check(cell)
        gr, gc = cell
        dim = cell_dim(cell)
        if dim == 0:
            return []
        if dim == 1:
            if gr % 2:  # vertical edge
                return [(gr - 1, gc), (gr + 1, gc)]
            return [(gr, gc - 1), (gr, gc + 1)]
        return [(gr - 1, gc), (gr + 1, gc), (gr, gc - 1), (gr, gc + 1)]

    def cofaces(self, cell: Cell) -> List[Cell]:
        """(n+1)-cells having ``cell`` on their boundary; clipped at the grid."""
        self._check(cell)
        gr, gc = cell
        dim = cell_dim(cell)
        if dim == 2:
            return []
        if dim == 1:
            if gr % 2:  # vertical edge: squares left/right
                cands = [(gr, gc - 1), (gr, gc + 1)]
            else:
                cands = [(gr - 1, gc), (gr + 1, gc)]
        else:
            cands = [(gr - 1, gc), (gr + 1, gc), (gr, gc - 1), (gr, gc + 1)]
        h, w = self.grid_shape
        return [(r, c) for r, c in cands if 0 <= r < h and 0 <= c < w]

    def vertex_pixels(self, cell: Cell) -> List[Cell]:
        """Pixels of the 0-faces spanning ``cell`` (itself for a 0-cell)."""
        self._check(cell)
        gr, gc = cell
        rlo, rhi = gr // 2, (gr + 1) // 2
        clo, chi = gc // 2, (gc + 1) // 2
        return [(r, c) for r in range(rlo, rhi + 1) for c in range(clo, chi + 1)]

    def determining_pixel(self, cell: Cell) -> Cell:
        """Pixel whose value equals the cell's filtration value.

        Under the high-to-low filtration a cell enters with its minimum
        corner, so this is the min-valued 0-face; ties resolve to the
        lexicographically smallest (row, col).
        """
        pixels = self.vertex_pixels(cell)
        return min(pixels, key=lambda p: (self.source[p], p))

    def max_face_pixel(self, cell: Cell) -> Cell:
        """0-face with the largest pixel value; ties to smallest (row, col)."""
        pixels = self.vertex_pixels(cell)
        return min(pixels, key=lambda p: (-self.source[p], p))

    def _check(self, cell: Cell) -> None:
        gr, gc = cell
        h, w = self.grid_shape
        if not (0 <= gr < h and 0 <= gc < w):
            raise ValueError(f"cell {cell} outside grid {h}x{w}")


def build_complex(img: np.ndarray) -> FilteredComplex:
    """Build the filtered cubical complex of a grayscale image.

    Each edge takes the minimum of its two endpoint pixels and each square
    the minimum of its four corners, so value(coface) <= value(face) holds
    for every incidence.
    """
    arr = check_image(img)
    rows, cols = arr.shape
    grid = np.empty((2 * rows - 1, 2 * cols - 1), dtype=np.float64)
    grid[0::2, 0::2] = arr
    if cols > 1:
        grid[0::2, 1::2] = np.minimum(arr[:, :-1], arr[:, 1:])
    if rows > 1:
        grid[1::2, 0::2] = np.minimum(arr[:-1, :], arr[1:, :])
    if rows > 1 and cols > 1:
        grid[1::2, 1::2] = np.minimum(
            np.minimum(arr[:-1, :-1], arr[:-1, 1:]),
            np.minimum(arr[1:, :-1], arr[1:, 1:]),
        )
    return FilteredComplex(rows=rows, cols=cols, cell_values=grid, source=arr)


def cell_sort_key(complex_: FilteredComplex, cell: Cell) -> tuple:
    """Total order of cell entry: value descending, then dimension, then grid position."""
    return (-complex_.cell_values[cell], cell_dim(cell), cell[0], cell[1])
