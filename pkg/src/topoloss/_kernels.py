"""Union-find sweeps behind the persistence computation.

Edges are indexed horizontal-first: edge e < H = rows*(cols-1) joins pixels
(r, c)-(r, c+1) with r = e // (cols-1); otherwise e - H = r*cols + c joins
(r, c)-(r+1, c). Squares are indexed q = r*(cols-1) + c over the
(rows-1) x (cols-1) block grid; index n_squares stands for the unbounded
outside region in the dual sweep.

Both sweeps are O(alpha) per union after the caller's sort, which keeps the
whole computation sort-bound.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True, nogil=True)
def component_sweep(pix, edge_order, edge_values, edge_u, edge_v):
    """Merge pixels along edges in descending-value order.

    Components are founded by their max-valued pixel (ties to the smallest
    row-major index). Each merge kills the component with the smaller birth
    value (ties: larger founder index dies) and records
    (birth, death, founder pixel, merging edge). Returns the retained
    finite records plus the essential founder pixel.
    """
    n = pix.shape[0]
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    founder = np.arange(n, dtype=np.int64)

    births = np.empty(n, dtype=np.float64)
    deaths = np.empty(n, dtype=np.float64)
    creators = np.empty(n, dtype=np.int64)
    destroyers = np.empty(n, dtype=np.int64)
    count = 0

    for k in range(edge_order.shape[0]):
        e = edge_order[k]
        ra = _find(parent, edge_u[e])
        rb = _find(parent, edge_v[e])
        if ra == rb:
            continue
        fa, fb = founder[ra], founder[rb]
        # elder: larger birth value, ties to the smaller founder index
        if pix[fa] > pix[fb] or (pix[fa] == pix[fb] and fa < fb):
            elder_f, young_f = fa, fb
        else:
            elder_f, young_f = fb, fa
        death = edge_values[e]
        if pix[young_f] > death:
            births[count] = pix[young_f]
            deaths[count] = death
            creators[count] = young_f
            destroyers[count] = e
            count += 1
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
        founder[ra] = elder_f

    essential = founder[_find(parent, 0)]
    return births[:count], deaths[:count], creators[:count], destroyers[:count], essential


@njit(cache=True, nogil=True)
def loop_sweep(square_values, edge_order, edge_values, edge_q1, edge_q2):
    """Dual sweep producing loop (dim-1) records.

    Squares plus the outside region (index n_squares, value -1) are merged
    along edges in ascending-value order; each merge of two distinct regions
    means the edge closed a loop that the younger region's founding square
    later fills. Records (birth=edge value, death=founder square value,
    edge, square).
    """
    nq = square_values.shape[0]
    n = nq + 1
    parent = np.arange(n, dtype=np.int64)
    size = np.ones(n, dtype=np.int64)
    founder = np.arange(n, dtype=np.int64)

    births = np.empty(nq + 1, dtype=np.float64)
    deaths = np.empty(nq + 1, dtype=np.float64)
    creators = np.empty(nq + 1, dtype=np.int64)
    destroyers = np.empty(nq + 1, dtype=np.int64)
    count = 0

    for k in range(edge_order.shape[0]):
        e = edge_order[k]
        ra = _find(parent, edge_q1[e])
        rb = _find(parent, edge_q2[e])
        if ra == rb:
            continue
        fa, fb = founder[ra], founder[rb]
        va = -1.0 if fa == nq else square_values[fa]
        vb = -1.0 if fb == nq else square_values[fb]
        # elder entered the complement earlier: smaller value, ties to the
        # larger square index (reverse of the forward cell order)
        if va < vb or (va == vb and fa > fb):
            elder_f, young_f, young_v = fa, fb, vb
        else:
            elder_f, young_f, young_v = fb, fa, va
        birth = edge_values[e]
        if birth > young_v:
            births[count] = birth
            deaths[count] = young_v
            creators[count] = e
            destroyers[count] = young_f
            count += 1
        if size[ra] < size[rb]:
            ra, rb = rb, ra
        parent[rb] = ra
        size[ra] += size[rb]
        founder[ra] = elder_f

    return births[:count], deaths[:count], creators[:count], destroyers[:count]
