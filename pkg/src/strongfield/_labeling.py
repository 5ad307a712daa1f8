"""Face-adjacent connected components of equal-rank cells.

``label_equal_rank`` returns labels ``0, 1, ...`` numbered by the row-major
position of each component's first cell. Excluded cells carry rank ``-1``
and label ``-1``.

The numba path is a two-pass union-find over the flattened grid. The numpy
path labels each rank level with :func:`scipy.ndimage.label` and renumbers
by first occurrence; it doubles as an independent check of the kernel.
"""

import numpy as np
from scipy import ndimage

from ._accel import USE_NUMBA, njit


@njit
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit
def _union_find_labels(flat_rank, shape, strides):
    size = flat_rank.shape[0]
    ndim = shape.shape[0]
    parent = np.arange(size)
    idx = np.zeros(ndim, dtype=np.int64)
    for cell in range(size):
        rem = cell
        for d in range(ndim):
            idx[d] = rem // strides[d]
            rem -= idx[d] * strides[d]
        r = flat_rank[cell]
        if r < 0:
            continue
        for d in range(ndim):
            if idx[d] == 0:
                continue
            nb = cell - strides[d]
            if flat_rank[nb] != r:
                continue
            ra = _find(parent, cell)
            rb = _find(parent, nb)
            if ra != rb:
                # keep the earlier cell as root so roots mark discovery order
                if ra < rb:
                    parent[rb] = ra
                else:
                    parent[ra] = rb
    labels = np.full(size, -1, dtype=np.int64)
    root_label = np.full(size, -1, dtype=np.int64)
    nxt = 0
    for cell in range(size):
        if flat_rank[cell] < 0:
            continue
        root = _find(parent, cell)
        if root_label[root] < 0:
            root_label[root] = nxt
            nxt += 1
        labels[cell] = root_label[root]
    return labels


def _labels_numba(ranks):
    ranks = np.ascontiguousarray(ranks, dtype=np.int64)
    shape = np.array(ranks.shape, dtype=np.int64)
    strides = np.array([s // ranks.itemsize for s in ranks.strides], dtype=np.int64)
    return _union_find_labels(ranks.ravel(), shape, strides).reshape(ranks.shape)


def _labels_numpy(ranks):
    ranks = np.asarray(ranks)
    raw = np.full(ranks.shape, -1, dtype=np.int64)
    structure = ndimage.generate_binary_structure(ranks.ndim, 1)
    offset = 0
    for value in np.unique(ranks):
        if value < 0:
            continue
        lab, count = ndimage.label(ranks == value, structure=structure)
        raw[lab > 0] = lab[lab > 0] - 1 + offset
        offset += count
    flat = raw.ravel()
    valid = flat >= 0
    _, first = np.unique(flat[valid], return_index=True)
    order = np.argsort(first)
    remap = np.empty(len(order), dtype=np.int64)
    remap[order] = np.arange(len(order))
    out = np.full(flat.shape, -1, dtype=np.int64)
    out[valid] = remap[flat[valid]]
    return out.reshape(ranks.shape)


def label_equal_rank(ranks, use_numba=None) -> np.ndarray:
    if use_numba is None:
        use_numba = USE_NUMBA
    return _labels_numba(ranks) if use_numba else _labels_numpy(ranks)
