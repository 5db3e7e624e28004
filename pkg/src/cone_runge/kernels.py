"""Hot numeric kernels: connected-component labeling and batched algebra.

Each kernel has a pure-numpy implementation and, when numba is importable,
an ``@njit`` twin. Set ``CONE_RUNGE_NO_NUMBA=1`` to force the numpy path
(``benchmarks/bench_kernels.py`` compares the two). Both paths must produce
identical labelings up to label renaming; tests enforce exact agreement of
the canonical (row-major first-visit) numbering.
"""

import os

import numpy as np

_env = os.environ.get("CONE_RUNGE_NO_NUMBA", "").strip()
_DISABLED = _env not in ("", "0")

try:
    if _DISABLED:
        raise ImportError("numba disabled by CONE_RUNGE_NO_NUMBA")
    from numba import njit

    NUMBA_ENABLED = True
except ImportError:
    njit = None
    NUMBA_ENABLED = False


# ---------------------------------------------------------------------------
# connected-component labeling
#
# Output contract (both paths): int32 array, -1 on background, labels
# 0..count-1 assigned in row-major order of each component's first cell.


def _canonicalize(labels, count):
    """Renumber labels so component ids follow row-major first appearance."""
    if count == 0:
        return labels, 0
    flat = labels.ravel()
    fg = flat >= 0
    first = np.full(count, flat.size, dtype=np.int64)
    idx = np.flatnonzero(fg)
    # reversed so the smallest index wins the final write
    first[flat[idx[::-1]]] = idx[::-1]
    order = np.argsort(first, kind="stable")
    remap = np.empty(count, dtype=np.int32)
    remap[order] = np.arange(count, dtype=np.int32)
    out = labels.copy()
    out[labels >= 0] = remap[labels[labels >= 0]]
    return out, count


def label_components_numpy(mask, connectivity=4):
    """Label a boolean grid by merging row runs (union-find over runs)."""
    if connectivity not in (4, 8):
        raise ValueError("connectivity must be 4 or 8")
    mask = np.asarray(mask, dtype=bool)
    ny, nx = mask.shape
    labels = np.full((ny, nx), -1, dtype=np.int32)

    # per-row runs [start, end) extracted with vectorized diffs
    padded = np.zeros((ny, nx + 1), dtype=np.int8)
    padded[:, :nx] = mask
    d = np.diff(padded, axis=1, prepend=0)
    rows_s, starts = np.nonzero(d == 1)
    rows_e, ends = np.nonzero(d == -1)
    n_runs = rows_s.size
    if n_runs == 0:
        return labels, 0

    parent = np.arange(n_runs, dtype=np.int64)

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    # row index -> slice of run ids (runs are emitted in row-major order)
    row_begin = np.searchsorted(rows_s, np.arange(ny + 1))
    reach = 0 if connectivity == 4 else 1
    for r in range(1, ny):
        a = row_begin[r - 1]
        a_end = row_begin[r]
        b = row_begin[r]
        b_end = row_begin[r + 1]
        i, j = a, b
        while i < a_end and j < b_end:
            # overlap test between run i (row r-1) and run j (row r)
            if starts[i] < ends[j] + reach and starts[j] < ends[i] + reach:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[max(ri, rj)] = min(ri, rj)
            if ends[i] < ends[j]:
                i += 1
            else:
                j += 1

    roots = np.array([find(k) for k in range(n_runs)], dtype=np.int64)
    uniq, packed = np.unique(roots, return_inverse=True)
    for k in range(n_runs):
        labels[rows_s[k], starts[k]:ends[k]] = packed[k]
    return _canonicalize(labels, uniq.size)


if NUMBA_ENABLED:

    @njit(cache=True)
    def _label_core(mask, reach):
        ny, nx = mask.shape
        labels = np.full((ny, nx), -1, dtype=np.int32)
        parent = np.empty(ny * nx, dtype=np.int32)
        nlab = 0
        for y in range(ny):
            for x in range(nx):
                if not mask[y, x]:
                    continue
                best = -1
                # scan already-visited neighbors (left, and row above)
                for dy, dx in ((0, -1), (-1, -1), (-1, 0), (-1, 1)):
                    if reach == 0 and dy == -1 and dx != 0:
                        continue
                    yy, xx = y + dy, x + dx
                    if yy < 0 or xx < 0 or xx >= nx:
                        continue
                    lab = labels[yy, xx]
                    if lab < 0:
                        continue
                    # find root
                    r = lab
                    while parent[r] != r:
                        parent[r] = parent[parent[r]]
                        r = parent[r]
                    if best < 0:
                        best = r
                    elif r != best:
                        if r < best:
                            parent[best] = r
                            best = r
                        else:
                            parent[r] = best
                if best < 0:
                    parent[nlab] = nlab
                    labels[y, x] = nlab
                    nlab += 1
                else:
                    labels[y, x] = best
        # compress and pack
        remap = np.full(nlab, -1, dtype=np.int32)
        count = 0
        for y in range(ny):
            for x in range(nx):
                lab = labels[y, x]
                if lab < 0:
                    continue
                r = lab
                while parent[r] != r:
                    r = parent[r]
                if remap[r] < 0:
                    remap[r] = count
                    count += 1
                labels[y, x] = remap[r]
        return labels, count

    def label_components_numba(mask, connectivity=4):
        if connectivity not in (4, 8):
            raise ValueError("connectivity must be 4 or 8")
        mask = np.ascontiguousarray(mask, dtype=np.bool_)
        return _label_core(mask, 0 if connectivity == 4 else 1)

    label_components = label_components_numba
else:
    label_components_numba = None
    label_components = label_components_numpy


# ---------------------------------------------------------------------------
# batched structure-constant products (used for Clifford multiplication)
#
# The table is "monomial": basis_i * basis_j = sign[i,j] * basis_idx[i,j],
# so a batched product is 64 fused multiply-adds per element pair.


def mul_batch_numpy(a, b, idx, sgn):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    out = np.zeros(np.broadcast(a, b).shape, dtype=np.float64)
    for i in range(8):
        for j in range(8):
            out[..., idx[i, j]] += sgn[i, j] * a[..., i] * b[..., j]
    return out


if NUMBA_ENABLED:

    @njit(cache=True)
    def _mul_batch_core(a, b, idx, sgn):
        n = a.shape[0]
        out = np.zeros((n, 8), dtype=np.float64)
        for k in range(n):
            for i in range(8):
                ai = a[k, i]
                if ai == 0.0:
                    continue
                for j in range(8):
                    out[k, idx[i, j]] += sgn[i, j] * ai * b[k, j]
        return out

    def mul_batch_numba(a, b, idx, sgn):
        a2 = np.ascontiguousarray(np.atleast_2d(a), dtype=np.float64)
        b2 = np.ascontiguousarray(np.atleast_2d(b), dtype=np.float64)
        if a2.shape[0] == 1 and b2.shape[0] > 1:
            a2 = np.repeat(a2, b2.shape[0], axis=0)
        if b2.shape[0] == 1 and a2.shape[0] > 1:
            b2 = np.repeat(b2, a2.shape[0], axis=0)
        out = _mul_batch_core(a2, b2, idx, sgn)
        if np.asarray(a).ndim == 1 and np.asarray(b).ndim == 1:
            return out[0]
        return out

    mul_batch = mul_batch_numba
else:
    mul_batch_numba = None
    mul_batch = mul_batch_numpy


# ---------------------------------------------------------------------------
# Euler characteristic of the pixel complex
#
# V - E + F with vertices counted once per corner wedge, which is the count
# matching 4-connected foreground / 8-connected background labeling. Plain
# numpy is already vectorized; there is no separate numba twin.


def euler_characteristic(mask):
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        return 0
    p = np.pad(mask, 1)
    f = int(mask.sum())
    e_h = int((p[1:, :] | p[:-1, :]).sum())
    e_v = int((p[:, 1:] | p[:, :-1]).sum())
    sw = p[:-1, :-1]
    se = p[:-1, 1:]
    nw = p[1:, :-1]
    ne = p[1:, 1:]
    trans = (
        (sw & ~se).astype(np.int32)
        + (se & ~ne)
        + (ne & ~nw)
        + (nw & ~sw)
    )
    occ = sw | se | ne | nw
    wedges = np.where(trans > 0, trans, occ.astype(np.int32))
    v = int(wedges.sum())
    return v - (e_h + e_v) + f
