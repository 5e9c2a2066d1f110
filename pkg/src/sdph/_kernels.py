"""Compiled inner loops (numba) for the distance transform and persistence.

Everything here is deterministic and sequential; callers may run different
kernel invocations from multiple threads (all kernels are nogil).

Cell addressing for the cubical complex uses the doubled grid: a cell of the
complex over an (nx, ny, nz) voxel volume is one point of the
(2nx+1) x (2ny+1) x (2nz+1) lattice.  Coordinate parity marks the axes the
cell spans (odd = spanned), so popcount of parities is the cell dimension,
vertices live at even/even/even points and voxels (3-cells) at odd/odd/odd.
The linear id of a cell is x-fastest:  g = a + Dx*(b + Dy*c).
"""

from __future__ import annotations

import numpy as np
from numba import njit

BIG = 1.0e18

# owner table tags for the reduction pivot registry
_OWNER_NONE = np.uint8(0)
_OWNER_APPARENT = np.uint8(1)
_OWNER_STORED = np.uint8(2)


@njit(cache=True, nogil=True)
def fnv1a64(data):
    """64-bit FNV-1a digest of a byte array."""
    h = np.uint64(0xCBF29CE484222325)
    prime = np.uint64(0x100000001B3)
    for i in range(data.size):
        h = np.uint64(h ^ np.uint64(data[i]))
        h = np.uint64(h * prime)
    return h


# ---------------------------------------------------------------------------
# Exact squared Euclidean distance transform.
#
# Separable lower-envelope method: one pass per axis, each pass computes
# out[j] = min_i (f[i] + (j-i)^2) exactly over the row, by maintaining the
# lower envelope of the parabolas rooted at the row entries.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _envelope_pass(f, v, z, out):
    n = f.size
    k = 0
    v[0] = 0
    z[0] = -BIG
    z[1] = BIG
    for q in range(1, n):
        fq = f[q] + q * q
        while True:
            p = v[k]
            s = (fq - (f[p] + p * p)) / (2.0 * (q - p))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = BIG
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        p = v[k]
        out[q] = (q - p) * (q - p) + f[p]


@njit(cache=True, nogil=True)
def edt_sq_3d(target):
    """Exact squared distance (voxel-index metric) to the True voxels.

    `target` is a C-contiguous bool array (nx, ny, nz) with at least one
    True entry; output values are exact integers stored as float64.
    """
    nx, ny, nz = target.shape
    d = np.empty((nx, ny, nz), dtype=np.float64)

    # pass 1 (z axis, contiguous): distance within each row to nearest seed
    nmax = max(nx, max(ny, nz))
    f = np.empty(nmax, dtype=np.float64)
    v = np.empty(nmax, dtype=np.int64)
    z = np.empty(nmax + 1, dtype=np.float64)
    row = np.empty(nmax, dtype=np.float64)

    for x in range(nx):
        for y in range(ny):
            for k in range(nz):
                f[k] = 0.0 if target[x, y, k] else BIG
            _envelope_pass(f[:nz], v, z, row[:nz])
            for k in range(nz):
                d[x, y, k] = row[k]

    # pass 2 (y axis)
    for x in range(nx):
        for k in range(nz):
            for y in range(ny):
                f[y] = d[x, y, k]
            _envelope_pass(f[:ny], v, z, row[:ny])
            for y in range(ny):
                d[x, y, k] = row[y]

    # pass 3 (x axis)
    for y in range(ny):
        for k in range(nz):
            for x in range(nx):
                f[x] = d[x, y, k]
            _envelope_pass(f[:nx], v, z, row[:nx])
            for x in range(nx):
                d[x, y, k] = row[x]

    return d


# ---------------------------------------------------------------------------
# Zero-dimensional persistence: Kruskal-style union-find over the vertex and
# edge cells, elder rule keyed by (value, cell id) rank.
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:  # path compression
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True, nogil=True)
def dim0_pairs(edges_sorted, rank_vertex, Dx, Dy, n_vertices):
    """Union-find over edges in filtration order.

    Returns (birth_rank, death_edge_g, n_pairs, essential_ranks, n_ess):
    finite pairs as (vertex rank, edge id), plus the birth rank of each
    surviving component.  Zero-persistence pairs are NOT filtered here.
    """
    parent = np.empty(n_vertices, dtype=np.int64)
    birth = np.empty(n_vertices, dtype=np.int64)
    for i in range(n_vertices):
        parent[i] = i
        birth[i] = i
    sxy = Dx * Dy

    n_edges = edges_sorted.size
    out_birth = np.empty(n_edges, dtype=np.int64)
    out_death = np.empty(n_edges, dtype=np.int64)
    n_pairs = 0

    for idx in range(n_edges):
        g = edges_sorted[idx]
        a = g % Dx
        if a & 1:
            u = g - 1
            w = g + 1
        else:
            b = (g // Dx) % Dy
            if b & 1:
                u = g - Dx
                w = g + Dx
            else:
                u = g - sxy
                w = g + sxy
        ru = _find(parent, rank_vertex[u])
        rw = _find(parent, rank_vertex[w])
        if ru == rw:
            continue
        bu = birth[ru]
        bw = birth[rw]
        if bu <= bw:  # component of rw is younger: it dies
            parent[rw] = ru
            out_birth[n_pairs] = bw
        else:
            parent[ru] = rw
            out_birth[n_pairs] = bu
        out_death[n_pairs] = g
        n_pairs += 1

    ess = np.empty(16, dtype=np.int64)
    n_ess = 0
    for i in range(n_vertices):
        if parent[i] == i:
            if n_ess >= ess.size:
                tmp = np.empty(ess.size * 2, dtype=np.int64)
                tmp[: ess.size] = ess
                ess = tmp
            ess[n_ess] = birth[i]
            n_ess += 1
    return out_birth, out_death, n_pairs, ess, n_ess


# ---------------------------------------------------------------------------
# Column reduction for one boundary operator (d-cells against (d-1)-cells),
# processed in filtration order with two standard shortcuts:
#
# * clearing: columns already known to be creators (pivot rows of the next
#   higher reduction) are skipped outright;
# * apparent pairs: when the maximal facet s of a column t has t as its
#   minimal cofacet, (s, t) is a persistence pair and the reduced column of
#   t is its raw boundary, so nothing needs to be stored.
#
# Working columns live in a lazy max-heap of facet ranks where equal pairs
# cancel (Z2 coefficients).
# ---------------------------------------------------------------------------


@njit(cache=True, nogil=True, inline="always")
def _heap_push(heap, n, val):
    i = n
    heap[i] = val
    while i > 0:
        p = (i - 1) >> 1
        if heap[p] < heap[i]:
            heap[p], heap[i] = heap[i], heap[p]
            i = p
        else:
            break
    return n + 1


@njit(cache=True, nogil=True, inline="always")
def _heap_pop(heap, n):
    top = heap[0]
    n -= 1
    if n > 0:
        val = heap[n]
        i = 0
        while True:
            l = 2 * i + 1
            if l >= n:
                break
            r = l + 1
            c = l
            if r < n and heap[r] > heap[l]:
                c = r
            if heap[c] > val:
                heap[i] = heap[c]
                i = c
            else:
                break
        heap[i] = val
    return top, n


@njit(cache=True, nogil=True)
def reduce_boundary(
    cols_sorted,
    cleared,
    value,
    rank_low,
    Dx,
    Dy,
    Dz,
    n_low,
):
    """Reduce the boundary columns of the cells in `cols_sorted`.

    cols_sorted : d-cell ids in filtration order
    cleared     : uint8 flags aligned with cols_sorted (skip when 1)
    value       : filtration value per cell id (whole doubled grid)
    rank_low    : (d-1)-cell id -> filtration rank among (d-1)-cells
    n_low       : number of (d-1)-cells

    Returns (birth_rank, death_g, n_pairs, n_unpaired): one entry per
    reduced column that found a pivot; n_unpaired counts zero columns.
    """
    sxy = Dx * Dy
    n_cols = cols_sorted.size

    owner_kind = np.zeros(n_low, dtype=np.uint8)
    owner_ref = np.empty(n_low, dtype=np.int64)

    # arena for stored (fully reduced) columns
    store_data = np.empty(4096, dtype=np.int64)
    store_len = 0
    store_start = np.empty(1024, dtype=np.int64)
    store_n = np.empty(1024, dtype=np.int64)
    n_stored = 0

    heap = np.empty(1024, dtype=np.int64)

    out_birth = np.empty(n_cols, dtype=np.int64)
    out_death = np.empty(n_cols, dtype=np.int64)
    n_pairs = 0
    n_unpaired = 0

    facets = np.empty(6, dtype=np.int64)

    for idx in range(n_cols):
        if cleared[idx]:
            continue
        g = cols_sorted[idx]
        a = g % Dx
        rem = g // Dx
        b = rem % Dy
        c = rem // Dy

        # enumerate facets: drop one spanned axis at a time
        nf = 0
        if a & 1:
            facets[nf] = g - 1
            facets[nf + 1] = g + 1
            nf += 2
        if b & 1:
            facets[nf] = g - Dx
            facets[nf + 1] = g + Dx
            nf += 2
        if c & 1:
            facets[nf] = g - sxy
            facets[nf + 1] = g + sxy
            nf += 2

        # maximal facet under (value, id) = maximal rank
        smax = -1
        smax_g = -1
        for i in range(nf):
            r = rank_low[facets[i]]
            if r > smax:
                smax = r
                smax_g = facets[i]

        # apparent pair test: is g the minimal cofacet of smax_g?
        sa = smax_g % Dx
        srem = smax_g // Dx
        sb = srem % Dy
        sc = srem // Dy
        best_g = -1
        best_val = 0.0
        for axis in range(3):
            if axis == 0:
                coord, stride, limit = sa, 1, Dx - 1
            elif axis == 1:
                coord, stride, limit = sb, Dx, Dy - 1
            else:
                coord, stride, limit = sc, sxy, Dz - 1
            if coord & 1:
                continue
            if coord > 0:
                cg = smax_g - stride
                cv = value[cg]
                if best_g < 0 or cv < best_val or (cv == best_val and cg < best_g):
                    best_g = cg
                    best_val = cv
            if coord < limit:
                cg = smax_g + stride
                cv = value[cg]
                if best_g < 0 or cv < best_val or (cv == best_val and cg < best_g):
                    best_g = cg
                    best_val = cv
        if best_g == g and owner_kind[smax] == _OWNER_NONE:
            owner_kind[smax] = _OWNER_APPARENT
            owner_ref[smax] = g
            out_birth[n_pairs] = smax
            out_death[n_pairs] = g
            n_pairs += 1
            continue

        # full reduction with a lazy cancellation heap
        hn = 0
        if heap.size < nf:
            heap = np.empty(2 * nf, dtype=np.int64)
        for i in range(nf):
            hn = _heap_push(heap, hn, rank_low[facets[i]])

        while True:
            # pop the pivot, cancelling equal pairs mod 2
            pivot = -1
            while hn > 0:
                p, hn = _heap_pop(heap, hn)
                if hn > 0 and heap[0] == p:
                    _, hn = _heap_pop(heap, hn)
                    continue
                pivot = p
                break
            if pivot < 0:
                n_unpaired += 1
                break
            k = owner_kind[pivot]
            if k == _OWNER_NONE:
                # claim the pivot; archive the reduced column
                owner_kind[pivot] = _OWNER_STORED
                owner_ref[pivot] = n_stored
                # drain remaining entries (cancelling) into the arena
                if n_stored >= store_start.size:
                    ns = store_start.size * 2
                    t1 = np.empty(ns, dtype=np.int64)
                    t1[: store_start.size] = store_start
                    store_start = t1
                    t2 = np.empty(ns, dtype=np.int64)
                    t2[: store_n.size] = store_n
                    store_n = t2
                start = store_len
                if store_len + hn + 1 > store_data.size:
                    ns = store_data.size * 2
                    while ns < store_len + hn + 1:
                        ns *= 2
                    t = np.empty(ns, dtype=np.int64)
                    t[:store_len] = store_data[:store_len]
                    store_data = t
                store_data[store_len] = pivot
                store_len += 1
                while hn > 0:
                    p, hn = _heap_pop(heap, hn)
                    if hn > 0 and heap[0] == p:
                        _, hn = _heap_pop(heap, hn)
                        continue
                    store_data[store_len] = p
                    store_len += 1
                store_start[n_stored] = start
                store_n[n_stored] = store_len - start
                n_stored += 1
                out_birth[n_pairs] = pivot
                out_death[n_pairs] = g
                n_pairs += 1
                break
            elif k == _OWNER_APPARENT:
                # add the raw boundary of the apparent partner
                og = owner_ref[pivot]
                oa = og % Dx
                orem = og // Dx
                ob = orem % Dy
                oc = orem // Dy
                need = hn + 6
                if heap.size < need:
                    t = np.empty(max(2 * heap.size, need), dtype=np.int64)
                    t[:hn] = heap[:hn]
                    heap = t
                if oa & 1:
                    hn = _heap_push(heap, hn, rank_low[og - 1])
                    hn = _heap_push(heap, hn, rank_low[og + 1])
                if ob & 1:
                    hn = _heap_push(heap, hn, rank_low[og - Dx])
                    hn = _heap_push(heap, hn, rank_low[og + Dx])
                if oc & 1:
                    hn = _heap_push(heap, hn, rank_low[og - sxy])
                    hn = _heap_push(heap, hn, rank_low[og + sxy])
                hn = _heap_push(heap, hn, pivot)  # cancels against itself
            else:
                si = owner_ref[pivot]
                start = store_start[si]
                cnt = store_n[si]
                need = hn + cnt
                if heap.size < need:
                    t = np.empty(max(2 * heap.size, need), dtype=np.int64)
                    t[:hn] = heap[:hn]
                    heap = t
                for i in range(cnt):
                    hn = _heap_push(heap, hn, store_data[start + i])
                hn = _heap_push(heap, hn, pivot)

    return out_birth, out_death, n_pairs, n_unpaired


@njit(cache=True, nogil=True)
def generating_voxels(cell_g, top1d, nx, ny, nz):
    """Map complex cells to the incident voxel realizing their value.

    Ties broken toward the smallest voxel linear index, so the assignment
    is deterministic.
    """
    Dx = 2 * nx + 1
    Dy = 2 * ny + 1
    out = np.empty(cell_g.size, dtype=np.int64)
    for i in range(cell_g.size):
        g = cell_g[i]
        if g < 0:
            out[i] = -1
            continue
        a = g % Dx
        rem = g // Dx
        b = rem % Dy
        c = rem // Dy
        x0 = a >> 1
        y0 = b >> 1
        z0 = c >> 1
        # spanned axis: the single slab x0; point axis: slabs [x0-1, x0] clipped
        if a & 1:
            xs0 = x0
            xs1 = x0
        else:
            xs0 = x0 - 1 if x0 > 0 else 0
            xs1 = x0 if x0 < nx else nx - 1
        if b & 1:
            ys0 = y0
            ys1 = y0
        else:
            ys0 = y0 - 1 if y0 > 0 else 0
            ys1 = y0 if y0 < ny else ny - 1
        if c & 1:
            zs0 = z0
            zs1 = z0
        else:
            zs0 = z0 - 1 if z0 > 0 else 0
            zs1 = z0 if z0 < nz else nz - 1
        best = -1
        best_val = 0.0
        for zz in range(zs0, zs1 + 1):
            for yy in range(ys0, ys1 + 1):
                for xx in range(xs0, xs1 + 1):
                    lin = xx + nx * (yy + ny * zz)
                    val = top1d[lin]
                    if best < 0 or val < best_val or (val == best_val and lin < best):
                        best = lin
                        best_val = val
        out[i] = best
    return out
