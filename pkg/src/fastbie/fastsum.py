"""Fast all-pairs sums with the 2D Cauchy kernel 1/(z - y).

Two call shapes are supported:

* ``e_matvec``: sources to sources with the self term excluded,
  out_i = sum_{j != i} x_j / (y_i - y_j);
* ``f_matvec``: sources to separate targets, out_i = sum_j x_j / (z_i - y_j).

Both have an exact O(N^2) reference (``direct_e_matvec`` / ``direct_f_matvec``)
and a hierarchical fast path: an adaptive quadtree with complex Laurent
(multipole) expansions about cell centers, translated down through standard
multipole-to-local operators.  Well-separated cell pairs are found by a
dual-tree traversal with the acceptance rule r_a + r_b <= theta * dist using
cell circumradii; expansions are stored scaled by the circumradius so every
translation is numerically stable at any depth.  The expansion order is the
smallest order whose geometric error bound meets the accuracy class.

Accuracy classes follow the usual particle-FMM convention: iprec 1..5 maps
to max relative error (in the vector max norm, against the direct sum) of
0.5e-3, 0.5e-6, 0.5e-9, 0.5e-12, 0.5e-15.  Problems below ``DIRECT_CUTOFF``
points take the direct path unconditionally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

TOLERANCES = {1: 0.5e-3, 2: 0.5e-6, 3: 0.5e-9, 4: 0.5e-12, 5: 0.5e-15}

DIRECT_CUTOFF = 2048
LEAF_SIZE = 30
_MAC_THETA = 0.45  # accept when r_src + r_tgt <= theta * center distance
_ORDER_PAD = 8
_MAX_DEPTH = 48
_M2L_CHUNK = 65536


def expansion_order(tol: float) -> int:
    """Smallest order meeting ``tol`` at the traversal separation ratio."""
    return max(4, math.ceil(math.log(1.0 / tol) / math.log(1.0 / _MAC_THETA)) + _ORDER_PAD)


# ---------------------------------------------------------------------------
# Direct reference kernels
# ---------------------------------------------------------------------------
@numba.njit(parallel=True, cache=True)
def _direct_e_kernel(pts, x):  # pragma: no cover - exercised via wrapper
    n = pts.shape[0]
    out = np.empty(n, dtype=np.complex128)
    for i in numba.prange(n):
        zi = pts[i]
        acc = 0.0 + 0.0j
        for j in range(n):
            if j != i:
                acc += x[j] / (zi - pts[j])
        out[i] = acc
    return out


@numba.njit(parallel=True, cache=True)
def _direct_f_kernel(pts, x, targets):  # pragma: no cover
    # a zero denominator must surface as NaN: raising inside prange is not
    # supported and would silently zero the output
    nt = targets.shape[0]
    out = np.empty(nt, dtype=np.complex128)
    for i in numba.prange(nt):
        zi = targets[i]
        acc = 0.0 + 0.0j
        for j in range(pts.shape[0]):
            d = zi - pts[j]
            if d == 0.0:
                acc += complex(np.nan, np.nan)
            else:
                acc += x[j] / d
        out[i] = acc
    return out


def direct_e_matvec(points: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Exact double-loop evaluation of the self-excluded source sum."""
    points = np.ascontiguousarray(points, dtype=complex)
    x = np.ascontiguousarray(x, dtype=complex)
    if x.shape != points.shape:
        raise ValueError("weight vector length must match the point count")
    return _direct_e_kernel(points, x)


def direct_f_matvec(points: np.ndarray, x: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Exact double-loop evaluation of the source-to-target sum."""
    points = np.ascontiguousarray(points, dtype=complex)
    x = np.ascontiguousarray(x, dtype=complex)
    targets = np.ascontiguousarray(targets, dtype=complex)
    if x.shape != points.shape:
        raise ValueError("weight vector length must match the point count")
    out = _direct_f_kernel(points, x, targets)
    if not np.all(np.isfinite(out)):
        raise ValueError("a target coincides with a source point")
    return out


# ---------------------------------------------------------------------------
# Quadtree
# ---------------------------------------------------------------------------
@numba.njit(parallel=True, cache=True)
def _p2m_kernel(leaf_ids, starts, ends, pts, x, centers, scales, M):  # pragma: no cover
    order1 = M.shape[1]
    for u in numba.prange(leaf_ids.size):
        c = leaf_ids[u]
        z0 = centers[c]
        s = scales[c]
        for j in range(starts[c], ends[c]):
            zr = (pts[j] - z0) / s
            xj = x[j]
            M[c, 0] += xj
            pw = 1.0 + 0.0j
            for k in range(1, order1):
                pw *= zr
                M[c, k] += xj * pw


@numba.njit(parallel=True, cache=True)
def _l2p_kernel(leaf_ids, starts, ends, pts, centers, scales, L, out):  # pragma: no cover
    top = L.shape[1] - 1
    for u in numba.prange(leaf_ids.size):
        c = leaf_ids[u]
        z0 = centers[c]
        s = scales[c]
        for j in range(starts[c], ends[c]):
            zr = (pts[j] - z0) / s
            acc = L[c, top]
            for k in range(top - 1, -1, -1):
                acc = acc * zr + L[c, k]
            out[j] += acc


@numba.njit(parallel=True, cache=True)
def _p2p_kernel(tgt_cells, indptr, src_cells, t_starts, t_ends, s_starts, s_ends,
                tpts, spts, x, out, same_tree):  # pragma: no cover
    for u in numba.prange(tgt_cells.size):
        a = tgt_cells[u]
        for q in range(indptr[u], indptr[u + 1]):
            b = src_cells[q]
            exclude = same_tree and a == b
            for i in range(t_starts[a], t_ends[a]):
                zi = tpts[i]
                acc = 0.0 + 0.0j
                if exclude:
                    for j in range(s_starts[b], s_ends[b]):
                        if j != i:
                            acc += x[j] / (zi - spts[j])
                else:
                    for j in range(s_starts[b], s_ends[b]):
                        d = zi - spts[j]
                        if d == 0.0:
                            acc += complex(np.nan, np.nan)
                        else:
                            acc += x[j] / d
                out[i] += acc


class _Tree:
    """Adaptive geometric quadtree over complex points.

    Points are stored permuted so that every cell owns a contiguous index
    range; ``scale`` is the cell circumradius used both in the acceptance
    rule and for scaling expansions.
    """

    __slots__ = (
        "points", "perm", "center", "half", "scale", "start", "end",
        "leaf", "leaf_ids", "quadrant", "parent", "depth",
        "child_indptr", "child_ids", "level_groups",
    )

    def __init__(self, points: np.ndarray, leaf_size: int = LEAF_SIZE):
        n = points.size
        xr, yr = points.real, points.imag
        cx0 = 0.5 * (xr.min() + xr.max())
        cy0 = 0.5 * (yr.min() + yr.max())
        half0 = 0.5 * max(xr.max() - xr.min(), yr.max() - yr.min())
        half0 = half0 * (1.0 + 1e-12) + 1e-300

        perm = np.arange(n)
        centers: list[complex] = []
        halfs: list[float] = []
        starts: list[int] = []
        ends: list[int] = []
        parents: list[int] = []
        quads: list[int] = []
        depths: list[int] = []
        leaf: list[bool] = []
        children: list[list[int]] = []

        def rec(lo, hi, cx, cy, half, parent, quad, depth):
            me = len(centers)
            centers.append(complex(cx, cy))
            halfs.append(half)
            starts.append(lo)
            ends.append(hi)
            parents.append(parent)
            quads.append(quad)
            depths.append(depth)
            children.append([])
            if parent >= 0:
                children[parent].append(me)
            if hi - lo <= leaf_size or depth >= _MAX_DEPTH:
                leaf.append(True)
                return
            leaf.append(False)
            sub = perm[lo:hi]
            q = (xr[sub] >= cx).astype(np.int8) + 2 * (yr[sub] >= cy).astype(np.int8)
            order = np.argsort(q, kind="stable")
            perm[lo:hi] = sub[order]
            counts = np.bincount(q, minlength=4)
            off = lo
            hh = 0.5 * half
            for qq in range(4):
                cnt = int(counts[qq])
                if cnt:
                    ncx = cx + (hh if qq & 1 else -hh)
                    ncy = cy + (hh if qq & 2 else -hh)
                    rec(off, off + cnt, ncx, ncy, hh, me, qq, depth + 1)
                    off += cnt

        rec(0, n, cx0, cy0, half0, -1, -1, 0)

        self.perm = perm
        self.points = np.ascontiguousarray(points[perm])
        self.center = np.array(centers, dtype=complex)
        self.half = np.array(halfs, dtype=float)
        self.scale = self.half * math.sqrt(2.0)
        self.start = np.array(starts, dtype=np.int64)
        self.end = np.array(ends, dtype=np.int64)
        self.leaf = np.array(leaf, dtype=bool)
        self.leaf_ids = np.flatnonzero(self.leaf)
        self.parent = np.array(parents, dtype=np.int64)
        self.quadrant = np.array(quads, dtype=np.int64)
        self.depth = np.array(depths, dtype=np.int64)

        indptr = np.zeros(len(centers) + 1, dtype=np.int64)
        for i, ch in enumerate(children):
            indptr[i + 1] = indptr[i] + len(ch)
        flat = np.empty(indptr[-1], dtype=np.int64)
        for i, ch in enumerate(children):
            flat[indptr[i]:indptr[i + 1]] = ch
        self.child_indptr = indptr
        self.child_ids = flat

        # by (depth, quadrant): the translation operator is the same for all
        # members of a group, so upward/downward sweeps batch into 4 GEMMs
        # per level
        self.level_groups = []
        max_depth = int(self.depth.max()) if len(centers) else 0
        for d in range(1, max_depth + 1):
            at_d = np.flatnonzero(self.depth == d)
            row = []
            for q in range(4):
                cells = at_d[self.quadrant[at_d] == q]
                row.append((cells, self.parent[cells]))
            self.level_groups.append(row)

    @property
    def num_cells(self) -> int:
        return self.center.size


def _gather_children(tree: _Tree, cells: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flatten the children of ``cells``; returns (child_ids, repeat_counts)."""
    cnt = tree.child_indptr[cells + 1] - tree.child_indptr[cells]
    total = int(cnt.sum())
    base = np.repeat(tree.child_indptr[cells], cnt)
    offs = np.arange(total) - np.repeat(np.cumsum(cnt) - cnt, cnt)
    return tree.child_ids[base + offs], cnt


def _traverse(tgt: _Tree, src: _Tree):
    """Dual-tree traversal; returns far (M2L) and near (P2P) cell pairs."""
    m2l_t: list[np.ndarray] = []
    m2l_s: list[np.ndarray] = []
    p2p_t: list[np.ndarray] = []
    p2p_s: list[np.ndarray] = []
    fa = np.zeros(1, dtype=np.int64)
    fb = np.zeros(1, dtype=np.int64)
    while fa.size:
        dist = np.abs(tgt.center[fa] - src.center[fb])
        far = (tgt.scale[fa] + src.scale[fb]) <= _MAC_THETA * dist
        if far.any():
            m2l_t.append(fa[far])
            m2l_s.append(fb[far])
        fa, fb = fa[~far], fb[~far]
        if not fa.size:
            break
        aleaf = tgt.leaf[fa]
        bleaf = src.leaf[fb]
        both = aleaf & bleaf
        if both.any():
            p2p_t.append(fa[both])
            p2p_s.append(fb[both])
        fa, fb, aleaf, bleaf = fa[~both], fb[~both], aleaf[~both], bleaf[~both]
        if not fa.size:
            break
        split_a = (~aleaf) & (bleaf | (tgt.half[fa] >= src.half[fb]))
        ca, cnt_a = _gather_children(tgt, fa[split_a])
        rb = np.repeat(fb[split_a], cnt_a)
        cb, cnt_b = _gather_children(src, fb[~split_a])
        ra = np.repeat(fa[~split_a], cnt_b)
        fa = np.concatenate([ca, ra])
        fb = np.concatenate([rb, cb])

    def _cat(parts):
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    return _cat(m2l_t), _cat(m2l_s), _cat(p2p_t), _cat(p2p_s)


def _binomial_matrix(order: int) -> np.ndarray:
    """B[l, k] = C(k + l, l) for the multipole-to-local translation."""
    b = np.empty((order + 1, order + 1))
    for l in range(order + 1):
        for k in range(order + 1):
            b[l, k] = math.comb(k + l, l)
    return b


def _m2m_matrices(order: int) -> list[np.ndarray]:
    """Child-to-parent translation, one matrix per quadrant (scale-free)."""
    mats = []
    for q in range(4):
        a = ((1.0 if q & 1 else -1.0) + 1j * (1.0 if q & 2 else -1.0)) / (2.0 * math.sqrt(2.0))
        t = np.zeros((order + 1, order + 1), dtype=complex)
        for k in range(order + 1):
            for l in range(k + 1):
                t[k, l] = math.comb(k, l) * a ** (k - l) * 0.5**l
        mats.append(t)
    return mats


def _l2l_matrices(order: int) -> list[np.ndarray]:
    """Parent-to-child translation of local expansions, one per quadrant."""
    mats = []
    for q in range(4):
        a = ((1.0 if q & 1 else -1.0) + 1j * (1.0 if q & 2 else -1.0)) / (2.0 * math.sqrt(2.0))
        s = np.zeros((order + 1, order + 1), dtype=complex)
        for k in range(order + 1):
            for l in range(k, order + 1):
                s[k, l] = math.comb(l, k) * 0.5**k * a ** (l - k)
        mats.append(s)
    return mats


@dataclass(frozen=True)
class _FarField:
    """Precomputed M2L pair data, sorted by target cell."""

    tgt: np.ndarray
    src: np.ndarray
    u: np.ndarray      # src scale / D
    nv: np.ndarray     # -tgt scale / D
    inv_d: np.ndarray  # 1 / D, with D the target-source center offset

    @staticmethod
    def build(tgt_tree: _Tree, src_tree: _Tree, pair_t: np.ndarray, pair_s: np.ndarray) -> "_FarField":
        order = np.argsort(pair_t, kind="stable")
        pair_t, pair_s = pair_t[order], pair_s[order]
        d = tgt_tree.center[pair_t] - src_tree.center[pair_s]
        return _FarField(
            tgt=pair_t,
            src=pair_s,
            u=src_tree.scale[pair_s] / d,
            nv=-tgt_tree.scale[pair_t] / d,
            inv_d=1.0 / d,
        )


def _csr_by_target(pair_t: np.ndarray, pair_s: np.ndarray):
    order = np.argsort(pair_t, kind="stable")
    pair_t, pair_s = pair_t[order], pair_s[order]
    cells, counts = np.unique(pair_t, return_counts=True)
    indptr = np.zeros(cells.size + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return cells, indptr, pair_s


@dataclass(frozen=True)
class FastSumPlan:
    """Reusable summation plan for a fixed point set and accuracy class.

    The plan depends only on the points and ``iprec``, never on the weights,
    so it is built once per problem and shared across matvecs.  Immutable
    after construction; concurrent matvecs with different weight vectors are
    safe.
    """

    points: np.ndarray
    iprec: int
    tol: float
    order: int
    direct: bool
    tree: _Tree | None
    far: _FarField | None
    near: tuple | None
    binom: np.ndarray | None
    m2m: list | None
    l2l: list | None


def build_plan(points: np.ndarray, iprec: int = 4, leaf_size: int = LEAF_SIZE) -> FastSumPlan:
    """Validate the point set and precompute the summation structure.

    Rejects duplicate source points (pairwise distance below 1e-14 times the
    bounding-box diameter).  Point sets below ``DIRECT_CUTOFF`` are marked
    for the direct path and carry no tree.  ``leaf_size`` sets the
    near-field crossover (max points per leaf).
    """
    if iprec not in TOLERANCES:
        raise ValueError(f"iprec must be one of {sorted(TOLERANCES)}")
    points = np.ascontiguousarray(points, dtype=complex)
    if points.ndim != 1 or points.size == 0:
        raise ValueError("points must be a non-empty 1-D complex array")

    if points.size > 1:
        span = np.hypot(
            points.real.max() - points.real.min(),
            points.imag.max() - points.imag.min(),
        )
        order = np.lexsort((points.imag, points.real))
        gaps = np.abs(np.diff(points[order]))
        if span == 0.0 or np.min(gaps) < 1e-14 * span:
            raise ValueError("duplicate source points detected at plan build")

    tol = TOLERANCES[iprec]
    p = expansion_order(tol)
    if points.size < DIRECT_CUTOFF:
        return FastSumPlan(points, iprec, tol, p, True, None, None, None, None, None, None)

    tree = _Tree(points, leaf_size=leaf_size)
    m2l_t, m2l_s, p2p_t, p2p_s = _traverse(tree, tree)
    far = _FarField.build(tree, tree, m2l_t, m2l_s)
    near = _csr_by_target(p2p_t, p2p_s)
    return FastSumPlan(
        points, iprec, tol, p, False, tree, far, near,
        _binomial_matrix(p), _m2m_matrices(p), _l2l_matrices(p),
    )


def _upward(tree: _Tree, x_tree: np.ndarray, order: int, m2m: list) -> np.ndarray:
    multipoles = np.zeros((tree.num_cells, order + 1), dtype=complex)
    _p2m_kernel(tree.leaf_ids, tree.start, tree.end, tree.points, x_tree,
                tree.center, tree.scale, multipoles)
    for row in reversed(tree.level_groups):
        for q in range(4):
            cells, parents = row[q]
            if cells.size:
                multipoles[parents] += multipoles[cells] @ m2m[q].T
    return multipoles


def _far_field_locals(far: _FarField, multipoles: np.ndarray, binom: np.ndarray,
                      num_tgt_cells: int, order: int) -> np.ndarray:
    locals_ = np.zeros((num_tgt_cells, order + 1), dtype=complex)
    npairs = far.tgt.size
    for lo in range(0, npairs, _M2L_CHUNK):
        hi = min(lo + _M2L_CHUNK, npairs)
        u = far.u[lo:hi]
        nv = far.nv[lo:hi]
        k = hi - lo
        upow = np.empty((k, order + 1), dtype=complex)
        vpow = np.empty((k, order + 1), dtype=complex)
        upow[:, 0] = 1.0
        vpow[:, 0] = far.inv_d[lo:hi]
        for j in range(1, order + 1):
            upow[:, j] = upow[:, j - 1] * u
            vpow[:, j] = vpow[:, j - 1] * nv
        contrib = (multipoles[far.src[lo:hi]] * upow) @ binom.T
        contrib *= vpow
        # pairs are target-sorted: reduce runs, then one unique-indexed add
        tgt = far.tgt[lo:hi]
        run_starts = np.flatnonzero(np.diff(tgt, prepend=tgt[0] - 1))
        locals_[tgt[run_starts]] += np.add.reduceat(contrib, run_starts, axis=0)
    return locals_


def _downward_and_near(tgt_tree: _Tree, src_tree: _Tree, locals_: np.ndarray,
                       near, x_tree: np.ndarray, l2l: list, same_tree: bool) -> np.ndarray:
    for row in tgt_tree.level_groups:
        for q in range(4):
            cells, parents = row[q]
            if cells.size:
                locals_[cells] += locals_[parents] @ l2l[q].T
    out_tree = np.zeros(tgt_tree.points.size, dtype=complex)
    _l2p_kernel(tgt_tree.leaf_ids, tgt_tree.start, tgt_tree.end, tgt_tree.points,
                tgt_tree.center, tgt_tree.scale, locals_, out_tree)
    cells, indptr, src_cells = near
    _p2p_kernel(cells, indptr, src_cells,
                tgt_tree.start, tgt_tree.end, src_tree.start, src_tree.end,
                tgt_tree.points, src_tree.points, x_tree, out_tree, same_tree)
    return out_tree


def e_matvec(plan: FastSumPlan, x: np.ndarray) -> np.ndarray:
    """Self-excluded Cauchy sum over the plan's points with weights ``x``."""
    x = np.ascontiguousarray(x, dtype=complex)
    if x.shape != plan.points.shape:
        raise ValueError("weight vector length does not match the plan")
    if plan.direct:
        return _direct_e_kernel(plan.points, x)
    tree = plan.tree
    x_tree = x[tree.perm]
    multipoles = _upward(tree, x_tree, plan.order, plan.m2m)
    locals_ = _far_field_locals(plan.far, multipoles, plan.binom, tree.num_cells, plan.order)
    out_tree = _downward_and_near(tree, tree, locals_, plan.near, x_tree, plan.l2l, True)
    out = np.empty_like(out_tree)
    out[tree.perm] = out_tree
    return out


def f_matvec(plan: FastSumPlan, x: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Cauchy sum from the plan's points to separate target points."""
    x = np.ascontiguousarray(x, dtype=complex)
    targets = np.ascontiguousarray(targets, dtype=complex)
    if x.shape != plan.points.shape:
        raise ValueError("weight vector length does not match the plan")
    if targets.ndim != 1 or targets.size == 0:
        raise ValueError("targets must be a non-empty 1-D complex array")
    if plan.direct:
        return direct_f_matvec(plan.points, x, targets)
    src = plan.tree
    tgt = _Tree(targets)
    m2l_t, m2l_s, p2p_t, p2p_s = _traverse(tgt, src)
    far = _FarField.build(tgt, src, m2l_t, m2l_s)
    near = _csr_by_target(p2p_t, p2p_s)
    x_tree = x[src.perm]
    multipoles = _upward(src, x_tree, plan.order, plan.m2m)
    locals_ = _far_field_locals(far, multipoles, plan.binom, tgt.num_cells, plan.order)
    out_tree = _downward_and_near(tgt, src, locals_, near, x_tree, plan.l2l, False)
    if not np.all(np.isfinite(out_tree)):
        raise ValueError("a target coincides with a source point")
    out = np.empty_like(out_tree)
    out[tgt.perm] = out_tree
    return out
