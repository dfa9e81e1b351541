"""Maximal-rate frontiers R*(budgets) of convex rate/disturbance regions.

A region is the convex hull of finitely many points (R, d1[, d2]) extended
downward in R (to R = 0) and upward in every disturbance coordinate. Its
frontier maps disturbance budgets to the largest admissible R, with NaN
where no point of the region meets the budgets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

FEAS_TOL = 1e-9


def budget_grid(n_inputs: int, steps: int = 64, top: float | None = None) -> np.ndarray:
    """Disturbance budgets ``0 .. log2|X|`` (or ``top``) in ``steps`` points."""
    if steps < 2:
        raise ValueError("budget grid needs at least 2 steps")
    top = np.log2(n_inputs) if top is None else top
    return np.linspace(0.0, float(top), steps)


# 2-D

def upper_envelope_2d(d, R, return_index: bool = False):
    """Vertices of the concave nondecreasing majorant of points ``(d, R)``.

    Returned in increasing ``d``; the last vertex carries the largest R, and
    the frontier stays flat to its right.
    """
    d = np.asarray(d, dtype=float)
    R = np.asarray(R, dtype=float)
    if d.size == 0:
        raise ValueError("no points")
    # lowest d first, and for equal d the largest R first
    order = np.lexsort((-R, d))
    d, R, idx = d[order], R[order], order
    # keep only points that beat every point to their left
    best = np.maximum.accumulate(R)
    keep = np.ones(d.size, bool)
    keep[1:] = R[1:] > best[:-1]
    d, R, idx = d[keep], R[keep], idx[keep]
    hull: list[int] = []
    for i in range(d.size):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            cross = (d[b] - d[a]) * (R[i] - R[a]) - (R[b] - R[a]) * (d[i] - d[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    h = np.array(hull)
    if return_index:
        return d[h], R[h], idx[h]
    return d[h], R[h]


def eval_envelope_2d(dv, Rv, budgets):
    budgets = np.asarray(budgets, dtype=float)
    out = np.interp(budgets, dv, Rv)
    out[budgets < dv[0] - FEAS_TOL] = np.nan
    return out


# 3-D

class Envelope3D:
    """Frontier of conv(points) + cone(-e_R, e_d1, e_d2), cut at R >= 0.

    ``points`` has rows (R, d1, d2) with every coordinate nonnegative. The
    cone is folded in by adding copies of each point shifted far along d1,
    d2 and dropped to R = 0, then the facets of one convex hull give R* as
    the lower envelope of the upward-facing planes.
    """

    def __init__(self, points, far: float | None = None):
        P = np.asarray(points, dtype=float)
        if P.ndim != 2 or P.shape[1] != 3 or len(P) == 0:
            raise ValueError("points must be a nonempty (n, 3) array")
        self.points = P
        n = len(P)
        span = max(float(P[:, 1:].max()), 1.0)
        self.far = far if far is not None else 4.0 * span + 1.0
        shifts = np.array([[0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1]], float) * self.far
        lifted = (P[None, :, :] + shifts[:, None, :]).reshape(-1, 3)
        floor = lifted.copy()
        floor[:, 0] = 0.0
        allpts = np.vstack([lifted, floor])
        self._origin = np.arange(len(allpts)) % n
        self.flat = float(P[:, 0].max()) <= 1e-12
        dproj = allpts[:, 1:]
        self._dhull = ConvexHull(_unique_rows(dproj))
        self._deq = self._dhull.equations
        if self.flat:
            self._eq = np.zeros((0, 4))
            self._simp = np.zeros((0, 3), int)
            self._hullpts = None
            return
        try:
            hull = ConvexHull(allpts)
        except QhullError:
            hull = ConvexHull(allpts, qhull_options="QJ")
        eq = hull.equations
        up = eq[:, 0] > 1e-12
        self._eq = eq[up]
        self._simp = hull.simplices[up]
        self._hullpts = hull

    def feasible(self, d1, d2):
        D = np.stack([np.ravel(d1), np.ravel(d2)], axis=1)
        D = np.minimum(D, self.far)
        val = D @ self._deq[:, :2].T + self._deq[:, 2]
        return (val <= FEAS_TOL).all(axis=1).reshape(np.shape(d1))

    def evaluate(self, d1, d2, return_support: bool = False):
        d1 = np.asarray(d1, dtype=float)
        d2 = np.asarray(d2, dtype=float)
        shape = np.broadcast_shapes(d1.shape, d2.shape)
        a = np.minimum(np.broadcast_to(d1, shape).ravel(), self.far)
        b = np.minimum(np.broadcast_to(d2, shape).ravel(), self.far)
        if self.flat:
            R = np.zeros(a.size)
            sup = np.full((a.size, 3), -1)
        else:
            nR, n1, n2, off = self._eq.T
            R = np.empty(a.size)
            k = np.empty(a.size, dtype=int)
            step = max(1, 2_000_000 // max(len(nR), 1))
            for s in range(0, a.size, step):
                planes = -(np.outer(a[s:s + step], n1) + np.outer(b[s:s + step], n2) + off) / nR
                k[s:s + step] = planes.argmin(axis=1)
                R[s:s + step] = planes[np.arange(len(planes)), k[s:s + step]]
            sup = self._origin[self._simp[k]]
            R = np.maximum(R, 0.0)
        ok = self.feasible(a, b)
        R = np.where(ok, R, np.nan)
        sup = np.where(ok[:, None], sup, -1)
        if return_support:
            return R.reshape(shape), sup.reshape(shape + (3,))
        return R.reshape(shape)

    def extreme_points(self) -> np.ndarray:
        """Indices of input points that are vertices of an upward facet."""
        if self.flat:
            return np.unique(self._origin[:0])
        verts = np.unique(self._simp.ravel())
        n = len(self.points)
        verts = verts[verts < n]
        return verts


def _unique_rows(A):
    return np.unique(np.round(A, 12), axis=0)


@dataclass
class RegionFrontier:
    """Sampled frontier of a rate/disturbance region.

    ``budgets`` holds one grid per disturbance axis, ``values`` the largest
    rate at each grid point (NaN where infeasible), ``vertices`` the extreme
    points as rows (R, d1[, d2]), and ``meta`` the supporting sources.
    """

    dims: int
    budgets: tuple
    values: np.ndarray
    vertices: np.ndarray
    meta: dict = field(default_factory=dict)
    _env: object = field(default=None, repr=False)

    def evaluate(self, budgets) -> np.ndarray:
        """R* at arbitrary budget points, shape (n,) or (n, 2)."""
        budgets = np.asarray(budgets, dtype=float)
        if self.dims == 2:
            dv, Rv = self.vertices[:, 1], self.vertices[:, 0]
            return eval_envelope_2d(dv, Rv, budgets.reshape(-1))
        budgets = budgets.reshape(-1, 2)
        return self._env.evaluate(budgets[:, 0], budgets[:, 1])

    @property
    def max_rate(self) -> float:
        return float(np.nanmax(self.vertices[:, 0]))

    def contains(self, point, tol: float = 1e-9) -> bool:
        """Whether (R, d1[, d2]) lies in the region."""
        point = np.asarray(point, dtype=float)
        if point[0] < -tol:
            return False
        r = self.evaluate(point[1:][None, :] if self.dims == 3 else point[1:])[0]
        return bool(np.isfinite(r) and point[0] <= r + tol)

    def grid_points(self) -> tuple[np.ndarray, np.ndarray]:
        """Budget rows and R* values flattened in C order."""
        if self.dims == 2:
            return self.budgets[0][:, None], self.values.ravel()
        g1, g2 = np.meshgrid(*self.budgets, indexing="ij")
        return np.stack([g1.ravel(), g2.ravel()], axis=1), self.values.ravel()

    def source(self, i: int):
        return self.meta["sources"][i]


def frontier_from_points(points, budgets, sources=None, meta=None) -> RegionFrontier:
    """Build a frontier from candidate points (R, d1[, d2]).

    ``sources`` is an optional sequence parallel to ``points`` naming the
    distribution behind each point; only those supporting the frontier are
    kept in ``meta``.
    """
    P = np.asarray(points, dtype=float)
    budgets = tuple(np.asarray(b, dtype=float) for b in budgets)
    meta = dict(meta or {})
    if P.shape[1] == 2:
        dv, Rv, idx = upper_envelope_2d(P[:, 1], P[:, 0], return_index=True)
        values = eval_envelope_2d(dv, Rv, budgets[0])
        b = budgets[0]
        right = np.clip(np.searchsorted(dv, b, side="left"), 0, len(dv) - 1)
        left = np.clip(right - (dv[right] > b), 0, len(dv) - 1)
        support = np.stack([idx[left], idx[right]], axis=1)
        support[~np.isfinite(values)] = -1
        verts = np.stack([Rv, dv], axis=1)
        vidx = idx
        env = None
        dims = 2
    elif P.shape[1] == 3:
        # prune dominated candidates before building the hull
        keep = _pareto_mask(P)
        base = np.flatnonzero(keep)
        env = Envelope3D(P[keep], far=4.0 * max(float(P[:, 1:].max()), 1.0) + 1.0)
        g1, g2 = np.meshgrid(budgets[0], budgets[1], indexing="ij")
        values, sup = env.evaluate(g1, g2, return_support=True)
        support = np.where(sup >= 0, base[np.maximum(sup, 0)], -1)
        ext = env.extreme_points()
        verts = P[base[ext]]
        vidx = base[ext]
        order = np.lexsort((verts[:, 2], verts[:, 1], -verts[:, 0]))
        verts, vidx = verts[order], vidx[order]
        dims = 3
    else:
        raise ValueError("points must have 2 or 3 columns")
    if sources is not None:
        used = np.unique(np.concatenate([support.ravel(), vidx]))
        used = used[used >= 0]
        remap = {int(u): k for k, u in enumerate(used)}
        meta["sources"] = [sources[int(u)] for u in used]
        meta["support"] = np.vectorize(lambda s: remap.get(int(s), -1), otypes=[int])(support) \
            if support.size else support
        meta["vertex_sources"] = np.array([remap[int(v)] for v in vidx], dtype=int)
    else:
        meta["support"] = support
    return RegionFrontier(dims, budgets, values, verts, meta, env)


def _lifted_vertices(P: np.ndarray, far: float) -> np.ndarray:
    """Indices of rows whose lifted copies include a vertex of the lifted hull."""
    n = len(P)
    if float(P[:, 0].max()) <= 1e-12:
        return np.arange(n)
    shifts = np.array([[0, 0, 0], [0, 1, 0], [0, 0, 1], [0, 1, 1]], float) * far
    lifted = (P[None, :, :] + shifts[:, None, :]).reshape(-1, 3)
    floor = lifted.copy()
    floor[:, 0] = 0.0
    try:
        hull = ConvexHull(np.vstack([lifted, floor]))
    except QhullError:
        return np.arange(n)
    return np.unique(hull.vertices % n)


def _pareto_mask(P: np.ndarray, chunk: int = 50_000) -> np.ndarray:
    """Drop duplicates and rows that cannot be extreme in the lifted hull.

    The hull of a union equals the hull of the per-chunk hull vertices, so
    chunks are reduced separately and the survivors once more together.
    """
    _, first = np.unique(np.round(P, 13), axis=0, return_index=True)
    idx = np.sort(first)
    if len(idx) <= chunk:
        return _mask_of(len(P), idx)
    far = 4.0 * max(float(P[:, 1:].max()), 1.0) + 1.0
    keep = [idx[s:s + chunk][_lifted_vertices(P[idx[s:s + chunk]], far)]
            for s in range(0, len(idx), chunk)]
    idx = np.concatenate(keep)
    idx = idx[_lifted_vertices(P[idx], far)]
    return _mask_of(len(P), idx)


def _mask_of(n, idx):
    mask = np.zeros(n, bool)
    mask[idx] = True
    return mask


# checks and comparison

def check_monotone(front: RegionFrontier, tol: float = 1e-9) -> bool:
    v = front.values
    ok = True
    for ax in range(v.ndim):
        diff = np.diff(v, axis=ax)
        ok &= bool(np.all(np.isnan(diff) | (diff >= -tol)))
    return ok


def check_concave(front: RegionFrontier, tol: float = 1e-9) -> bool:
    """Midpoint concavity along every axis and, in 3-D, both diagonals."""
    v = front.values
    steps = [(1,)] if v.ndim == 1 else [(1, 0), (0, 1), (1, 1), (1, -1)]
    for st in steps:
        a, b, c = _triples(v, st)
        mid = b - 0.5 * (a + c)
        good = np.isnan(mid) | (mid >= -tol)
        if not good.all():
            return False
    return True


def _triples(v, st):
    if v.ndim == 1:
        return v[:-2], v[1:-1], v[2:]
    n1, n2 = v.shape
    s1, s2 = st
    i = np.arange(n1)[:, None]
    j = np.arange(n2)[None, :]
    ok = (i + 2 * s1 < n1) & (j + 2 * s2 < n2) & (j + 2 * s2 >= 0)
    ii, jj = np.broadcast_arrays(i, j)
    ii, jj = ii[ok], jj[ok]
    return v[ii, jj], v[ii + s1, jj + s2], v[ii + 2 * s1, jj + 2 * s2]


@dataclass(frozen=True)
class CompareReport:
    a_minus_b: float
    b_minus_a: float
    a_in_b: bool
    b_in_a: bool

    @property
    def equal(self) -> bool:
        return self.a_in_b and self.b_in_a

    @property
    def deviation(self) -> float:
        return max(self.a_minus_b, self.b_minus_a, 0.0)


def frontier_compare(A: RegionFrontier, B: RegionFrontier, tol: float = 1e-9) -> CompareReport:
    """Largest signed excess of each frontier over the other on the shared grid.

    Infeasible cells count as minus infinity, so a cell feasible in A only
    makes ``a_minus_b`` infinite.
    """
    if A.dims != B.dims or A.values.shape != B.values.shape or not all(
            np.array_equal(x, y) for x, y in zip(A.budgets, B.budgets)):
        raise ValueError("frontiers are sampled on different budget grids")
    a = np.where(np.isnan(A.values), -np.inf, A.values)
    b = np.where(np.isnan(B.values), -np.inf, B.values)
    both_out = np.isinf(a) & np.isinf(b)
    with np.errstate(invalid="ignore"):
        ab = np.where(both_out, 0.0, a - b)
        ba = np.where(both_out, 0.0, b - a)
    amb, bma = float(ab.max()), float(ba.max())
    return CompareReport(amb, bma, amb <= tol, bma <= tol)
