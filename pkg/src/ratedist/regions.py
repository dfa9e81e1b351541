"""Rate/disturbance regions of discrete channels with one or two side receivers.

Every region is a union over input distributions of small polyhedra in
(R, Rd) or (R, Rd1, Rd2). A sweep enumerates distributions, computes the
vertices of each polyhedron in one batch, and hands the points to the
frontier builder, which convexifies.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted

from .channel import ChannelSpec, output_partition
from .frontier import RegionFrontier, budget_grid, frontier_from_points
from .info import (JointPmf, cond_entropy, cond_mutual_info, entropy,
                   entropy_rows, mutual_info, rational_lattice)
from .partitions import SetPartition, all_partitions, join, meet, refines

FEAS_TOL = 1e-9
DEFAULT_GRID = 12
MAX_JOINTS = 200_000


# single-distribution constituent regions

@dataclass(frozen=True)
class ConstituentRegion:
    """Polyhedron ``A @ (R, Rd...) <= b`` for one fixed distribution."""

    variables: tuple
    A: np.ndarray
    b: np.ndarray
    labels: tuple
    terms: dict
    source: JointPmf | None = field(default=None, repr=False)

    def slack(self, point) -> np.ndarray:
        return self.b - self.A @ np.asarray(point, dtype=float)

    def contains(self, point, tol: float = FEAS_TOL) -> bool:
        return bool(np.all(self.slack(point) >= -tol))

    def vertices(self) -> np.ndarray:
        pts, _ = batched_vertices(self.A, self.b[None, :])
        return np.unique(np.round(pts, 12), axis=0)


def _cond(joint: JointPmf):
    return ("U",) if "U" in joint.names else ()


def _iy(joint, a, b, c=()):
    return cond_mutual_info(joint, a, b, c)


ROWS_1DC = np.array([[1, 0], [0, -1], [1, -1], [-1, 0], [0, -1]], dtype=float)
LABELS_1DC = ("R <= I(X;Y)", "Rd >= I(X;Z|U)", "R - Rd <= I(X;Y|U) - I(X;Z|U)",
              "R >= 0", "Rd >= 0")


def constituent_1dc(joint: JointPmf) -> ConstituentRegion:
    """Region of one p(u,x) for a channel with one side receiver.

    ``joint`` carries axes X, Y, Z and optionally U.
    """
    for ax in ("X", "Y", "Z"):
        joint.axis(ax)
    C = _cond(joint)
    t = {
        "I(X;Y)": mutual_info(joint, "X", "Y"),
        "I(X;Y|U)": _iy(joint, "X", "Y", C),
        "I(X;Z|U)": _iy(joint, "X", "Z", C),
    }
    b = _rhs_1dc(t["I(X;Y)"], t["I(X;Y|U)"], t["I(X;Z|U)"])
    t["A"] = (t["I(X;Y)"], t["I(X;Z|U)"] + t["I(X;Y)"] - t["I(X;Y|U)"])
    t["B"] = (t["I(X;Y|U)"], t["I(X;Z|U)"])
    return ConstituentRegion(("R", "Rd"), ROWS_1DC, b, LABELS_1DC, t, joint)


def _rhs_1dc(ixy, ixy_u, ixz_u):
    ixy, ixy_u, ixz_u = np.broadcast_arrays(*map(np.asarray, (ixy, ixy_u, ixz_u)))
    z = np.zeros_like(ixy, dtype=float)
    return np.stack([ixy, -ixz_u, ixy_u - ixz_u, z, z], axis=-1)


ROWS_2DC = np.array([
    [1, 0, 0], [0, -1, -1], [1, -1, 0], [1, 0, -1], [1, -1, -1], [2, -1, -1],
    [-1, 0, 0], [0, -1, 0], [0, 0, -1]], dtype=float)
LABELS_2DC = ("R <= H(Y)", "Rd1 + Rd2 >= I(Z1;Z2|U)", "R - Rd1 <= H(Y|Z1,U)",
              "R - Rd2 <= H(Y|Z2,U)", "R - Rd1 - Rd2 <= H(Y|Z1,Z2,U) - I(Z1;Z2|U)",
              "2R - Rd1 - Rd2 <= H(Y|Z1,Z2,U) + H(Y|U) - I(Z1;Z2|U)",
              "R >= 0", "Rd1 >= 0", "Rd2 >= 0")

ROWS_ROOF = np.array([
    [1, 0, 0], [0, -1, 0], [0, 0, -1], [0, -1, -1],
    [-1, 0, 0], [0, -1, 0], [0, 0, -1]], dtype=float)
LABELS_ROOF = ("R <= H(Y)", "Rd1 >= I(Y;Z1,U)", "Rd2 >= I(Y;Z2,U)",
               "Rd1 + Rd2 >= I(Y;Z1,U) + I(Y;Z2,U) + I(Z1;Z2|U,Y)",
               "R >= 0", "Rd1 >= 0", "Rd2 >= 0")

ROWS_DEGRADED = np.array([
    [1, 0, 0], [1, -1, 0], [1, 0, -1], [-1, 0, 0], [0, -1, 0], [0, 0, -1]], dtype=float)
LABELS_DEGRADED = ("R <= H(Y)", "R - Rd1 <= H(Y|Z1)", "R - Rd2 <= H(Y|Z2)",
                   "R >= 0", "Rd1 >= 0", "Rd2 >= 0")


def thm4_terms(joint: JointPmf) -> dict:
    """Information terms of the two-receiver inner bound for one p(u,x).

    ``joint`` carries axes X, Y, Z1, Z2 and optionally U.
    """
    for ax in ("Y", "Z1", "Z2"):
        joint.axis(ax)
    C = _cond(joint)
    return {
        "H(Y)": entropy(joint, "Y"),
        "I(Z1;Z2|U)": cond_mutual_info(joint, "Z1", "Z2", C),
        "H(Y|Z1,U)": cond_entropy(joint, "Y", ("Z1",) + C),
        "H(Y|Z2,U)": cond_entropy(joint, "Y", ("Z2",) + C),
        "H(Y|Z1,Z2,U)": cond_entropy(joint, "Y", ("Z1", "Z2") + C),
        "H(Y|U)": cond_entropy(joint, "Y", C),
        "I(Z1;Z2|U,Y)": cond_mutual_info(joint, "Z1", "Z2", C + ("Y",)),
        "I(Y;Z1,U)": cond_mutual_info(joint, "Y", ("Z1",) + C),
        "I(Y;Z2,U)": cond_mutual_info(joint, "Y", ("Z2",) + C),
    }


def _rhs_2dc(t):
    I = np.asarray(t["I(Z1;Z2|U)"], dtype=float)
    z = np.zeros_like(I)
    return np.stack([
        np.broadcast_to(t["H(Y)"], I.shape), -I, t["H(Y|Z1,U)"] + z, t["H(Y|Z2,U)"] + z,
        t["H(Y|Z1,Z2,U)"] - I, t["H(Y|Z1,Z2,U)"] + t["H(Y|U)"] - I, z, z, z], axis=-1)


def _rhs_roof(t):
    a = np.asarray(t["I(Y;Z1,U)"], dtype=float)
    z = np.zeros_like(a)
    return np.stack([t["H(Y)"] + z, -a, -(t["I(Y;Z2,U)"] + z),
                     -(a + t["I(Y;Z2,U)"] + t["I(Z1;Z2|U,Y)"]), z, z, z], axis=-1)


def _rhs_degraded(hy, hy_z1, hy_z2):
    hy = np.asarray(hy, dtype=float)
    z = np.zeros_like(hy)
    return np.stack([hy, hy_z1 + z, hy_z2 + z, z, z, z], axis=-1)


def remark3_sides(t: dict) -> tuple[float, float]:
    """Both sides of the rewrite of the weighted sum-rate bound."""
    lhs = t["H(Y|Z1,Z2,U)"] + t["H(Y|U)"] - t["I(Z1;Z2|U)"]
    rhs = t["H(Y|Z1,U)"] + t["H(Y|Z2,U)"] - t["I(Z1;Z2|U,Y)"]
    return lhs, rhs


def constituent_2dc(joint: JointPmf) -> ConstituentRegion:
    """Inner-bound region (six inequalities plus signs) for one p(u,x)."""
    t = thm4_terms(joint)
    t["remark3"] = remark3_sides(t)
    return ConstituentRegion(("R", "Rd1", "Rd2"), ROWS_2DC, _rhs_2dc(t), LABELS_2DC, t, joint)


def constituent_roof(joint: JointPmf) -> ConstituentRegion:
    t = thm4_terms(joint)
    return ConstituentRegion(("R", "Rd1", "Rd2"), ROWS_ROOF, _rhs_roof(t), LABELS_ROOF, t, joint)


# vertex enumeration, batched over distributions

_PIVOTS: dict = {}


def _pivots(A: np.ndarray):
    key = A.tobytes() + bytes(A.shape)
    if key not in _PIVOTS:
        k = A.shape[1]
        out = []
        for S in itertools.combinations(range(A.shape[0]), k):
            sub = A[list(S)]
            if abs(np.linalg.det(sub)) > 1e-9:
                out.append((list(S), np.linalg.inv(sub)))
        _PIVOTS[key] = out
    return _PIVOTS[key]


def batched_vertices(A: np.ndarray, B: np.ndarray, tol: float = FEAS_TOL):
    """Vertices of ``{x : A x <= b}`` for every row ``b`` of ``B``.

    Returns the stacked vertices and, for each, the row of ``B`` it came from.
    """
    B = np.atleast_2d(B)
    pts, owner = [], []
    for S, inv in _pivots(A):
        X = B[:, S] @ inv.T
        ok = np.all(X @ A.T <= B + tol, axis=1)
        pts.append(X[ok])
        owner.append(np.flatnonzero(ok))
    return np.vstack(pts), np.concatenate(owner)


# batched information terms

class CellModel:
    """Support cells of p(u,x) W(outputs|x), with a label per variable.

    A batch of joints p(u,x), shaped (N, |U|, |X|), maps to cell masses by
    ``masses``; entropies of any subset of variables follow from pooling
    cells with equal labels.
    """

    def __init__(self, cond: np.ndarray, names, n_aux: int):
        cond = np.asarray(cond, dtype=float)
        nx = cond.shape[0]
        nz = np.argwhere(cond > 0)
        w = cond[tuple(nz.T)]
        u = np.repeat(np.arange(n_aux), len(nz))
        rows = np.tile(nz, (n_aux, 1))
        self.n_aux, self.n_x = n_aux, nx
        self.weight = np.tile(w, n_aux)
        self.src = u * nx + rows[:, 0]
        self.labels = {"U": u, "X": rows[:, 0]}
        for k, name in enumerate(names):
            self.labels[name] = rows[:, k + 1]
        self._pool: dict = {}

    def masses(self, J: np.ndarray) -> np.ndarray:
        flat = J.reshape(len(J), -1)
        return flat[:, self.src] * self.weight

    def H(self, M: np.ndarray, *names) -> np.ndarray:
        if not names:
            return np.zeros(len(M))
        key = tuple(sorted(names))
        if key not in self._pool:
            lab = np.stack([self.labels[n] for n in key], axis=1)
            _, inv = np.unique(lab, axis=0, return_inverse=True)
            inv = inv.ravel()
            pool = np.zeros((len(inv), inv.max() + 1))
            pool[np.arange(len(inv)), inv] = 1.0
            self._pool[key] = pool
        return entropy_rows(M @ self._pool[key])


def _terms_1dc(cm: CellModel, M):
    H = lambda *v: cm.H(M, *v)
    hu = H("U")
    return {
        "I(X;Y)": np.maximum(H("X") + H("Y") - H("X", "Y"), 0),
        "I(X;Y|U)": np.maximum(H("X", "U") + H("Y", "U") - H("X", "Y", "U") - hu, 0),
        "I(X;Z|U)": np.maximum(H("X", "U") + H("Z", "U") - H("X", "Z", "U") - hu, 0),
    }


def _terms_2dc(cm: CellModel, M):
    H = lambda *v: cm.H(M, *v)
    hu, hy = H("U"), H("Y")
    hyu = H("Y", "U")
    h1u, h2u, h12u = H("Z1", "U"), H("Z2", "U"), H("Z1", "Z2", "U")
    hy1u, hy2u, hy12u = H("Y", "Z1", "U"), H("Y", "Z2", "U"), H("Y", "Z1", "Z2", "U")
    pos = lambda a: np.maximum(a, 0.0)
    return {
        "H(Y)": hy,
        "I(Z1;Z2|U)": pos(h1u + h2u - h12u - hu),
        "H(Y|Z1,U)": pos(hy1u - h1u),
        "H(Y|Z2,U)": pos(hy2u - h2u),
        "H(Y|Z1,Z2,U)": pos(hy12u - h12u),
        "H(Y|U)": pos(hyu - hu),
        "I(Z1;Z2|U,Y)": pos(hy1u + hy2u - hy12u - hyu),
        "I(Y;Z1,U)": pos(hy + h1u - hy1u),
        "I(Y;Z2,U)": pos(hy + h2u - hy2u),
    }


def _terms_px(cm: CellModel, M):
    """Terms that depend on p(x) alone (auxiliary axis of size one)."""
    H = lambda *v: cm.H(M, *v)
    hy = H("Y")
    out = {"H(Y)": hy}
    for z in [n for n in cm.labels if n.startswith("Z")]:
        hyz, hz = H("Y", z), H(z)
        out[f"H(Y|{z})"] = np.maximum(hyz - hz, 0)
        out[f"I(Y;{z})"] = np.maximum(hy + hz - hyz, 0)
    return out


# families of input distributions, as integer counts over a denominator

@dataclass
class JointSet:
    counts: np.ndarray   # (N, |U|, |X|) nonnegative integers
    den: np.ndarray      # (N,)

    def __len__(self):
        return len(self.den)

    def floats(self, sl=slice(None)) -> np.ndarray:
        return self.counts[sl] / self.den[sl, None, None]

    def concat(self, other: JointSet) -> JointSet:
        return JointSet(np.concatenate([self.counts, other.counts]),
                        np.concatenate([self.den, other.den]))

    def take(self, idx) -> JointSet:
        return JointSet(self.counts[idx], self.den[idx])


def px_family(n_x: int, m: int) -> JointSet:
    counts, den = rational_lattice(n_x, m)
    return JointSet(counts[:, None, :], den)


def partition_family(n_x: int, n_aux: int, m: int, parts) -> JointSet:
    """U = f(X) for every partition f, with p(x) on the rational grid."""
    counts, den = rational_lattice(n_x, m)
    blocks = []
    for f in parts:
        lab = np.array(f.labels)
        if lab.max() >= n_aux:
            continue
        C = np.zeros((len(counts), n_aux, n_x), dtype=np.int64)
        C[:, lab, np.arange(n_x)] = counts
        blocks.append(C)
    return JointSet(np.concatenate(blocks), np.tile(den, len(blocks)))


def random_family(n_x: int, n_aux: int, m: int, count: int, rng) -> JointSet:
    """Seeded random joints on the 1/m lattice, sparse-ish via a small Dirichlet."""
    if count <= 0:
        return JointSet(np.zeros((0, n_aux, n_x), np.int64), np.zeros(0, np.int64))
    p = rng.dirichlet(np.full(n_aux * n_x, 0.3), size=count)
    C = np.stack([rng.multinomial(m, row) for row in p]).reshape(count, n_aux, n_x)
    return JointSet(C.astype(np.int64), np.full(count, m, dtype=np.int64))


def lattice_neighbors(js: JointSet) -> JointSet:
    """Every joint reachable by moving one unit of mass between two cells.

    Moves stay on each joint's own lattice, so no denominator grows.
    """
    if len(js) == 0:
        return js
    N, nu, nx = js.counts.shape
    cells = nu * nx
    flat = js.counts.reshape(N, cells)
    a, b = np.meshgrid(np.arange(cells), np.arange(cells), indexing="ij")
    a, b = a[a != b], b[a != b]
    moved = np.repeat(flat[:, None, :], len(a), axis=1)
    ii = np.arange(len(a))
    moved[:, ii, a] -= 1
    moved[:, ii, b] += 1
    ok = moved[:, ii, a] >= 0
    out = moved[ok].reshape(-1, nu, nx)
    den = np.repeat(js.den, len(a))[ok.ravel()]
    return JointSet(out, den)


def _n_partition_grid(n_x, n_parts, m, cap):
    """Largest resolution <= m keeping the partition family under ``cap``."""
    while m > 1 and n_parts * len(rational_lattice(n_x, m)[0]) > cap:
        m -= 1
    return m


# sweeps

class _Points:
    """Collects candidate points and the joint each one came from."""

    def __init__(self):
        self.pts, self.owner = [], []

    def add(self, pts, owner):
        self.pts.append(pts)
        self.owner.append(owner)

    def arrays(self):
        return np.vstack(self.pts), np.concatenate(self.owner)


class _Sources:
    def __init__(self, js: JointSet, owner):
        self.js, self.owner = js, owner

    def __getitem__(self, i):
        j = int(self.owner[i])
        return self.js.counts[j] / self.js.den[j]


def _eval(cm, js: JointSet, terms_fn, rows, rhs_fn, chunk=4096):
    pts = _Points()
    for s in range(0, len(js), chunk):
        M = cm.masses(js.floats(slice(s, s + chunk)))
        B = rhs_fn(terms_fn(cm, M))
        P, own = batched_vertices(rows, B)
        pts.add(P, own + s)
    return pts.arrays()




def _sweep(cm, js, terms_fn, rows, rhs_fn, budgets, refine=0, extra_support=None):
    P, own = _eval(cm, js, terms_fn, rows, rhs_fn)
    if refine:
        front = frontier_from_points(P, budgets)
        sup = _supporting_joints(front, own, refine)
        if extra_support is not None:
            sup = np.union1d(sup, extra_support)
        nb = lattice_neighbors(js.take(sup))
        if len(nb):
            P2, own2 = _eval(cm, nb, terms_fn, rows, rhs_fn)
            P = np.vstack([P, P2])
            own = np.concatenate([own, own2 + len(js)])
            js = js.concat(nb)
    return frontier_from_points(P, budgets, sources=_Sources(js, own)), js


def _supporting_joints(front: RegionFrontier, owner, limit):
    sup = front.meta["support"]
    ids = np.unique(sup[sup >= 0])
    joints = np.unique(owner[ids])
    if len(joints) > limit:
        joints = joints[np.linspace(0, len(joints) - 1, limit).astype(int)]
    return joints


# estimators

def _check_channel(ch, K, deterministic=False):
    if not isinstance(ch, ChannelSpec):
        raise TypeError(f"expected a ChannelSpec, got {type(ch).__name__}")
    if ch.K != K:
        raise ValueError(f"this region needs {K} side receiver(s), channel has {ch.K}")
    if deterministic and not ch.deterministic:
        raise ValueError("this region needs deterministic outputs")


def _std_names(ch):
    return ("Y", "Z") if ch.K == 1 else ("Y", "Z1", "Z2")


class _FrontierEstimator(BaseEstimator):
    """Shared predict/score plumbing: ``fit`` sets ``frontier_``."""

    def predict(self, X):
        check_is_fitted(self, "frontier_")
        X = np.asarray(X, dtype=float)
        if self.frontier_.dims == 2:
            X = check_array(X.reshape(-1, 1))
            return self.frontier_.evaluate(X[:, 0])
        X = check_array(np.atleast_2d(X))
        if X.shape[1] != 2:
            raise ValueError("budgets must have two columns (Rd1, Rd2)")
        return self.frontier_.evaluate(X)

    def _budgets(self, n_x, dims):
        g = budget_grid(n_x, self.budget_steps)
        return (g,) if dims == 2 else (g, g)


class Region1DC(_FrontierEstimator):
    """Rate/disturbance region with one side receiver, general channel.

    Sweeps p(u,x) over deterministic auxiliaries U = f(X) with p(x) on the
    rational grid of resolution ``grid``, plus ``n_random`` seeded random
    joints with |U| = |X| + 1, then one lattice refinement pass.
    """

    def __init__(self, grid=DEFAULT_GRID, budget_steps=64, n_random=2000,
                 refine=128, seed=0, max_joints=MAX_JOINTS):
        self.grid = grid
        self.budget_steps = budget_steps
        self.n_random = n_random
        self.refine = refine
        self.seed = seed
        self.max_joints = max_joints

    def fit(self, channel, y=None):
        _check_channel(channel, 1)
        nx = channel.n_inputs
        nu = nx + 1
        cm = CellModel(channel.conditional(), ("Y", "Z"), nu)
        parts = list(all_partitions(nx))
        mg = _n_partition_grid(nx, len(parts), self.grid, self.max_joints)
        rng = np.random.default_rng(self.seed)
        js = partition_family(nx, nu, mg, parts).concat(
            random_family(nx, nu, self.grid, self.n_random, rng))
        self.frontier_, self.joints_ = _sweep(
            cm, js, _terms_1dc, ROWS_1DC,
            lambda t: _rhs_1dc(t["I(X;Y)"], t["I(X;Y|U)"], t["I(X;Z|U)"]),
            self._budgets(nx, 2), refine=self.refine)
        self.partition_grid_ = mg
        return self


def dominant_corner(channel: ChannelSpec):
    """Zero-disturbance corner with the largest rate, and the p(x) reaching it.

    Picks the side symbol z with the most compatible desired symbols (lowest
    z on ties), one input per such y (lowest x), uniform over those inputs.
    """
    _check_channel(channel, 1, deterministic=True)
    y, z = (np.array(o.det_map) for o in channel.outputs)
    best, zstar = -1, None
    for zz in np.unique(z):
        count = len(np.unique(y[z == zz]))
        if count > best:
            best, zstar = count, int(zz)
    pmf = np.zeros(channel.n_inputs)
    for yy in np.unique(y[z == zstar]):
        x = int(np.flatnonzero((y == yy) & (z == zstar))[0])
        pmf[x] = 1.0
    pmf /= pmf.sum()
    return (float(np.log2(best)), 0.0), pmf


class DeterministicRegion1DC(_FrontierEstimator):
    """Deterministic one-receiver region, computed in both equivalent forms.

    ``frontier_`` comes from the per-p(x) polygons with corners (H(Y|Z), 0)
    and (H(Y), I(Y;Z)); ``alternative_frontier_`` hulls only the second
    corners. p(x) runs over the rational grid plus the dominant corner pmf.
    """

    def __init__(self, grid=24, budget_steps=64):
        self.grid = grid
        self.budget_steps = budget_steps

    def fit(self, channel, y=None):
        _check_channel(channel, 1, deterministic=True)
        nx = channel.n_inputs
        corner, pmf = dominant_corner(channel)
        js = px_family(nx, self.grid)
        k = int(round(1 / pmf[pmf > 0][0]))
        js = js.concat(JointSet(np.rint(pmf * k).astype(np.int64)[None, None, :],
                                np.array([k])))
        cm = CellModel(channel.conditional(), ("Y", "Z"), 1)
        t = _terms_px(cm, cm.masses(js.floats()))
        hy, hyz, iyz = t["H(Y)"], t["H(Y|Z)"], t["I(Y;Z)"]
        zero = np.zeros_like(hy)
        P1 = np.stack([hyz, zero], axis=1)
        P2 = np.stack([hy, iyz], axis=1)
        n = len(hy)
        pts = np.vstack([np.zeros((1, 2)), P1, P2])
        own = np.concatenate([[0], np.arange(n), np.arange(n)])
        budgets = self._budgets(nx, 2)
        self.frontier_ = frontier_from_points(pts, budgets, sources=_Sources(js, own))
        self.alternative_frontier_ = frontier_from_points(
            P2, budgets, sources=_Sources(js, np.arange(n)))
        self.dominant_corner_ = corner
        self.dominant_pmf_ = pmf
        self.joints_ = js
        return self


class InnerBound2DC(_FrontierEstimator):
    """Inner bound for two side receivers (``roof=True`` for the roof subset).

    The sweep mirrors Region1DC with |U| = |X| + 2. When computing the full
    inner bound, the refinement pass also expands the joints that support
    the roof frontier, so the inner joint set always contains the roof one.
    """

    def __init__(self, grid=DEFAULT_GRID, budget_steps=64, n_random=2000,
                 refine=128, seed=0, roof=False, max_joints=MAX_JOINTS):
        self.grid = grid
        self.budget_steps = budget_steps
        self.n_random = n_random
        self.refine = refine
        self.seed = seed
        self.roof = roof
        self.max_joints = max_joints

    def _base(self, channel):
        nx = channel.n_inputs
        nu = nx + 2
        parts = list(all_partitions(nx))
        mg = _n_partition_grid(nx, len(parts), self.grid, self.max_joints)
        rng = np.random.default_rng(self.seed)
        js = partition_family(nx, nu, mg, parts).concat(
            random_family(nx, nu, self.grid, self.n_random, rng))
        cm = CellModel(channel.conditional(), ("Y", "Z1", "Z2"), nu)
        return cm, js

    def fit(self, channel, y=None):
        _check_channel(channel, 2, deterministic=True)
        cm, js = self._base(channel)
        budgets = self._budgets(channel.n_inputs, 3)
        roof_fn = (_terms_2dc, ROWS_ROOF, _rhs_roof)
        if self.roof:
            self.frontier_, self.joints_ = _sweep(cm, js, *roof_fn, budgets, refine=self.refine)
            return self
        extra = None
        if self.refine:
            P, own = _eval(cm, js, *roof_fn)
            extra = _supporting_joints(frontier_from_points(P, budgets), own, self.refine)
        self.frontier_, self.joints_ = _sweep(
            cm, js, _terms_2dc, ROWS_2DC, _rhs_2dc, budgets,
            refine=self.refine, extra_support=extra)
        return self


class OuterBound2DC(_FrontierEstimator):
    """Outer bound: hull of (H(Y), I(Y;Z1), I(Y;Z2)) over p(x)."""

    def __init__(self, grid=DEFAULT_GRID, budget_steps=64):
        self.grid = grid
        self.budget_steps = budget_steps

    def fit(self, channel, y=None, pmfs=None):
        _check_channel(channel, 2, deterministic=True)
        nx = channel.n_inputs
        js = px_family(nx, self.grid) if pmfs is None else _pmf_set(pmfs, nx)
        cm = CellModel(channel.conditional(), ("Y", "Z1", "Z2"), 1)
        t = _terms_px(cm, cm.masses(js.floats()))
        P = np.stack([t["H(Y)"], t["I(Y;Z1)"], t["I(Y;Z2)"]], axis=1)
        self.frontier_ = frontier_from_points(
            P, self._budgets(nx, 3), sources=_Sources(js, np.arange(len(P))))
        self.joints_ = js
        return self


def _pmf_set(pmfs, nx):
    """Float pmfs as a JointSet (denominator 1 with float counts is avoided)."""
    pmfs = np.atleast_2d(np.asarray(pmfs, dtype=float))
    if pmfs.shape[1] != nx:
        raise ValueError(f"pmfs need {nx} columns")
    return _FloatSet(pmfs[:, None, :])


class _FloatSet(JointSet):
    def __init__(self, J):
        super().__init__(J, np.ones(len(J)))

    def floats(self, sl=slice(None)):
        return self.counts[sl]


EXACT_CASES = ("degraded-z1z2", "degraded-z2z1", "thm6-z1", "thm6-z2")


def exactness_cases(channel: ChannelSpec) -> list[str]:
    """Every structural condition under which the two-receiver region is known."""
    _check_channel(channel, 2, deterministic=True)
    Y, Z1, Z2 = (output_partition(channel, i) for i in range(3))
    common = meet(Y, join(Z1, Z2))
    held = {
        "degraded-z1z2": refines(Z1, Z2),
        "degraded-z2z1": refines(Z2, Z1),
        "thm6-z1": refines(common, Z1),
        "thm6-z2": refines(common, Z2),
    }
    return [c for c in EXACT_CASES if held[c]]


def check_exactness(channel: ChannelSpec) -> str:
    """First applicable case label (degraded before common-part), or 'none'."""
    cases = exactness_cases(channel)
    return cases[0] if cases else "none"


class ExactRegion2DC(_FrontierEstimator):
    """Exact two-receiver region where a structural condition makes it known."""

    def __init__(self, grid=DEFAULT_GRID, budget_steps=64):
        self.grid = grid
        self.budget_steps = budget_steps

    def fit(self, channel, y=None):
        case = check_exactness(channel)
        if case == "none":
            raise ValueError("no exactness condition holds for this channel")
        nx = channel.n_inputs
        js = px_family(nx, self.grid)
        cm = CellModel(channel.conditional(), ("Y", "Z1", "Z2"), 1)
        t = _terms_px(cm, cm.masses(js.floats()))
        budgets = self._budgets(nx, 3)
        if case.startswith("thm6"):
            P = np.stack([t["H(Y)"], t["I(Y;Z1)"], t["I(Y;Z2)"]], axis=1)
            own = np.arange(len(P))
        else:
            P, own = batched_vertices(
                ROWS_DEGRADED, _rhs_degraded(t["H(Y)"], t["H(Y|Z1)"], t["H(Y|Z2)"]))
        self.frontier_ = frontier_from_points(P, budgets, sources=_Sources(js, own))
        self.case_ = case
        self.joints_ = js
        return self


def fixed_aux_2dc(channel: ChannelSpec, aux, grid=DEFAULT_GRID, budget_steps=64,
                  roof=False) -> RegionFrontier:
    """Inner bound restricted to U = aux(X), hulled over p(x) on the grid."""
    _check_channel(channel, 2, deterministic=True)
    aux = aux if isinstance(aux, SetPartition) else SetPartition(aux)
    nx = channel.n_inputs
    nu = aux.n_blocks
    js = partition_family(nx, nu, grid, [aux])
    cm = CellModel(channel.conditional(), ("Y", "Z1", "Z2"), nu)
    rows, rhs = (ROWS_ROOF, _rhs_roof) if roof else (ROWS_2DC, _rhs_2dc)
    P, own = _eval(cm, js, _terms_2dc, rows, rhs)
    g = budget_grid(nx, budget_steps)
    return frontier_from_points(P, (g, g), sources=_Sources(js, own))


# functional forms

def region_1dc(channel, grid=DEFAULT_GRID, **kw) -> RegionFrontier:
    return Region1DC(grid=grid, **kw).fit(channel).frontier_


def region_1dc_det(channel, grid=24, **kw) -> RegionFrontier:
    """Frontier of the deterministic region; the alternative form is in meta."""
    est = DeterministicRegion1DC(grid=grid, **kw).fit(channel)
    front = est.frontier_
    front.meta["alternative"] = est.alternative_frontier_
    front.meta["dominant_corner"] = est.dominant_corner_
    front.meta["dominant_pmf"] = est.dominant_pmf_
    return front


def inner_2dc(channel, grid=DEFAULT_GRID, **kw) -> RegionFrontier:
    return InnerBound2DC(grid=grid, **kw).fit(channel).frontier_


def inner_2dc_roof(channel, grid=DEFAULT_GRID, **kw) -> RegionFrontier:
    return InnerBound2DC(grid=grid, roof=True, **kw).fit(channel).frontier_


def outer_2dc(channel, grid=DEFAULT_GRID, **kw) -> RegionFrontier:
    return OuterBound2DC(grid=grid, **kw).fit(channel).frontier_


def region_2dc_exact(channel, grid=DEFAULT_GRID, **kw) -> RegionFrontier:
    est = ExactRegion2DC(grid=grid, **kw).fit(channel)
    est.frontier_.meta["case"] = est.case_
    return est.frontier_


def standard_joint(channel: ChannelSpec, pux) -> JointPmf:
    """Joint over (U, X, Y, Z[1, Z2]) for p(u,x) given as a |U| x |X| array."""
    pux = np.atleast_2d(np.asarray(pux, dtype=float))
    names = ("U", "X") + _std_names(channel)
    cond = channel.conditional()
    k = cond.ndim - 1
    mass = pux.reshape(pux.shape + (1,) * k) * cond[None]
    return JointPmf(mass, names)
