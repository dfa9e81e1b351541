"""Gaussian rate/disturbance regions: scalar closed form and the MIMO region.

The vector region is the hull of corner points A and B of Gaussian
superposition codes with covariance pair (Ku, Kv), tr(Ku + Kv) <= P,
refined by maximizing R - lam * Rd along hull edge slopes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from sklearn.utils.validation import check_is_fitted

from .errors import GuardError
from .frontier import RegionFrontier, frontier_from_points, upper_envelope_2d
from .regions import _FrontierEstimator

PSD_TOL = 1e-10
PIVOT_FLOOR = 1e-12
MAX_DIM = 6


def C(x):
    """Gaussian capacity function 0.5 * log2(1 + x)."""
    return 0.5 * np.log2(1.0 + np.asarray(x, dtype=float))


@dataclass(frozen=True)
class GaussianScalarSpec:
    P: float
    N: float

    def __post_init__(self):
        if not self.P > 0:
            raise ValueError("power P must be positive")
        if not self.N > 1:
            raise ValueError(
                "side noise N must exceed 1; for N <= 1 the side receiver is at "
                "least as strong as the desired one and the disturbance equals the rate")


def scalar_points(spec: GaussianScalarSpec, steps: int = 64) -> np.ndarray:
    """Rows (R, Rd) = (C(aP), C(aP/N)) for a = 0 .. 1 in ``steps`` points."""
    if steps < 2:
        raise ValueError("need at least 2 steps")
    a = np.linspace(0.0, 1.0, steps)
    return np.stack([C(a * spec.P), C(a * spec.P / spec.N)], axis=1)


def scalar_rate(spec: GaussianScalarSpec, d) -> np.ndarray:
    """Closed-form frontier: largest R with disturbance at most ``d``."""
    d = np.asarray(d, dtype=float)
    r = 0.5 * np.log2(1.0 + spec.N * (np.exp2(2.0 * np.minimum(d, C(spec.P / spec.N))) - 1.0))
    return np.where(d < 0, np.nan, r)


def scalar_region(spec: GaussianScalarSpec, steps: int = 64) -> RegionFrontier:
    pts = scalar_points(spec, steps)
    front = frontier_from_points(pts, (pts[:, 1],))
    front.values[:] = pts[:, 0]
    front.meta["alpha"] = np.linspace(0.0, 1.0, steps)
    return front


class GaussianScalarRegion(_FrontierEstimator):
    """Scalar Gaussian region traced by the power fraction of the code."""

    def __init__(self, P=1.0, N=3.0, steps=64):
        self.P = P
        self.N = N
        self.steps = steps

    def fit(self, X=None, y=None):
        self.spec_ = GaussianScalarSpec(float(self.P), float(self.N))
        self.frontier_ = scalar_region(self.spec_, self.steps)
        return self

    def predict(self, X):
        check_is_fitted(self, "spec_")
        return scalar_rate(self.spec_, np.ravel(np.asarray(X, dtype=float)))


# vector case

def _logdet2(K):
    sign, ld = np.linalg.slogdet(K)
    if sign <= 0:
        raise ValueError("matrix is not positive definite")
    return ld / np.log(2.0)


def _check_noise(K, name):
    K = np.asarray(K, dtype=float)
    if K.ndim != 2 or K.shape[0] != K.shape[1]:
        raise ValueError(f"{name} must be square")
    if not np.allclose(K, K.T, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(K).min() <= PIVOT_FLOOR:
        raise ValueError(f"{name} is singular; determinant ratios are undefined")
    return K


def _check_psd(K, name, d):
    K = np.asarray(K, dtype=float)
    if K.shape != (d, d):
        raise ValueError(f"{name} must be {d}x{d}")
    if not np.allclose(K, K.T, atol=1e-10):
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(K).min() < -PSD_TOL:
        raise ValueError(f"{name} is not positive semidefinite")
    return K


@dataclass(frozen=True)
class GaussianVectorSpec:
    P: float
    K1: np.ndarray
    K2: np.ndarray

    def __post_init__(self):
        if self.P < 0:
            raise ValueError("power must be nonnegative")
        K1 = _check_noise(self.K1, "K1")
        K2 = _check_noise(self.K2, "K2")
        if K1.shape != K2.shape:
            raise ValueError("K1 and K2 differ in size")
        object.__setattr__(self, "K1", K1)
        object.__setattr__(self, "K2", K2)

    @property
    def d(self) -> int:
        return self.K1.shape[0]

    @classmethod
    def from_channel(cls, ch):
        return cls(float(ch.P), ch.K1, ch.K2)


class _Dets:
    """Cached log-determinants of the noise covariances."""

    def __init__(self, spec):
        self.K1, self.K2 = spec.K1, spec.K2
        self.l1, self.l2 = _logdet2(spec.K1), _logdet2(spec.K2)

    def corners(self, Ku, Kv):
        x1 = _logdet2(Ku + Kv + self.K1)
        v1 = _logdet2(Kv + self.K1)
        v2 = _logdet2(Kv + self.K2)
        a_r = 0.5 * (x1 - self.l1)
        b_r = 0.5 * (v1 - self.l1)
        b_d = 0.5 * (v2 - self.l2)
        a_d = b_d + 0.5 * (x1 - v1)
        return (a_r, a_d), (b_r, b_d)


def vector_corners(spec: GaussianVectorSpec, Ku, Kv):
    """Corner points A and B of the region of one covariance pair."""
    Ku = _check_psd(Ku, "Ku", spec.d)
    Kv = _check_psd(Kv, "Kv", spec.d)
    if np.trace(Ku + Kv) > spec.P + PSD_TOL:
        raise ValueError("tr(Ku + Kv) exceeds the power budget")
    A, B = _Dets(spec).corners(Ku, Kv)
    return (float(A[0]), float(A[1])), (float(B[0]), float(B[1]))


def _rotation(rng, d):
    Q, R = np.linalg.qr(rng.standard_normal((d, d)))
    return Q * np.sign(np.diag(R))


def sample_pairs(spec: GaussianVectorSpec, n: int, rng) -> list:
    """Random (Ku, Kv) under the trace budget.

    Total trace is a random fraction of P (full power half the time), split
    between the two layers at random; eigenvalues follow a flat Dirichlet and
    each matrix gets its own random rotation.
    """
    d = spec.d
    out = []
    for _ in range(n):
        tau = 1.0 if rng.random() < 0.5 else rng.random()
        beta = rng.random() if rng.random() < 0.7 else float(rng.random() < 0.5)
        tu, tv = spec.P * tau * beta, spec.P * tau * (1 - beta)
        mats = []
        for t in (tu, tv):
            lam = rng.dirichlet(np.ones(d)) * t
            Q = _rotation(rng, d)
            mats.append((Q * lam) @ Q.T)
        out.append((mats[0], mats[1]))
    return out


def _from_factors(theta, d, P, two):
    """Map free parameters to covariances with trace at most P."""
    k = d * d
    M = theta[:k].reshape(d, d)
    L = theta[k:2 * k].reshape(d, d) if two else np.zeros((d, d))
    s = theta[-1]
    Kv, Ku = M @ M.T, L @ L.T
    scale = P / (np.trace(Kv) + np.trace(Ku) + s * s + 1e-300)
    return Ku * scale, Kv * scale


def _to_factors(Ku, Kv, P, two):
    def root(K):
        w, V = np.linalg.eigh(K)
        return V * np.sqrt(np.clip(w, 0, None))

    slack = max(P - np.trace(Ku + Kv), 0.0) if two else max(P - np.trace(Kv), 0.0)
    parts = [root(Kv).ravel()]
    if two:
        parts.append(root(Ku).ravel())
    return np.concatenate(parts + [[np.sqrt(slack)]])


def _objective(dets, lam, Ku, Kv):
    A, B = dets.corners(Ku, Kv)
    return max(A[0] - lam * A[1], B[0] - lam * B[1])


def _value_and_grad(theta, dets, lam, d, P, two):
    """Negated R - lam * Rd of the A (two layers) or B corner, with gradient."""
    k = d * d
    M = theta[:k].reshape(d, d)
    L = theta[k:2 * k].reshape(d, d) if two else np.zeros((d, d))
    s = theta[-1]
    t = np.sum(M * M) + np.sum(L * L) + s * s + 1e-300
    c = P / t
    Kv, Ku = c * (M @ M.T), c * (L @ L.T)
    # value = 0.5 * (wx * log det(Ku+Kv+K1) + w1 * log det(Kv+K1) + w2 * log det(Kv+K2)) + const
    if two:
        wx, w1, w2 = 1.0 - lam, lam, -lam
    else:
        wx, w1, w2 = 0.0, 1.0, -lam
    Sx = Ku + Kv + dets.K1
    S1 = Kv + dets.K1
    S2 = Kv + dets.K2
    val = 0.5 * (wx * _logdet2(Sx) + w1 * _logdet2(S1) + w2 * _logdet2(S2))
    ln2 = np.log(2.0)
    Gx = wx * np.linalg.inv(Sx)
    Gv = 0.5 / ln2 * (Gx + w1 * np.linalg.inv(S1) + w2 * np.linalg.inv(S2))
    Gu = 0.5 / ln2 * Gx if two else np.zeros((d, d))
    Gv = 0.5 * (Gv + Gv.T)
    Gu = 0.5 * (Gu + Gu.T) if two else Gu
    S = np.sum(Gv * Kv) + (np.sum(Gu * Ku) if two else 0.0)
    gM = 2 * c * (Gv @ M) - 2 * S / t * M
    parts = [gM.ravel()]
    if two:
        gL = 2 * c * (Gu @ L) - 2 * S / t * L
        parts.append(gL.ravel())
    parts.append([-2 * S / t * s])
    return -val, -np.concatenate(parts)


@dataclass(frozen=True)
class BoundaryPoint:
    lam: float
    R: float
    Rd: float
    value: float
    kind: str
    Ku: np.ndarray
    Kv: np.ndarray


def lambda_boundary(spec: GaussianVectorSpec, lam: float, starts=None, seed: int = 0,
                    samples: int = 64, maxiter: int = 200) -> BoundaryPoint:
    """Maximize R - lam * Rd over Gaussian superposition codes.

    For lam <= 1 the A corner is optimal for every pair, for lam > 1 the B
    corner, whose value does not involve Ku, so Ku = 0 there. The search
    starts from the best of ``starts`` (or fresh samples) and runs L-BFGS-B
    on matrix square-root factors with a slack term enforcing the trace
    budget; the result is never worse than its starting point.
    """
    if not lam > 0:
        raise ValueError("lam must be positive")
    d, P = spec.d, spec.P
    zero = np.zeros((d, d))
    if P == 0:
        return BoundaryPoint(lam, 0.0, 0.0, 0.0, "B", zero, zero)
    dets = _Dets(spec)
    two = lam <= 1.0
    if starts is None:
        starts = sample_pairs(spec, samples, np.random.default_rng(seed))
    starts = list(starts) + [(zero, zero), (zero, np.eye(d) * P / d)]
    if two:
        starts.append((np.eye(d) * P / d, zero))
    else:
        starts = [(zero, Kv) for _, Kv in starts]
    vals = [_objective(dets, lam, Ku, Kv) for Ku, Kv in starts]
    order = np.argsort(vals)[::-1][:2]
    best_val, best = vals[order[0]], starts[order[0]]

    for i in order:
        Ku0, Kv0 = starts[i]
        x0 = _to_factors(Ku0, Kv0, P, two)
        # keep the start away from the zero-factor saddle
        x0 = x0 + 1e-6 * np.random.default_rng(seed + int(i)).standard_normal(x0.size)
        res = minimize(_value_and_grad, x0, args=(dets, lam, d, P, two), jac=True,
                       method="L-BFGS-B",
                       options={"maxiter": maxiter, "ftol": 1e-15, "gtol": 1e-11})
        Ku, Kv = _from_factors(res.x, d, P, two)
        v = _objective(dets, lam, Ku, Kv)
        if v > best_val:
            best_val, best = v, (Ku, Kv)
    Ku, Kv = best
    if not two:
        Ku = zero
    A, B = dets.corners(Ku, Kv)
    c, kind = (A, "A") if two else (B, "B")
    return BoundaryPoint(lam, float(c[0]), float(c[1]), float(c[0] - lam * c[1]), kind, Ku, Kv)


def vector_region(spec: GaussianVectorSpec, seed: int = 0, samples: int = 2000,
                  refine_iters: int = 200, budget_steps: int = 64,
                  max_dim: int = MAX_DIM, gap_tol: float = 1e-10) -> RegionFrontier:
    """Sampled and lambda-refined Gaussian vector region."""
    if spec.d > max_dim:
        raise GuardError(f"dimension {spec.d} exceeds the limit {max_dim}")
    if spec.P == 0:
        pts = np.zeros((1, 2))
        return frontier_from_points(pts, (np.zeros(budget_steps),))
    rng = np.random.default_rng(seed)
    dets = _Dets(spec)
    pairs = sample_pairs(spec, samples, rng)
    pts = [(0.0, 0.0)]
    for Ku, Kv in pairs:
        A, B = dets.corners(Ku, Kv)
        pts += [A, B]
    pts = np.array(pts)
    # endpoint with the largest rate
    top = lambda_boundary(spec, 1e-9, starts=pairs[:64], seed=seed)
    pts = np.vstack([pts, [[top.R, top.Rd]]])
    tried: set = set()
    evals = 0
    while evals < refine_iters:
        # split the longest untried hull edge first: its chord gap is largest
        dv, Rv = upper_envelope_2d(pts[:, 1], pts[:, 0])
        edges = []
        for k in range(len(dv) - 1):
            lam = (Rv[k + 1] - Rv[k]) / (dv[k + 1] - dv[k])
            key = (round(float(dv[k]), 12), round(float(dv[k + 1]), 12))
            if lam > 0 and key not in tried:
                length = np.hypot(dv[k + 1] - dv[k], Rv[k + 1] - Rv[k])
                edges.append((-length, k, lam, key))
        if not edges:
            break
        edges.sort()
        _, k, lam, key = edges[0]
        tried.add(key)
        bp = lambda_boundary(spec, float(lam), starts=[], seed=seed + evals)
        evals += 1
        if bp.value > Rv[k] - lam * dv[k] + gap_tol:
            pts = np.vstack([pts, [[bp.R, bp.Rd]]])
    dmax = float(upper_envelope_2d(pts[:, 1], pts[:, 0])[0].max())
    front = frontier_from_points(pts, (np.linspace(0.0, dmax, budget_steps),))
    front.meta["lambda_evals"] = evals
    return front


class GaussianVectorRegion(_FrontierEstimator):
    """Vector Gaussian region for a channel given as ``gaussian d P`` with K1, K2."""

    def __init__(self, seed=0, samples=2000, refine_iters=200, budget_steps=64,
                 max_dim=MAX_DIM):
        self.seed = seed
        self.samples = samples
        self.refine_iters = refine_iters
        self.budget_steps = budget_steps
        self.max_dim = max_dim

    def fit(self, channel, y=None):
        spec = channel if isinstance(channel, GaussianVectorSpec) \
            else GaussianVectorSpec.from_channel(channel)
        self.spec_ = spec
        self.frontier_ = vector_region(spec, self.seed, self.samples, self.refine_iters,
                                       self.budget_steps, self.max_dim)
        return self
