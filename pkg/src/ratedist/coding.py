"""Random-coding checks: superposition and Marton codebooks, collisions.

Typicality is the strong (letter-frequency) kind: a tuple of sequences is
eps-typical for p when every cell count N(c) obeys |N(c)/n - p(c)| <= eps p(c),
so cells of probability zero never occur.

Codebooks of 2**(nR) words are usually far too large to store.  ``sim_1dc``
therefore draws the cloud centres and the transmitted word explicitly and
accounts for the remaining satellites through the exact probability that one
independent satellite is jointly typical with the received word.  That
probability factors over the (u, y) position classes into multinomial box
probabilities, computed by a small log-domain convolution.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaln, logsumexp
from scipy.stats import binom, binomtest

from .channel import ChannelSpec
from .errors import GuardError
from .info import JointPmf, cond_mutual_info, mutual_info

MAX_N = 512
MAX_ALPHABET = 4
MAX_CLOUDS = 1 << 14
MAX_EXPLICIT = 1 << 16
MAX_PAIR_CELLS = 1 << 26
MAX_X_CELLS = 1 << 24
MAX_LOG_WORDS = 1000.0
DELTA = 0.05
Z95 = 1.959963984540054


# -- reports -----------------------------------------------------------------

@dataclass(frozen=True)
class SimRow:
    statistic: str
    estimate: float
    ci_low: float
    ci_high: float
    predicted_bound: float = math.nan


@dataclass
class SimReport:
    """Named estimates with 95% intervals and, where one exists, a prediction."""

    trials: int
    rows: list = field(default_factory=list)
    config: dict = field(default_factory=dict)

    COLUMNS = ("statistic", "estimate", "ci_low", "ci_high", "predicted_bound")

    def __getitem__(self, name) -> SimRow:
        for r in self.rows:
            if r.statistic == name:
                return r
        raise KeyError(name)

    def names(self):
        return [r.statistic for r in self.rows]

    def to_csv(self) -> str:
        lines = [",".join(self.COLUMNS)]
        for r in self.rows:
            nums = (r.estimate, r.ci_low, r.ci_high, r.predicted_bound)
            lines.append(",".join([r.statistic] + [_fmt(v) for v in nums]))
        return "\n".join(lines) + "\n"


def _fmt(v: float) -> str:
    return "nan" if math.isnan(v) else f"{v:.9f}"


def _prop_row(name, k, trials, bound=math.nan) -> SimRow:
    ci = binomtest(int(k), int(trials)).proportion_ci(0.95, method="exact")
    return SimRow(name, k / trials, float(ci.low), float(ci.high), bound)


def _mean_row(name, values, bound=math.nan) -> SimRow:
    v = np.asarray(values, dtype=float)
    m = float(v.mean())
    half = Z95 * float(v.std(ddof=1)) / math.sqrt(len(v)) if len(v) > 1 else 0.0
    return SimRow(name, m, m - half, m + half, bound)


def _fixed_row(name, value, bound=math.nan) -> SimRow:
    return SimRow(name, float(value), float(value), float(value), bound)


# -- birthday and independence -------------------------------------------------

def birthday_bound(m: int, p: float) -> tuple[float, float]:
    """P(K >= 2) for K ~ Binomial(m, p), and the cruder bound m^2 p^2."""
    if int(m) != m or m < 1:
        raise ValueError("row size m must be a positive integer")
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    exact = float(binom.sf(1, int(m), p)) if m >= 2 else 0.0
    return min(max(exact, 0.0), 1.0), float((m * p) ** 2)


def birthday_formula(m: int, p: float) -> float:
    """The same probability written as 1 - (1 - p + mp)(1 - p)**(m - 1)."""
    return 1.0 - (1.0 - p + m * p) * (1.0 - p) ** (m - 1)


def birthday_mc(m: int, p: float, trials: int, seed=0) -> tuple[float, float]:
    """Monte Carlo estimate of P(K >= 2) and its standard error."""
    rng = np.random.default_rng(seed)
    hits = rng.binomial(m, p, size=trials) >= 2
    est = float(hits.mean())
    return est, math.sqrt(max(est * (1 - est), 1e-300) / trials)


def independence_oracle(pA, subset, n: int, s: int) -> float:
    """Max |p(y,z) - p(y)p(z)| for Y = A_I, Z = A_J by exhaustive enumeration.

    A^n is i.i.d. pA conditioned on some letter falling in ``subset``; I is
    uniform over the positions holding such a letter and J = (I + s) mod n.
    """
    pA = np.asarray(pA, dtype=float)
    k = pA.size
    if k > 3 or n > 7:
        raise GuardError(f"enumeration limited to |A| <= 3 and n <= 7, got {k}, {n}")
    if np.any(pA < 0) or abs(pA.sum() - 1) > 1e-12:
        raise ValueError("pA must be a pmf")
    sub = sorted(set(int(a) for a in subset))
    if not sub or sub[0] < 0 or sub[-1] >= k:
        raise ValueError("subset must be a nonempty subset of the alphabet")
    if not 1 <= s <= n - 1:
        raise ValueError("shift s must satisfy 1 <= s <= n-1")

    seqs = np.array(list(itertools.product(range(k), repeat=n)), dtype=np.int64)
    w = np.prod(pA[seqs], axis=1)
    hit = np.isin(seqs, sub)
    cnt = hit.sum(axis=1)
    ok = cnt > 0
    if w[ok].sum() <= 0:
        raise ValueError("the conditioning event has probability zero")
    seqs, hit, cnt, w = seqs[ok], hit[ok], cnt[ok], w[ok] / w[ok].sum()

    weight = (w / cnt)[:, None] * hit
    shifted = np.roll(seqs, -s, axis=1)       # shifted[:, i] = seqs[:, (i+s) % n]
    joint = np.zeros((k, k))
    np.add.at(joint, (seqs.ravel(), shifted.ravel()), weight.ravel())
    dev = joint - np.outer(joint.sum(axis=1), joint.sum(axis=0))
    return float(np.abs(dev).max())


# -- typicality ------------------------------------------------------------------

def cell_bounds(n: int, p, eps: float):
    """Integer count limits [lo, hi] per cell for eps-typicality at length n."""
    p = np.asarray(p, dtype=float)
    lo = np.maximum(np.ceil(n * p * (1 - eps) - 1e-9), 0).astype(np.int64)
    hi = np.floor(n * p * (1 + eps) + 1e-9).astype(np.int64)
    return lo, hi


def is_typical(counts, p, eps: float) -> np.ndarray:
    """Row-wise test of cell-count vectors against the pmf ``p`` (flattened)."""
    counts = np.atleast_2d(counts)
    p = np.ravel(p)
    n = int(counts[0].sum())
    lo, hi = cell_bounds(n, p, eps)
    return np.all((counts >= lo) & (counts <= hi), axis=1)


def _cell_counts(codes: np.ndarray, n_cells: int) -> np.ndarray:
    """Counts of each code along the last axis; leading axes are kept."""
    lead = codes.shape[:-1]
    flat = codes.reshape(-1, codes.shape[-1])
    off = flat + n_cells * np.arange(flat.shape[0])[:, None]
    out = np.bincount(off.ravel(), minlength=n_cells * flat.shape[0])
    return out.reshape(lead + (n_cells,))


def _box_logprob(N: int, probs, lo, hi) -> float:
    """log P(lo <= counts <= hi) for counts ~ Multinomial(N, probs)."""
    if N == 0:
        return 0.0 if np.all(lo <= 0) else -math.inf
    if lo.sum() > N or np.minimum(hi, N).sum() < N:
        return -math.inf
    ks = np.arange(N + 1)
    f = np.full(N + 1, -math.inf)
    f[0] = 0.0
    diff = ks[:, None] - ks[None, :]
    valid = diff >= 0
    for ps, a, b in zip(probs, lo, hi):
        if ps <= 0:
            if a > 0:
                return -math.inf
            continue
        b = min(int(b), N)
        if a > b:
            return -math.inf
        w = np.full(N + 1, -math.inf)
        seg = ks[a:b + 1]
        w[seg] = seg * math.log(ps) - gammaln(seg + 1)
        terms = np.where(valid, f[np.where(valid, diff, 0)] + w[None, :], -math.inf)
        f = logsumexp(terms, axis=1)
    return float(gammaln(N + 1) + f[N])


class _ClassBoxes:
    """Typicality of a fresh word drawn letterwise given a fixed class sequence.

    Cells are (class, symbol); the fresh word draws symbol s in class c with
    probability ``draw[c, s]`` and the joint pmf over cells is ``cells``.
    """

    def __init__(self, cells: np.ndarray, draw: np.ndarray, n: int, eps: float):
        self.cells = np.asarray(cells, dtype=float)
        self.draw = np.asarray(draw, dtype=float)
        self.lo, self.hi = cell_bounds(n, self.cells, eps)
        self._cache: dict = {}

    def logprob(self, class_counts) -> float:
        key = tuple(int(c) for c in class_counts)
        hit = self._cache.get(key)
        if hit is None:
            total = 0.0
            for c, N in enumerate(key):
                total += _box_logprob(N, self.draw[c], self.lo[c], self.hi[c])
                if total == -math.inf:
                    break
            self._cache[key] = hit = total
        return hit


def _log_none_of(logq: float, count: float) -> float:
    """log P(no success) over ``count`` independent tries of probability e^logq."""
    if count <= 0 or logq == -math.inf:
        return 0.0
    if logq >= 0:
        return -math.inf
    q = math.exp(logq)
    return count * math.log1p(-q) if q > 1e-12 else -count * q


# -- helpers -------------------------------------------------------------------

def word_count(n: int, rate: float) -> int:
    """floor(2**(n rate)) with a minimum of one word."""
    if rate < 0:
        raise ValueError("rates must be nonnegative")
    e = round(n * rate, 9)
    if e > 62:
        raise GuardError(f"2^{e:.3g} words cannot be stored")
    return max(1, int(math.floor(2.0 ** e)))


def _sample(rng: np.random.Generator, table: np.ndarray, given: np.ndarray) -> np.ndarray:
    """One draw from row ``table[g]`` for every entry g of ``given``."""
    cdf = np.cumsum(table, axis=1)
    u = rng.random(given.shape)
    idx = (u[..., None] > cdf[given]).sum(axis=-1)
    return np.minimum(idx, table.shape[1] - 1)


def _check_n(n: int):
    if n < 1:
        raise ValueError("block length must be positive")
    if n > MAX_N:
        raise GuardError(f"block length {n} exceeds {MAX_N}")


def _check_alphabets(*sizes):
    if max(sizes) > MAX_ALPHABET:
        raise GuardError(f"alphabet sizes {sizes} exceed {MAX_ALPHABET}")


def _trial_rng(seed, t: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(t,)))


def _map_trials(fn, args, trials: int, n_jobs: int):
    if n_jobs <= 1:
        return [fn(t, *args) for t in range(trials)]
    with ProcessPoolExecutor(max_workers=n_jobs) as ex:
        return list(ex.map(fn, range(trials), *[[a] * trials for a in args]))


# -- superposition coding for one disturbance constraint ------------------------

@dataclass(frozen=True)
class _Sup:
    pux: np.ndarray
    W: np.ndarray
    zmap: np.ndarray | None
    n: int
    M0: int
    logM1: float          # natural log of the satellite count per cloud
    eps: float
    method: str
    z_samples: int
    boxes: _ClassBoxes


def _sup_trial(t: int, cfg: _Sup, seed):
    rng = _trial_rng(seed, t)
    nU, nX = cfg.pux.shape
    nY = cfg.W.shape[1]
    pu = cfg.pux.sum(axis=1)
    px_u = cfg.pux / np.where(pu > 0, pu, 1)[:, None]
    cells = cfg.pux[:, :, None] * cfg.W[None, :, :]         # (u, x, y)
    n, M0 = cfg.n, cfg.M0
    M1 = math.exp(cfg.logM1)

    clouds = _sample(rng, pu[None, :], np.zeros((M0, n), dtype=np.int64))
    if cfg.method == "explicit":
        m1 = int(round(M1))
        sats = _sample(rng, px_u, np.broadcast_to(clouds[:, None, :], (M0, m1, n)))
        x = sats[0, 0]
    else:
        x = _sample(rng, px_u, clouds[0])
    y = _sample(rng, cfg.W, x)

    lo, hi = cell_bounds(n, cells.ravel(), cfg.eps)
    if cfg.method == "explicit":
        codes = (clouds[:, None, :] * nX + sats) * nY + y
        cnt = _cell_counts(codes, nU * nX * nY).reshape(M0 * m1, -1)
        typ = np.all((cnt >= lo) & (cnt <= hi), axis=1)
        err = (not typ[0]) or bool(typ[1:].any())
        perr = float(err)
        dist = math.nan
        if cfg.zmap is not None:
            z = cfg.zmap[sats].reshape(M0 * m1, n)
            dist = math.log2(len({w.tobytes() for w in z})) / n
        return err, perr, dist

    cnt = _cell_counts(((clouds[0] * nX + x) * nY + y)[None], nU * nX * nY)[0]
    true_typ = bool(np.all((cnt >= lo) & (cnt <= hi)))
    boxes = cfg.boxes
    classes = _cell_counts(clouds * nY + y[None], nU * nY)
    log_ok = 0.0
    uniq, inv = np.unique(classes, axis=0, return_inverse=True)
    inv = inv.ravel()
    mult = np.bincount(inv[1:], minlength=len(uniq))
    for j, row in enumerate(uniq):
        lq = boxes.logprob(row)
        tries = mult[j] * M1 + (M1 - 1 if inv[0] == j else 0)
        log_ok += _log_none_of(lq, tries)
    perr = 1.0 if not true_typ else -math.expm1(log_ok)
    err = bool(rng.random() < perr)
    dist = _distinct_z(rng, cfg, clouds, px_u) if cfg.zmap is not None else math.nan
    return err, perr, dist


def _distinct_z(rng, cfg: _Sup, clouds, px_u) -> float:
    """log2(expected distinct z-words over the whole codebook) / n.

    E[#distinct] = sum_z 1 - prod_m (1 - p(z | u(m)))**M1.  Drawing z from
    the cloud mixture and averaging the summand over the mixture density
    gives an unbiased estimate.
    """
    nZ = int(cfg.zmap.max()) + 1
    nU = px_u.shape[0]
    pz_u = np.zeros((nU, nZ))
    for xv, zv in enumerate(cfg.zmap):
        pz_u[:, zv] += px_u[:, xv]
    logpz = np.where(pz_u > 0, np.log(np.where(pz_u > 0, pz_u, 1.0)), -1e4)
    M0, n = clouds.shape
    pick = rng.integers(M0, size=cfg.z_samples)
    z = _sample(rng, pz_u, clouds[pick])                        # (S, n)
    onehot = np.zeros((M0, n * nU))
    onehot[np.repeat(np.arange(M0), n), (np.arange(n) * nU)[None, :].repeat(M0, 0).ravel()
           + clouds.ravel()] = 1.0
    table = logpz[:, z].transpose(1, 2, 0).reshape(cfg.z_samples, n * nU)
    L = onehot @ table.T                                        # (M0, S) log p(z_s | u_m)
    logM0 = math.log(M0)
    vals = []
    for col in L.T:
        top = float(col.max())
        if top + cfg.logM1 + logM0 < -30:
            vals.append(math.exp(cfg.logM1 + logM0))
            continue
        p = np.exp(col)
        M1 = math.exp(cfg.logM1)
        S = float(np.sum(np.where(p < 1, -M1 * np.log1p(-np.minimum(p, 1 - 1e-16)), math.inf)))
        mix = float(p.mean())
        vals.append(-math.expm1(-S) / mix)
    return math.log2(max(float(np.mean(vals)), 1.0)) / n


def _as_pux(pux) -> np.ndarray:
    if isinstance(pux, JointPmf):
        return np.asarray(pux.marginal(("U", "X")).mass, dtype=float)
    arr = np.atleast_2d(np.asarray(pux, dtype=float))
    if np.any(arr < 0) or abs(arr.sum() - 1) > 1e-12:
        raise ValueError("p(u, x) must be a pmf")
    return arr


def sim_1dc(ch: ChannelSpec, pux, n: int, R0: float, R1: float, eps: float,
            trials: int, seed=0, method: str = "lazy", delta: float = DELTA,
            z_samples: int = 64, n_jobs: int = 1) -> SimReport:
    """Superposition code over ``ch``: error rate and disturbance proxy.

    Cloud centres u^n(m0) ~ p(u), satellites x^n(m0, m1) ~ p(x|u); the
    decoder accepts the unique (m0, m1) whose (u, x, y) triple is typical.
    ``method="explicit"`` builds and decodes the whole codebook (small rates
    only); ``"lazy"`` handles satellites through exact typicality odds.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    if method not in ("lazy", "explicit"):
        raise ValueError(f"unknown method {method!r}")
    _check_n(n)
    pux = _as_pux(pux)
    if pux.shape[1] != ch.n_inputs:
        raise ValueError("p(u, x) does not match the channel input alphabet")
    W = np.asarray(ch.output(0).table, dtype=float)
    _check_alphabets(pux.shape[0], pux.shape[1], W.shape[1])
    if R0 < 0 or R1 < 0:
        raise ValueError("rates must be nonnegative")
    if n * max(R0, R1) > MAX_LOG_WORDS:
        raise GuardError("rates too large for floating point word counts")
    M0 = word_count(n, R0)
    if M0 > MAX_CLOUDS:
        raise GuardError(f"{M0} clouds exceed {MAX_CLOUDS}")
    logM1 = math.log(max(1.0, math.floor(2.0 ** round(n * R1, 9))))
    if method == "explicit" and M0 * math.exp(logM1) * n > MAX_EXPLICIT * 64:
        raise GuardError("codebook too large for explicit decoding")

    side = ch.output(1) if ch.K >= 1 else None
    zmap = np.array(side.det_map) if side is not None and side.deterministic else None
    pu = pux.sum(axis=1)
    px_u = pux / np.where(pu > 0, pu, 1)[:, None]
    nY = W.shape[1]
    boxes = _ClassBoxes((pux[:, :, None] * W[None]).transpose(0, 2, 1).reshape(-1, pux.shape[1]),
                        np.repeat(px_u, nY, axis=0), n, eps)
    cfg = _Sup(pux, W, zmap, n, M0, logM1, eps, method, z_samples, boxes)
    out = _map_trials(_sup_trial, (cfg, seed), trials, n_jobs)

    joint = JointPmf(pux[:, :, None] * W[None], ("U", "X", "Y"))
    ixy_u = cond_mutual_info(joint, ["X"], ["Y"], ["U"])
    ixy = mutual_info(joint, ["X"], ["Y"])
    errs = sum(o[0] for o in out)
    rows = [_prop_row("error_rate", errs, trials),
            _mean_row("error_prob_conditional", [o[1] for o in out]),
            _fixed_row("I(X;Y|U)", ixy_u), _fixed_row("I(X;Y)", ixy),
            _fixed_row("margin_private", ixy_u - delta - R1),
            _fixed_row("margin_total", ixy - delta - R0 - R1)]
    if zmap is not None:
        jz = JointPmf(pux[:, :, None] * np.asarray(side.table)[None], ("U", "X", "Z"))
        ixz_u = cond_mutual_info(jz, ["X"], ["Z"], ["U"])
        rows.append(_fixed_row("I(X;Z|U)", ixz_u))
        rows.append(_mean_row("disturbance", [o[2] for o in out], R0 + ixz_u + delta))
    config = dict(n=n, R0=R0, R1=R1, eps=eps, seed=seed, method=method, clouds=M0)
    return SimReport(trials, rows, config)


# -- Marton codebooks ----------------------------------------------------------------

@dataclass(frozen=True)
class MartonRates:
    R0: float
    R1: float
    R2: float
    R3: float
    Rt1: float
    Rt2: float

    def __post_init__(self):
        vals = (self.R0, self.R1, self.R2, self.R3, self.Rt1, self.Rt2)
        if min(vals) < 0:
            raise ValueError("rates must be nonnegative")
        if self.Rt1 < self.R1 or self.Rt2 < self.R2:
            raise ValueError("auxiliary rates must be at least R1 and R2")

    @property
    def r1(self) -> float:
        return self.Rt1 - self.R1

    @property
    def r2(self) -> float:
        return self.Rt2 - self.R2


@dataclass
class MartonCodebook:
    """All words of one Marton codebook, indices 0-based.

    ``bins1[m1]`` lists the satellite indices l1 in L1(m1) (likewise
    ``bins2``); ``typical[m0, l1, l2]`` marks pairs jointly typical with the
    cloud; ``selected[m0, m1, m2]`` is the chosen (l1, l2), which is (0, 0)
    when S(m0, m1, m2) is empty.  ``x[m0, m1, m2, m3]`` is the word sent for
    message (m0, m1, m2, m3).
    """

    n: int
    rates: MartonRates
    eps: float
    clouds: np.ndarray
    z1: np.ndarray
    z2: np.ndarray
    bins1: np.ndarray
    bins2: np.ndarray
    typical: np.ndarray
    s_size: np.ndarray
    selected: np.ndarray
    x: np.ndarray

    def s_set(self, m0: int, m1: int, m2: int) -> list[tuple[int, int]]:
        sub = self.typical[m0][np.ix_(self.bins1[m1], self.bins2[m2])]
        return [(int(self.bins1[m1][a]), int(self.bins2[m2][b])) for a, b in zip(*np.nonzero(sub))]


def _marton_joint(joint: JointPmf) -> np.ndarray:
    for name in ("U", "Z1", "Z2", "X"):
        joint.axis(name)
    return np.asarray(joint.marginal(("U", "Z1", "Z2", "X")).mass, dtype=float)


def _conditional(mass: np.ndarray, axis_from: int) -> np.ndarray:
    """p(rest | first ``axis_from`` axes) flattened to (prod(first), prod(rest))."""
    shape = mass.shape
    g = int(np.prod(shape[:axis_from]))
    m = mass.reshape(g, -1)
    tot = m.sum(axis=1, keepdims=True)
    out = np.where(tot > 0, m / np.where(tot > 0, tot, 1), 1.0 / m.shape[1])
    return out


def _pair_typical(u, z1, z2, cells, eps) -> np.ndarray:
    """typical[l1, l2] for one cloud u against all z1 and z2 words.

    The count of cell (u, a, b) over all pairs is one matrix product of the
    indicator rows [u_i = u, z1_i = a] and [z2_i = b].
    """
    nU, A1, A2 = cells.shape
    n = u.size
    lo, hi = cell_bounds(n, cells, eps)
    out = np.ones((z1.shape[0], z2.shape[0]), dtype=bool)
    ind2 = [(z2 == b).astype(np.float64) for b in range(A2)]
    for uv in range(nU):
        at_u = u == uv
        for a in range(A1):
            left = ((z1 == a) & at_u[None, :]).astype(np.float64)
            for b in range(A2):
                cnt = left @ ind2[b].T
                out &= (cnt >= lo[uv, a, b]) & (cnt <= hi[uv, a, b])
    return out


def gen_marton_codebook(joint: JointPmf, n: int, rates, eps: float, seed=0) -> MartonCodebook:
    """Marton codebook for p(u, z1, z2, x); draws use one child stream per stage.

    Stage order: clouds, z1 satellites, z2 satellites, x-words, selections.
    """
    _check_n(n)
    rates = rates if isinstance(rates, MartonRates) else (
        MartonRates(**rates) if isinstance(rates, dict) else MartonRates(*rates))
    mass = _marton_joint(joint)
    nU, A1, A2, nX = mass.shape
    _check_alphabets(nU, A1, A2, nX)

    M0, M1, M2, M3 = (word_count(n, r) for r in (rates.R0, rates.R1, rates.R2, rates.R3))
    B1, B2 = word_count(n, rates.r1), word_count(n, rates.r2)
    L1, L2 = M1 * B1, M2 * B2
    if M0 * L1 * L2 * n > MAX_PAIR_CELLS:
        raise GuardError(f"{M0}x{L1}x{L2} pair tests at n={n} exceed the budget")
    if M0 * M1 * M2 * M3 * n > MAX_X_CELLS:
        raise GuardError("too many x-words to store")

    streams = [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(5)]
    r_u, r_z1, r_z2, r_x, r_sel = streams
    pu = mass.sum(axis=(1, 2, 3))
    cells = mass.sum(axis=3)
    pz1_u = _conditional(mass.sum(axis=(2, 3)), 1)
    pz2_u = _conditional(mass.sum(axis=(1, 3)), 1)
    px_uzz = _conditional(mass, 3)

    clouds = _sample(r_u, pu[None, :], np.zeros((M0, n), dtype=np.int64))
    z1 = _sample(r_z1, pz1_u, np.broadcast_to(clouds[:, None, :], (M0, L1, n)))
    z2 = _sample(r_z2, pz2_u, np.broadcast_to(clouds[:, None, :], (M0, L2, n)))
    bins1 = np.arange(L1).reshape(M1, B1)
    bins2 = np.arange(L2).reshape(M2, B2)
    typical = np.stack([_pair_typical(clouds[m], z1[m], z2[m], cells, eps) for m in range(M0)])

    # the x-stream draws uniforms for every word up front, so its use does
    # not depend on which pairs end up selected
    ux = r_x.random((M0, M1, M2, M3, n))
    s_size = np.zeros((M0, M1, M2), dtype=np.int64)
    selected = np.zeros((M0, M1, M2, 2), dtype=np.int64)
    x = np.zeros((M0, M1, M2, M3, n), dtype=np.int64)
    cdf = np.cumsum(px_uzz, axis=1)
    for m0, m1, m2 in itertools.product(range(M0), range(M1), range(M2)):
        sub = typical[m0][np.ix_(bins1[m1], bins2[m2])]
        a, b = np.nonzero(sub)
        s_size[m0, m1, m2] = a.size
        if a.size:
            k = int(r_sel.integers(a.size))
            l1, l2 = int(bins1[m1][a[k]]), int(bins2[m2][b[k]])
            given = (clouds[m0] * A1 + z1[m0, l1]) * A2 + z2[m0, l2]
            idx = (ux[m0, m1, m2][..., None] > cdf[given][None]).sum(axis=-1)
            x[m0, m1, m2] = np.minimum(idx, nX - 1)
        else:
            l1 = l2 = 0
            x[m0, m1, m2] = np.minimum((ux[m0, m1, m2] * nX).astype(np.int64), nX - 1)
        selected[m0, m1, m2] = (l1, l2)
    return MartonCodebook(n, rates, eps, clouds, z1, z2, bins1, bins2,
                          typical, s_size, selected, x)


def _sset_trial(t: int, mass3, n, l, m, eps, seed, boxes):
    rng = _trial_rng(seed, t)
    nU, A1, A2 = mass3.shape
    pu = mass3.sum(axis=(1, 2))
    pz1_u = _conditional(mass3.sum(axis=2), 1)
    pz2_u = _conditional(mass3.sum(axis=1), 1)
    u = _sample(rng, pu[None, :], np.zeros(n, dtype=np.int64))
    z1 = _sample(rng, pz1_u, np.broadcast_to(u, (l, n)))
    z2 = _sample(rng, pz2_u, np.broadcast_to(u, (m, n)))
    typ = _pair_typical(u, z1, z2, mass3, eps)
    rows_hit = typ.sum(axis=1)
    cols_hit = typ.sum(axis=0)
    empty = not typ.any()
    collide = bool((rows_hit >= 2).any() or (cols_hit >= 2).any())

    # given a row word z1, the m column words are independent draws, so the
    # row holds Binomial(m, q(z1)) typical pairs; likewise for columns
    row_box, col_box = boxes
    q1 = [math.exp(row_box.logprob(c)) for c in _cell_counts(u[None] * A1 + z1, nU * A1)]
    q2 = [math.exp(col_box.logprob(c)) for c in _cell_counts(u[None] * A2 + z2, nU * A2)]
    bound = (binom.sf(1, m, q1).sum() if m >= 2 else 0.0) + (
        binom.sf(1, l, q2).sum() if l >= 2 else 0.0)
    return empty, collide, int(typ.sum()), min(float(bound), 1.0), float(np.mean(q1))


def sset_stats(joint: JointPmf, n: int, r1: float, r2: float, eps: float,
               trials: int, seed=0, delta: float = DELTA, n_jobs: int = 1) -> SimReport:
    """Emptiness and row/column collisions of S in one bin product.

    Each trial draws a cloud, 2^(n r1) z1-words and 2^(n r2) z2-words and
    tests every pair for joint typicality with the cloud.
    """
    if trials < 1:
        raise ValueError("trials must be positive")
    _check_n(n)
    for name in ("U", "Z1", "Z2"):
        joint.axis(name)
    mass3 = np.asarray(joint.marginal(("U", "Z1", "Z2")).mass, dtype=float)
    _check_alphabets(*mass3.shape)
    l, m = word_count(n, r1), word_count(n, r2)
    if l * m * n > MAX_PAIR_CELLS:
        raise GuardError(f"{l}x{m} pairs at n={n} exceed the budget")

    nU, A1, A2 = mass3.shape
    pz1_u = _conditional(mass3.sum(axis=2), 1)
    pz2_u = _conditional(mass3.sum(axis=1), 1)
    boxes = (_ClassBoxes(mass3.reshape(nU * A1, A2), np.repeat(pz2_u, A1, axis=0), n, eps),
             _ClassBoxes(mass3.transpose(0, 2, 1).reshape(nU * A2, A1),
                         np.repeat(pz1_u, A2, axis=0), n, eps))
    out = _map_trials(_sset_trial, (mass3, n, l, m, eps, seed, boxes), trials, n_jobs)
    I = cond_mutual_info(JointPmf(mass3, ("U", "Z1", "Z2")), ["Z1"], ["Z2"], ["U"])
    pbar = float(np.mean([o[4] for o in out]))
    scaling = 2.0 ** (n * (2 * r2 + r1 - 2 * I)) + 2.0 ** (n * (2 * r1 + r2 - 2 * I))
    rows = [
        _prop_row("s_empty", sum(o[0] for o in out), trials, math.exp(-l * m * pbar)),
        _prop_row("collision", sum(o[1] for o in out), trials,
                  float(np.mean([o[3] for o in out]))),
        _mean_row("s_size", [o[2] for o in out], l * m * pbar),
        _fixed_row("pair_typical_prob", pbar),
        _fixed_row("collision_union_paper", min(1.0, (l * m * m + m * l * l) * pbar ** 2)),
        _fixed_row("collision_scaling", scaling),
        _fixed_row("I(Z1;Z2|U)", I),
        _fixed_row("margin_cover", r1 + r2 - I - delta),
        _fixed_row("margin_rows", I - delta - r1 / 2 - r2),
        _fixed_row("margin_cols", I - delta - r1 - r2 / 2),
    ]
    return SimReport(trials, rows, dict(n=n, r1=r1, r2=r2, eps=eps, seed=seed, l=l, m=m))
