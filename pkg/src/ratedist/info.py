"""Finite joint pmfs, entropies in bits, and simplex grids."""

from __future__ import annotations

import itertools
import math
from collections.abc import Iterable, Iterator

import numpy as np

SUM_TOL = 1e-12
ZERO_MASS = 1e-15


class InvalidPmfError(ValueError):
    pass


def _as_names(axes) -> tuple[str, ...]:
    if axes is None:
        return ()
    if isinstance(axes, str):
        return (axes,)
    return tuple(axes)


class JointPmf:
    """Probability mass over a product of named finite alphabets.

    ``mass`` has one array axis per name, in order. The array is copied and
    frozen, so instances are safe to share.
    """

    def __init__(self, mass, names: Iterable[str]):
        mass = np.array(mass, dtype=float)
        names = tuple(names)
        if mass.ndim != len(names):
            raise InvalidPmfError(
                f"mass has {mass.ndim} axes but {len(names)} names were given")
        if len(set(names)) != len(names):
            raise InvalidPmfError(f"duplicate axis names in {names}")
        if np.any(mass < 0) or not np.all(np.isfinite(mass)):
            raise InvalidPmfError("pmf has negative or non-finite mass")
        total = mass.sum()
        if abs(total - 1.0) > SUM_TOL:
            raise InvalidPmfError(f"pmf sums to {total!r}, not 1")
        mass.setflags(write=False)
        self.mass = mass
        self.names = names

    def __repr__(self):
        dims = ", ".join(f"{n}:{s}" for n, s in zip(self.names, self.mass.shape))
        return f"JointPmf({dims})"

    @property
    def shape(self) -> tuple[int, ...]:
        return self.mass.shape

    def size(self, name: str) -> int:
        return self.mass.shape[self.axis(name)]

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no axis named {name!r} in {self.names}") from None

    def marginal(self, names) -> JointPmf:
        """Marginal over ``names``, axes kept in the requested order."""
        names = _as_names(names)
        idx = [self.axis(n) for n in names]
        drop = tuple(i for i in range(self.mass.ndim) if i not in idx)
        m = self.mass.sum(axis=drop)
        kept = [i for i in range(self.mass.ndim) if i in idx]
        order = [kept.index(i) for i in idx]
        return JointPmf(np.transpose(m, order) if m.ndim else m, names)

    def rename(self, mapping: dict) -> JointPmf:
        return JointPmf(self.mass, [mapping.get(n, n) for n in self.names])

    @classmethod
    def from_function(cls, pmf, name: str, funcs: dict) -> JointPmf:
        """Joint of an input pmf with outputs that are deterministic maps of it."""
        pmf = np.asarray(pmf, dtype=float)
        sizes = [int(max(f)) + 1 for f in funcs.values()]
        mass = np.zeros((len(pmf), *sizes))
        for x, px in enumerate(pmf):
            mass[(x, *(int(f[x]) for f in funcs.values()))] = px
        return cls(mass, (name, *funcs))


def _h(p) -> float:
    p = np.asarray(p, dtype=float).ravel()
    p = p[p > ZERO_MASS]
    return float(-(p * np.log2(p)).sum())


def _validate(p) -> JointPmf:
    if isinstance(p, JointPmf):
        return p
    arr = np.asarray(p, dtype=float)
    return JointPmf(arr, [f"A{i}" for i in range(arr.ndim)])


def entropy(p, axes=None) -> float:
    """Shannon entropy in bits of ``p`` (or of its marginal on ``axes``)."""
    p = _validate(p)
    if axes is None:
        return _h(p.mass)
    names = _as_names(axes)
    if not names:
        return 0.0
    return _h(p.marginal(names).mass)


def _check_disjoint(*sets):
    for a, b in itertools.combinations(sets, 2):
        common = set(a) & set(b)
        if common:
            raise ValueError(f"axis sets overlap on {sorted(common)}")


def cond_entropy(p: JointPmf, A, C=()) -> float:
    """H(A | C) in bits."""
    A, C = _as_names(A), _as_names(C)
    _check_disjoint(A, C)
    return max(entropy(p, A + C) - entropy(p, C), 0.0)


def cond_mutual_info(p: JointPmf, A, B, C=()) -> float:
    """I(A; B | C) in bits.

    Identical ``A`` and ``B`` give the conditional entropy H(A | C); any other
    overlap between the three axis sets is rejected.
    """
    A, B, C = _as_names(A), _as_names(B), _as_names(C)
    if set(A) == set(B) and A:
        return cond_entropy(p, A, C)
    _check_disjoint(A, B, C)
    value = (entropy(p, A + C) + entropy(p, B + C)
             - entropy(p, A + B + C) - entropy(p, C))
    return max(value, 0.0)


def mutual_info(p: JointPmf, A, B) -> float:
    return cond_mutual_info(p, A, B, ())


# grids

def _compositions(k: int, m: int) -> Iterator[tuple[int, ...]]:
    if k == 1:
        yield (m,)
        return
    for first in range(m + 1):
        for rest in _compositions(k - 1, m - first):
            yield (first, *rest)


def simplex_lattice(k: int, m: int) -> np.ndarray:
    """All compositions of ``m`` into ``k`` parts, lexicographic, as integer rows."""
    if k < 1 or m < 1:
        raise ValueError("need k >= 1 and m >= 1")
    # stars and bars; combinations come out in an order that reverses lex order
    bars = np.array(list(itertools.combinations(range(m + k - 1), k - 1)), dtype=np.int64)
    if k == 1:
        return np.array([[m]], dtype=np.int64)
    edges = np.hstack([np.full((len(bars), 1), -1), bars,
                       np.full((len(bars), 1), m + k - 1)])
    comps = np.diff(edges, axis=1) - 1
    order = np.lexsort(comps.T[::-1])
    return comps[order]


def simplex_grid(k: int, m: int) -> Iterator[np.ndarray]:
    """Yield every pmf on ``k`` cells whose masses are multiples of ``1/m``.

    There are C(m+k-1, k-1) of them, produced in lexicographic order.
    """
    if k < 1 or m < 1:
        raise ValueError("need k >= 1 and m >= 1")
    for comp in _compositions(k, m):
        yield np.array(comp, dtype=float) / m


def rational_lattice(k: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    """Every pmf on ``k`` cells with rational masses of denominator at most ``m``.

    Returns ``(counts, denominators)`` with each point listed once, in its
    lowest terms, ordered by denominator and then lexicographically.
    """
    counts, dens = [], []
    for j in range(1, m + 1):
        comps = simplex_lattice(k, j)
        g = np.gcd.reduce(comps, axis=1)
        prim = comps[g == 1]
        counts.append(prim)
        dens.append(np.full(len(prim), j, dtype=np.int64))
    return np.vstack(counts), np.concatenate(dens)


def rational_grid(k: int, m: int) -> np.ndarray:
    counts, dens = rational_lattice(k, m)
    return counts / dens[:, None]


def grid_size(k: int, m: int) -> int:
    return math.comb(m + k - 1, k - 1)


# batched helpers used by the region sweeps

def entropy_rows(P: np.ndarray) -> np.ndarray:
    """Row-wise entropy in bits of a (batch, cells) array."""
    P = np.asarray(P, dtype=float)
    safe = np.where(P > ZERO_MASS, P, 1.0)
    return -(np.where(P > ZERO_MASS, P * np.log2(safe), 0.0)).sum(axis=-1)


def grouped_entropy(P: np.ndarray, codes: np.ndarray) -> np.ndarray:
    """Entropy of a function of the cells: ``codes[c]`` labels cell ``c``.

    ``P`` is (batch, cells). Cells sharing a code are pooled before the
    entropy is taken.
    """
    codes = np.asarray(codes).ravel()
    _, inv = np.unique(codes, return_inverse=True)
    onehot = np.zeros((codes.size, inv.max() + 1))
    onehot[np.arange(codes.size), inv] = 1.0
    return entropy_rows(P @ onehot)
