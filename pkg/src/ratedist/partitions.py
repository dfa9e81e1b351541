"""Set partitions of a finite ground set, seen as deterministic functions.

A partition is stored as a label tuple in first-appearance form: symbol 0
has label 0 and each new block gets the next unused label.
"""

from __future__ import annotations

from collections import deque
from collections.abc import Iterator, Sequence


def canonical(labels: Sequence) -> tuple[int, ...]:
    seen: dict = {}
    out = []
    for lab in labels:
        if lab not in seen:
            seen[lab] = len(seen)
        out.append(seen[lab])
    return tuple(out)


class SetPartition:
    """Partition of ``{0, ..., n-1}`` given by one block label per symbol."""

    __slots__ = ("labels",)

    def __init__(self, labels: Sequence):
        labels = [int(v) if hasattr(v, "__index__") else v for v in labels]
        if not labels:
            raise ValueError("a partition needs a nonempty ground set")
        object.__setattr__(self, "labels", canonical(labels))

    def __setattr__(self, name, value):
        raise AttributeError("SetPartition is immutable")

    def __eq__(self, other):
        return isinstance(other, SetPartition) and self.labels == other.labels

    def __hash__(self):
        return hash(self.labels)

    def __repr__(self):
        return f"SetPartition({self.labels})"

    def __len__(self):
        return len(self.labels)

    @property
    def n_blocks(self) -> int:
        return max(self.labels) + 1

    def blocks(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.n_blocks)]
        for x, lab in enumerate(self.labels):
            out[lab].append(x)
        return out

    @classmethod
    def identity(cls, n: int) -> SetPartition:
        return cls(range(n))

    @classmethod
    def single(cls, n: int) -> SetPartition:
        return cls([0] * n)


def _coerce(f) -> SetPartition:
    return f if isinstance(f, SetPartition) else SetPartition(f)


def _pair(f, g) -> tuple[SetPartition, SetPartition]:
    f, g = _coerce(f), _coerce(g)
    if len(f) != len(g):
        raise ValueError(f"ground sets differ: {len(f)} vs {len(g)} symbols")
    return f, g


def refines(f, g) -> bool:
    """True when every block of ``f`` sits inside one block of ``g``."""
    f, g = _pair(f, g)
    image: dict[int, int] = {}
    for a, b in zip(f.labels, g.labels):
        if image.setdefault(a, b) != b:
            return False
    return True


def meet(f, g) -> SetPartition:
    """Common refinement: blocks are nonempty intersections of f- and g-blocks."""
    f, g = _pair(f, g)
    return SetPartition(list(zip(f.labels, g.labels)))


def join(f, g) -> SetPartition:
    """Finest partition that both ``f`` and ``g`` refine (their common part).

    Blocks are the connected components of the bipartite graph linking an
    f-block to a g-block whenever they share a symbol.
    """
    f, g = _pair(f, g)
    nf = f.n_blocks
    adj: list[set[int]] = [set() for _ in range(nf + g.n_blocks)]
    for a, b in zip(f.labels, g.labels):
        adj[a].add(nf + b)
        adj[nf + b].add(a)
    comp = [-1] * len(adj)
    for start in range(len(adj)):
        if comp[start] >= 0:
            continue
        comp[start] = start
        queue = deque([start])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if comp[w] < 0:
                    comp[w] = start
                    queue.append(w)
    return SetPartition([comp[a] for a in f.labels])


def all_partitions(n: int) -> Iterator[SetPartition]:
    """Every partition of ``n`` symbols, as restricted growth strings in order."""
    if n < 1:
        raise ValueError("n must be positive")

    def grow(prefix, top):
        if len(prefix) == n:
            yield SetPartition(prefix)
            return
        for lab in range(top + 2):
            yield from grow(prefix + [lab], max(top, lab))

    yield from grow([0], 0)
