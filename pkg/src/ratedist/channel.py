"""Discrete channels with one desired output and side outputs.

Text format, one statement per line, ``#`` starts a comment::

    alphabet X 4
    output Y det 0 1 1 2
    output Z stoch 2
    0.9 0.1
    ...                     # one row per input symbol
    joint                   # optional: full p(y, z1, ... | x), one row per x
    ...

The first output is the desired receiver Y, the rest are side receivers.
A Gaussian channel is written ``gaussian <d> <P>`` followed by ``K1`` and
``K2`` blocks of ``d`` rows each.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .info import SUM_TOL, JointPmf
from .partitions import SetPartition


class ChannelFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Output:
    name: str
    table: np.ndarray          # (n_x, size) row-stochastic
    det_map: tuple | None      # symbol per input when deterministic

    @property
    def size(self) -> int:
        return self.table.shape[1]

    @property
    def deterministic(self) -> bool:
        return self.det_map is not None


def _det_of(table: np.ndarray):
    if np.all((table == 0) | (table == 1)):
        return tuple(int(i) for i in table.argmax(axis=1))
    return None


def _check_rows(table: np.ndarray, what: str):
    if np.any(table < 0):
        raise ChannelFormatError(f"{what}: negative probability")
    bad = np.abs(table.sum(axis=1) - 1.0) > SUM_TOL
    if np.any(bad):
        row = int(np.argmax(bad))
        raise ChannelFormatError(
            f"{what}: row {row} sums to {table[row].sum()!r}, not 1")


@dataclass(frozen=True)
class ChannelSpec:
    """Input alphabet size, ordered outputs (Y first), optional joint table."""

    n_inputs: int
    outputs: tuple[Output, ...]
    joint_table: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.n_inputs < 1:
            raise ChannelFormatError("input alphabet must be nonempty")
        if not self.outputs:
            raise ChannelFormatError("channel needs at least one output")
        names = [o.name for o in self.outputs]
        if len(set(names)) != len(names) or "X" in names:
            raise ChannelFormatError(f"output names must be distinct and not 'X': {names}")
        for o in self.outputs:
            if o.table.shape[0] != self.n_inputs:
                raise ChannelFormatError(f"output {o.name}: wrong number of rows")
            _check_rows(o.table, f"output {o.name}")
            o.table.setflags(write=False)
        if self.joint_table is not None:
            shape = (self.n_inputs, *(o.size for o in self.outputs))
            if self.joint_table.shape != shape:
                raise ChannelFormatError(f"joint table shape {self.joint_table.shape} != {shape}")
            _check_rows(self.joint_table.reshape(self.n_inputs, -1), "joint")
            self.joint_table.setflags(write=False)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(o.name for o in self.outputs)

    @property
    def K(self) -> int:
        return len(self.outputs) - 1

    @property
    def deterministic(self) -> bool:
        return all(o.deterministic for o in self.outputs)

    def output(self, which) -> Output:
        if isinstance(which, int):
            return self.outputs[which]
        for o in self.outputs:
            if o.name == which:
                return o
        raise KeyError(f"no output named {which!r}")

    def maps(self) -> list[np.ndarray]:
        """Deterministic maps of all outputs as integer arrays."""
        if not self.deterministic:
            raise ValueError("channel has stochastic outputs")
        return [np.array(o.det_map, dtype=np.int64) for o in self.outputs]

    def conditional(self) -> np.ndarray:
        """p(y, z1, ... | x) with the input on axis 0."""
        if self.joint_table is not None:
            return np.asarray(self.joint_table)
        cond = np.ones((self.n_inputs,))
        for o in self.outputs:
            cond = cond[..., None] * o.table.reshape(
                (self.n_inputs,) + (1,) * (cond.ndim - 1) + (o.size,))
        return cond


def deterministic_channel(n_inputs: int, maps: dict) -> ChannelSpec:
    """Channel whose outputs are the given maps ``name -> tuple of symbols``."""
    outs = []
    for name, f in maps.items():
        f = [int(v) for v in f]
        if len(f) != n_inputs:
            raise ChannelFormatError(f"output {name}: map has {len(f)} entries, need {n_inputs}")
        if min(f) < 0:
            raise ChannelFormatError(f"output {name}: negative symbol")
        table = np.zeros((n_inputs, max(f) + 1))
        table[np.arange(n_inputs), f] = 1.0
        outs.append(Output(name, table, tuple(f)))
    return ChannelSpec(n_inputs, tuple(outs))


def random_deterministic_channel(rng: np.random.Generator, n_inputs: int,
                                 n_side: int = 1, max_size: int | None = None) -> ChannelSpec:
    max_size = max_size or n_inputs
    names = ["Y"] + ([f"Z{j + 1}" for j in range(n_side)] if n_side > 1 else ["Z"])
    maps = {}
    for name in names:
        k = int(rng.integers(1, max_size + 1))
        maps[name] = tuple(int(v) for v in rng.integers(0, k, size=n_inputs))
    return deterministic_channel(n_inputs, maps)


def output_partition(ch: ChannelSpec, which) -> SetPartition:
    o = ch.output(which)
    if not o.deterministic:
        raise ValueError(f"output {o.name} is stochastic")
    return SetPartition(o.det_map)


def induced_joint(ch: ChannelSpec, inp: JointPmf, x_axis: str = "X") -> JointPmf:
    """Compose ``inp`` (aux axes and X, X last or anywhere) with the channel.

    The result has the input's axes in order followed by the outputs.
    """
    if not isinstance(inp, JointPmf):
        arr = np.asarray(inp, dtype=float)
        inp = JointPmf(arr, ["X"] if arr.ndim == 1 else
                       [f"U{i}" for i in range(arr.ndim - 1)] + ["X"])
    ax = inp.axis(x_axis)
    if inp.shape[ax] != ch.n_inputs:
        raise ValueError(f"input axis {x_axis} has {inp.shape[ax]} symbols, "
                         f"channel expects {ch.n_inputs}")
    clash = set(inp.names) & set(ch.names)
    if clash:
        raise ValueError(f"input axes clash with output names {sorted(clash)}")
    cond = ch.conditional()
    m = np.moveaxis(inp.mass, ax, -1)
    k = len(ch.outputs)
    full = m.reshape(m.shape + (1,) * k) * cond.reshape((1,) * (m.ndim - 1) + cond.shape)
    full = np.moveaxis(full, m.ndim - 1, ax)
    return JointPmf(full, inp.names + ch.names)


# parsing

def _frac(tok: str, lineno: int) -> Fraction:
    try:
        return Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise ChannelFormatError(f"line {lineno}: bad number {tok!r}") from None


def _int(tok: str, lineno: int) -> int:
    try:
        v = int(tok)
    except ValueError:
        raise ChannelFormatError(f"line {lineno}: expected an integer, got {tok!r}") from None
    return v


def _rows(lines, i, count, width, what):
    rows = []
    for r in range(count):
        if i >= len(lines):
            raise ChannelFormatError(f"{what}: expected {count} rows, file ended")
        lineno, toks = lines[i]
        if len(toks) != width:
            raise ChannelFormatError(
                f"line {lineno}: {what} row needs {width} entries, got {len(toks)}")
        rows.append([_frac(t, lineno) for t in toks])
        i += 1
    return rows, i


def _stoch_table(rows, what, lineno):
    for r, row in enumerate(rows):
        if any(v < 0 for v in row):
            raise ChannelFormatError(f"line {lineno}: {what} row {r} has negative entries")
        if abs(float(sum(row) - 1)) > SUM_TOL:
            raise ChannelFormatError(
                f"line {lineno}: {what} row {r} sums to {float(sum(row))!r}, not 1")
    return np.array([[float(v) for v in row] for row in rows])


@dataclass(frozen=True)
class GaussianChannel:
    d: int
    P: float
    K1: np.ndarray
    K2: np.ndarray


def _tokenize(text: str):
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].split()
        if body:
            lines.append((lineno, body))
    return lines


def parse_channel(text: str):
    """Parse a channel document into a ChannelSpec or GaussianChannel."""
    lines = _tokenize(text)
    if not lines:
        raise ChannelFormatError("empty channel document")
    if lines[0][1][0] == "gaussian":
        return _parse_gaussian(lines)
    n = None
    outs: list[Output] = []
    joint = None
    i = 0
    while i < len(lines):
        lineno, toks = lines[i]
        i += 1
        kw = toks[0]
        if kw == "alphabet":
            if len(toks) != 3 or toks[1] != "X":
                raise ChannelFormatError(f"line {lineno}: expected 'alphabet X <n>'")
            n = _int(toks[2], lineno)
            if n < 1:
                raise ChannelFormatError(f"line {lineno}: alphabet size must be positive")
        elif kw == "output":
            if n is None:
                raise ChannelFormatError(f"line {lineno}: 'output' before 'alphabet'")
            if len(toks) < 3:
                raise ChannelFormatError(f"line {lineno}: expected 'output <name> det|stoch ...'")
            name, kind = toks[1], toks[2]
            if kind == "det":
                vals = [_int(t, lineno) for t in toks[3:]]
                if len(vals) != n:
                    raise ChannelFormatError(
                        f"line {lineno}: det map needs {n} symbols, got {len(vals)}")
                if min(vals) < 0:
                    raise ChannelFormatError(f"line {lineno}: symbol index out of range")
                table = np.zeros((n, max(vals) + 1))
                table[np.arange(n), vals] = 1.0
                outs.append(Output(name, table, tuple(vals)))
            elif kind == "stoch":
                if len(toks) != 4:
                    raise ChannelFormatError(f"line {lineno}: expected 'output <name> stoch <m>'")
                m = _int(toks[3], lineno)
                if m < 1:
                    raise ChannelFormatError(f"line {lineno}: output size must be positive")
                rows, i = _rows(lines, i, n, m, f"output {name}")
                table = _stoch_table(rows, f"output {name}", lineno)
                outs.append(Output(name, table, _det_of(table)))
            else:
                raise ChannelFormatError(f"line {lineno}: unknown output kind {kind!r}")
        elif kw == "joint":
            if not outs:
                raise ChannelFormatError(f"line {lineno}: 'joint' before any output")
            sizes = [o.size for o in outs]
            rows, i = _rows(lines, i, n, math.prod(sizes), "joint")
            joint = _stoch_table(rows, "joint", lineno).reshape((n, *sizes))
        else:
            raise ChannelFormatError(f"line {lineno}: unknown statement {kw!r}")
    if n is None or not outs:
        raise ChannelFormatError("document needs an alphabet and at least one output")
    if joint is not None:
        # marginals of the joint table override the per-output tables
        fixed = []
        for k, o in enumerate(outs):
            drop = tuple(a for a in range(1, len(outs) + 1) if a != k + 1)
            marg = joint.sum(axis=drop)
            if not np.allclose(marg, o.table, atol=1e-12):
                raise ChannelFormatError(f"joint table disagrees with output {o.name}")
            fixed.append(Output(o.name, marg, _det_of(marg)))
        outs = fixed
    return ChannelSpec(n, tuple(outs), joint)


def _parse_gaussian(lines) -> GaussianChannel:
    lineno, toks = lines[0]
    if len(toks) != 3:
        raise ChannelFormatError(f"line {lineno}: expected 'gaussian <d> <P>'")
    d = _int(toks[1], lineno)
    P = float(_frac(toks[2], lineno))
    if d < 1 or P < 0:
        raise ChannelFormatError(f"line {lineno}: need d >= 1 and P >= 0")
    mats = {}
    i = 1
    while i < len(lines):
        lineno, toks = lines[i]
        i += 1
        if toks[0] not in ("K1", "K2") or len(toks) != 1:
            raise ChannelFormatError(f"line {lineno}: expected 'K1' or 'K2'")
        rows, i = _rows(lines, i, d, d, toks[0])
        mats[toks[0]] = np.array([[float(v) for v in r] for r in rows])
    if set(mats) != {"K1", "K2"}:
        raise ChannelFormatError("gaussian channel needs K1 and K2 blocks")
    return GaussianChannel(d, P, mats["K1"], mats["K2"])


def read_channel(path):
    with open(path, encoding="utf-8") as fh:
        return parse_channel(fh.read())


def format_channel(ch: ChannelSpec) -> str:
    """Inverse of parse_channel for channels without a joint table."""
    out = [f"alphabet X {ch.n_inputs}"]
    for o in ch.outputs:
        if o.deterministic:
            out.append(f"output {o.name} det " + " ".join(map(str, o.det_map)))
        else:
            out.append(f"output {o.name} stoch {o.size}")
            out.extend(" ".join(repr(float(v)) for v in row) for row in o.table)
    return "\n".join(out) + "\n"
