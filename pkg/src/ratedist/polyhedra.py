"""Exact linear inequality systems and Fourier-Motzkin projection.

Rows are closed inequalities ``a . x <= b`` with integer coefficient
vectors of gcd 1 and a rational bound, so every system has one canonical
form. Elimination tracks which input rows each derived row combines
(Chernikov's rule) to drop rows that are certainly redundant.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

DYADIC_BITS = 40


def dyadic(x: float, bits: int = DYADIC_BITS) -> Fraction:
    """Nearest multiple of 2**-bits to ``x``, as an exact Fraction."""
    return Fraction(round(x * (1 << bits)), 1 << bits)


def _canon(coeffs, bound):
    """Scale a row to integer coefficients with gcd 1; None for trivial rows."""
    coeffs = [Fraction(c) for c in coeffs]
    bound = Fraction(bound)
    den = 1
    for c in coeffs:
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for v in ints:
        g = math.gcd(g, v)
    if g == 0:
        return None if bound >= 0 else ((0,) * len(coeffs), Fraction(-1))
    return tuple(v // g for v in ints), bound * den / g


@dataclass(frozen=True)
class Row:
    coeffs: tuple
    bound: Fraction
    origin: frozenset = frozenset()


class IneqSystem:
    """Finite system of rows ``sum_i a_i x_i <= b`` over named variables."""

    def __init__(self, variables, rows=(), _canonical=False):
        self.variables = tuple(variables)
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("duplicate variable names")
        if _canonical:
            self.rows = tuple(rows)
            return
        best: dict = {}
        for k, r in enumerate(rows):
            if isinstance(r, Row):
                coeffs, bound, origin = r.coeffs, r.bound, r.origin
            else:
                coeffs, bound = r
                origin = frozenset([k])
            if len(coeffs) != len(self.variables):
                raise ValueError("row length does not match the variables")
            c = _canon(coeffs, bound)
            if c is None:
                continue
            prev = best.get(c[0])
            if prev is None or c[1] < prev.bound or (
                    c[1] == prev.bound and len(origin) < len(prev.origin)):
                best[c[0]] = Row(c[0], c[1], origin)
        self.rows = tuple(best[k] for k in sorted(best))

    def __len__(self):
        return len(self.rows)

    def __repr__(self):
        return f"IneqSystem({self.variables}, {len(self.rows)} rows)"

    def __str__(self):
        return "\n".join(format_row(self.variables, r.coeffs, r.bound) for r in self.rows)

    @property
    def infeasible_marker(self) -> bool:
        return any(not any(r.coeffs) for r in self.rows)

    def index(self, var) -> int:
        try:
            return self.variables.index(var)
        except ValueError:
            raise KeyError(f"unknown variable {var!r}") from None

    def satisfied(self, point, tol=0) -> bool:
        pt = [Fraction(v) if not isinstance(v, float) else v for v in point]
        return all(sum(a * x for a, x in zip(r.coeffs, pt)) <= r.bound + tol for r in self.rows)

    def matrix(self):
        A = np.array([[float(a) for a in r.coeffs] for r in self.rows]).reshape(-1, len(self.variables))
        b = np.array([float(r.bound) for r in self.rows])
        return A, b

    def restrict(self, keep) -> IneqSystem:
        """Reorder columns to ``keep``; the other variables must be absent."""
        idx = [self.index(v) for v in keep]
        rest = [i for i in range(len(self.variables)) if i not in idx]
        for r in self.rows:
            if any(r.coeffs[i] for i in rest):
                raise ValueError("system still involves dropped variables")
        return IneqSystem(keep, [Row(tuple(r.coeffs[i] for i in idx), r.bound, r.origin)
                                 for r in self.rows])


def format_row(variables, coeffs, bound) -> str:
    terms = []
    for a, v in zip(coeffs, variables):
        if a == 0:
            continue
        sign = "-" if a < 0 else "+"
        mag = abs(a)
        body = v if mag == 1 else f"{mag} {v}"
        terms.append((sign, body))
    if not terms:
        return f"0 <= {bound}"
    first = ("-" if terms[0][0] == "-" else "") + terms[0][1]
    rest = "".join(f" {s} {b}" for s, b in terms[1:])
    return f"{first}{rest} <= {bound}"


def fm_eliminate(sys: IneqSystem, var: str, max_origin: int | None = None) -> IneqSystem:
    """Project out ``var`` by pairing rows of opposite sign in it.

    With ``max_origin``, combined rows built from more input rows than that
    are skipped before duplicates are merged.
    """
    j = sys.index(var)
    pos = [r for r in sys.rows if r.coeffs[j] > 0]
    neg = [r for r in sys.rows if r.coeffs[j] < 0]
    out = [r for r in sys.rows if r.coeffs[j] == 0]
    for p in pos:
        for n in neg:
            a, b = -n.coeffs[j], p.coeffs[j]
            origin = p.origin | n.origin
            if max_origin is not None and len(origin) > max_origin:
                continue
            coeffs = tuple(a * x + b * y for x, y in zip(p.coeffs, n.coeffs))
            out.append(Row(coeffs, a * p.bound + b * n.bound, origin))
    keep = sys.variables[:j] + sys.variables[j + 1:]
    rows = [Row(r.coeffs[:j] + r.coeffs[j + 1:], r.bound, r.origin) for r in out]
    return IneqSystem(keep, rows)


def _implied(target: Row, rows, max_combo: int) -> bool:
    """Exact test: is ``target`` a nonnegative combination of <= max_combo rows
    with a bound no larger than its own?"""
    for k in range(1, max_combo + 1):
        for combo in itertools.combinations(rows, k):
            lam = _nonneg_solution([r.coeffs for r in combo], target.coeffs)
            if lam is None:
                continue
            if sum(l * r.bound for l, r in zip(lam, combo)) <= target.bound:
                return True
    return False


def _nonneg_solution(vectors, target):
    """Exact nonnegative ``lam`` with sum lam_i v_i = target, when unique-ish."""
    k = len(vectors)
    n = len(target)
    # Gaussian elimination over the rationals on the n x k system
    M = [[Fraction(vectors[c][r]) for c in range(k)] + [Fraction(target[r])] for r in range(n)]
    piv_cols = []
    row = 0
    for c in range(k):
        p = next((r for r in range(row, n) if M[r][c] != 0), None)
        if p is None:
            continue
        M[row], M[p] = M[p], M[row]
        inv = 1 / M[row][c]
        M[row] = [v * inv for v in M[row]]
        for r in range(n):
            if r != row and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * b for a, b in zip(M[r], M[row])]
        piv_cols.append(c)
        row += 1
    if any(M[r][k] != 0 for r in range(row, n)):
        return None
    if len(piv_cols) < k:
        return None  # dependent vectors: a smaller combination covers it
    lam = [Fraction(0)] * k
    for r, c in enumerate(piv_cols):
        lam[c] = M[r][k]
    if any(l < 0 for l in lam):
        return None
    return lam


def prune(sys: IneqSystem, max_combo: int = 3, max_rows_for_triples: int = 40) -> IneqSystem:
    """Drop rows implied by nonnegative combinations of a few other rows."""
    rows = list(sys.rows)
    combo = max_combo if len(rows) <= max_rows_for_triples else min(max_combo, 2)
    kept = list(rows)
    for r in rows:
        others = [o for o in kept if o is not r]
        if _implied(r, others, combo):
            kept = others
    return IneqSystem(sys.variables, kept, _canonical=True)


def _pairings(sys, var):
    j = sys.index(var)
    p = sum(1 for r in sys.rows if r.coeffs[j] > 0)
    n = sum(1 for r in sys.rows if r.coeffs[j] < 0)
    return p * n - p - n


def project(sys: IneqSystem, keep, order=None, max_combo: int = 3) -> IneqSystem:
    """Eliminate every variable outside ``keep``, fewest new rows first.

    ``order`` fixes the elimination sequence instead. After each step, rows
    combining more than (steps + 1) input rows are dropped (they are always
    redundant). Implication pruning runs once on the final system only: the
    origin rule relies on every low-origin row surviving, so pruning in
    between can lose rows of the projection.
    """
    keep = tuple(keep)
    for v in keep:
        sys.index(v)
    todo = [v for v in sys.variables if v not in keep]
    steps = 0
    cur = IneqSystem(sys.variables, [Row(r.coeffs, r.bound, frozenset([k]))
                                     for k, r in enumerate(sys.rows)])
    while todo:
        if order is not None:
            var = order[steps]
        else:
            var = min(todo, key=lambda v: (_pairings(cur, v), cur.variables.index(v)))
        todo.remove(var)
        steps += 1
        cur = fm_eliminate(cur, var, max_origin=steps + 1)
    return prune(cur, max_combo).restrict(keep)


# vertex enumeration for small dimensions

def vertices(sys: IneqSystem, tol: float = 1e-9) -> list[tuple]:
    """Exact vertices of a bounded low-dimensional system."""
    A, b = sys.matrix()
    k = A.shape[1]
    found = set()
    for S in itertools.combinations(range(len(sys.rows)), k):
        sub = A[list(S)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        x = np.linalg.solve(sub, b[list(S)])
        if np.any(A @ x > b + tol * (1 + np.abs(b))):
            continue
        exact = _solve_exact([sys.rows[i] for i in S])
        if exact is not None and sys.satisfied(exact):
            found.add(exact)
    return sorted(found)


def _solve_exact(rows):
    k = len(rows)
    M = [[Fraction(v) for v in r.coeffs] + [r.bound] for r in rows]
    for c in range(k):
        p = next((r for r in range(c, k) if M[r][c] != 0), None)
        if p is None:
            return None
        M[c], M[p] = M[p], M[c]
        inv = 1 / M[c][c]
        M[c] = [v * inv for v in M[c]]
        for r in range(k):
            if r != c and M[r][c] != 0:
                f = M[r][c]
                M[r] = [a - f * bb for a, bb in zip(M[r], M[c])]
    return tuple(M[r][k] for r in range(k))


def with_box(sys: IneqSystem, upper: Fraction) -> IneqSystem:
    k = len(sys.variables)
    extra = [Row(tuple(1 if i == j else 0 for i in range(k)), Fraction(upper)) for j in range(k)]
    return IneqSystem(sys.variables, list(sys.rows) + extra)


@dataclass(frozen=True)
class Verdict:
    equal: bool
    witness: tuple | None
    detail: str
    projected: IneqSystem
    reference: IneqSystem


def compare_systems(P: IneqSystem, Q: IneqSystem, box: Fraction) -> tuple[bool, tuple | None, str]:
    """Equality of two polyhedra in the positive orthant, judged inside a box."""
    Pb, Qb = with_box(P, box), with_box(Q, box)
    for name, X, Y in (("projection", Pb, Qb), ("reference", Qb, Pb)):
        for v in vertices(X):
            if not Y.satisfied(v):
                return False, v, f"vertex of the {name} violates the other system"
    return True, None, "equal"


# the Marton-scheme constraint system

VARS = ("R", "Rd1", "Rd2", "R0", "R1", "R2", "R3", "T1", "T2")
KEEP = ("R", "Rd1", "Rd2")
TERM_KEYS = ("H(Y)", "I(Z1;Z2|U)", "H(Y|Z1,U)", "H(Y|Z2,U)", "H(Y|Z1,Z2,U)", "H(Y|U)")


def _vec(**kw):
    return tuple(Fraction(kw.get(v, 0)) for v in VARS)


def scheme_system(terms: dict) -> IneqSystem:
    """Rate split, binning, decoding and disturbance constraints (all closed).

    ``terms`` maps the keys of TERM_KEYS to exact rationals. T1, T2 are the
    binning rates and r_j = T_j - R_j the per-bin excess.
    """
    I = terms["I(Z1;Z2|U)"]
    h = Fraction(1, 2)
    rows = [
        (_vec(R=1, R0=-1, R1=-1, R2=-1, R3=-1), 0),
        (_vec(R=-1, R0=1, R1=1, R2=1, R3=1), 0),
        (_vec(R0=-1), 0), (_vec(R1=-1), 0), (_vec(R2=-1), 0), (_vec(R3=-1), 0),
        (_vec(R1=1, T1=-1), 0), (_vec(R2=1, T2=-1), 0),
        # covering, and the two no-collision conditions
        (_vec(T1=-1, R1=1, T2=-1, R2=1), -I),
        (_vec(T1=h, R1=-h, T2=1, R2=-1), I),
        (_vec(T1=1, R1=-1, T2=h, R2=-h), I),
        # decoding
        (_vec(R3=1), terms["H(Y|Z1,Z2,U)"]),
        (_vec(T1=1, R3=1), terms["H(Y|Z2,U)"] + I),
        (_vec(T2=1, R3=1), terms["H(Y|Z1,U)"] + I),
        (_vec(T1=1, T2=1, R3=1), terms["H(Y|U)"] + I),
        (_vec(R0=1, T1=1, T2=1, R3=1), terms["H(Y)"] + I),
        # disturbance
        (_vec(R0=1, T1=1, Rd1=-1), 0),
        (_vec(R0=1, T2=1, Rd2=-1), 0),
    ]
    return IneqSystem(VARS, rows)


def six_inequalities(terms: dict) -> IneqSystem:
    I = terms["I(Z1;Z2|U)"]
    h12 = terms["H(Y|Z1,Z2,U)"]
    rows = [
        ((1, 0, 0), terms["H(Y)"]),
        ((0, -1, -1), -I),
        ((1, -1, 0), terms["H(Y|Z1,U)"]),
        ((1, 0, -1), terms["H(Y|Z2,U)"]),
        ((1, -1, -1), h12 - I),
        ((2, -1, -1), h12 + terms["H(Y|U)"] - I),
        ((-1, 0, 0), 0), ((0, -1, 0), 0), ((0, 0, -1), 0),
    ]
    return IneqSystem(KEEP, rows)


def _exact_terms(info: dict) -> dict:
    out = {}
    for k in TERM_KEYS:
        v = info[k]
        out[k] = v if isinstance(v, Fraction) else dyadic(float(v))
    if out["I(Z1;Z2|U)"] < 0 or any(out[k] < 0 for k in TERM_KEYS):
        raise ValueError("information terms must be nonnegative")
    if out["H(Y|Z1,Z2,U)"] > min(out["H(Y|Z1,U)"], out["H(Y|Z2,U)"]) or \
            max(out["H(Y|Z1,U)"], out["H(Y|Z2,U)"]) > out["H(Y|U)"] or out["H(Y|U)"] > out["H(Y)"]:
        raise ValueError("conditional entropies are not consistent with a joint pmf")
    return out


def verify_thm4_projection(info: dict, order=None) -> Verdict:
    """Project the scheme constraints onto (R, Rd1, Rd2) and compare with the
    six-inequality region built from the same (dyadically rounded) terms."""
    terms = _exact_terms(info)
    proj = project(scheme_system(terms), KEEP, order=order)
    ref = six_inequalities(terms)
    box = 4 * (1 + sum(terms.values()))
    eq, wit, detail = compare_systems(proj, ref, box)
    return Verdict(eq, wit, detail, proj, ref)


# plain-text inequality lists

_TERM = re.compile(r"\s*([+-]?)\s*([0-9./]*)\s*\*?\s*([A-Za-z_][A-Za-z0-9_]*)?")


def _parse_side(text: str):
    coeffs: dict = {}
    const = Fraction(0)
    s = text.strip()
    if not s:
        raise ValueError("empty side")
    pos = 0
    first = True
    while pos < len(s):
        m = _TERM.match(s, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse {s[pos:]!r}")
        sign, num, var = m.groups()
        if not sign and not first:
            raise ValueError(f"missing operator before {s[pos:m.end()].strip()!r}")
        if not num and not var:
            raise ValueError(f"dangling sign in {s!r}")
        val = Fraction(num) if num else Fraction(1)
        if sign == "-":
            val = -val
        if var:
            coeffs[var] = coeffs.get(var, 0) + val
        else:
            const += val
        pos = m.end()
        first = False
    return coeffs, const


def parse_system(text: str) -> tuple[IneqSystem, tuple]:
    """Parse ``keep a b`` plus one inequality per line (``<=`` or ``>=``).

    Variables appear in first-use order. Returns the system and the kept names.
    """
    keep = None
    raw = []
    order: list[str] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("keep"):
            keep = tuple(line.split()[1:])
            continue
        if "<=" in line:
            lhs, rhs = line.split("<=", 1)
            flip = False
        elif ">=" in line:
            lhs, rhs = line.split(">=", 1)
            flip = True
        else:
            raise ValueError(f"line {lineno}: expected '<=' or '>='")
        try:
            lc, lk = _parse_side(lhs)
            rc, rk = _parse_side(rhs)
        except (ValueError, ZeroDivisionError) as e:
            raise ValueError(f"line {lineno}: {e}") from None
        co = dict(lc)
        for v, a in rc.items():
            co[v] = co.get(v, 0) - a
        bound = rk - lk
        if flip:
            co = {v: -a for v, a in co.items()}
            bound = -bound
        for v in list(lc) + list(rc):
            if v not in order:
                order.append(v)
        raw.append((co, bound))
    if keep is None:
        raise ValueError("missing 'keep' line")
    for v in keep:
        if v not in order:
            order.append(v)
    rows = [(tuple(co.get(v, 0) for v in order), b) for co, b in raw]
    return IneqSystem(order, rows), keep
