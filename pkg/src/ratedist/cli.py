"""Command line: ``ratedist <command> [input] [flags]``.

Every command writes ``<out>/<command>.csv`` (and ``.svg`` with
``--format svg``) and prints a one-line summary.  Exit status is 0 on
success, 1 for an unknown command, 2 for invalid input and 3 when a size
guard refuses the job.

CSV schemas (numbers at 9 decimals, ``nan`` where infeasible):

  2-D regions       R,Rd            one row per disturbance budget
  3-D regions       Rd1,Rd2,R       budget grid in row-major order
  gaussian-scalar   alpha,R,Rd      one row per power fraction
  check-exactness   case,holds
  fm-project        inequality      one projected row per line
  verify-thm4       trial,equal,detail
  sim-*             statistic,estimate,ci_low,ci_high,predicted_bound
  independence-check  n,s,deviation
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import regions
from .channel import ChannelFormatError, GaussianChannel, ChannelSpec, parse_channel
from .coding import sim_1dc, sset_stats, independence_oracle
from .errors import GuardError
from .frontier import RegionFrontier
from .gaussian import GaussianScalarSpec, GaussianVectorSpec, scalar_points, vector_region
from .polyhedra import format_row, parse_system, project, verify_thm4_projection
from .regions import standard_joint, thm4_terms

COMMANDS = (
    "region-1dc", "region-1dc-det", "region-2dc-inner", "region-2dc-roof",
    "region-2dc-outer", "region-2dc-exact", "check-exactness", "gaussian-scalar",
    "gaussian-vector", "fm-project", "verify-thm4", "sim-1dc", "sim-marton",
    "independence-check",
)
NEEDS_INPUT = set(COMMANDS) - {"gaussian-scalar", "independence-check"}


def _num(v) -> str:
    v = float(v)
    return "nan" if np.isnan(v) else f"{v:.9f}"


def _csv(header, rows) -> str:
    lines = [",".join(header)]
    lines += [",".join(c if isinstance(c, str) else _num(c) for c in r) for r in rows]
    return "\n".join(lines) + "\n"


# -- SVG -------------------------------------------------------------------------

W, H, PAD = 480, 360, 50


def _svg(lines, xmax, ymax, xlabel, ylabel, title) -> str:
    """Polylines given as lists of (x, y) in bits; axes start at zero."""
    xmax = xmax if xmax > 0 else 1.0
    ymax = ymax if ymax > 0 else 1.0

    def sx(x):
        return PAD + (W - 2 * PAD) * x / xmax

    def sy(y):
        return H - PAD - (H - 2 * PAD) * y / ymax

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" '
           f'viewBox="0 0 {W} {H}">',
           f'<rect width="{W}" height="{H}" fill="white"/>',
           f'<text x="{W / 2:.1f}" y="20" text-anchor="middle" font-size="14">{title}</text>',
           f'<line x1="{PAD}" y1="{H - PAD}" x2="{W - PAD}" y2="{H - PAD}" stroke="black"/>',
           f'<line x1="{PAD}" y1="{PAD}" x2="{PAD}" y2="{H - PAD}" stroke="black"/>',
           f'<text x="{W / 2:.1f}" y="{H - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
           f'<text x="14" y="{H / 2:.1f}" text-anchor="middle" font-size="12" '
           f'transform="rotate(-90 14 {H / 2:.1f})">{ylabel}</text>']
    for k in range(5):
        x = xmax * k / 4
        y = ymax * k / 4
        out.append(f'<text x="{sx(x):.1f}" y="{H - PAD + 16}" text-anchor="middle" '
                   f'font-size="10">{x:.3f}</text>')
        out.append(f'<text x="{PAD - 6}" y="{sy(y) + 3:.1f}" text-anchor="end" '
                   f'font-size="10">{y:.3f}</text>')
    for label, pts in lines:
        if len(pts) == 0:
            continue
        path = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in pts)
        out.append(f'<polyline fill="none" stroke="black" stroke-width="1.5" points="{path}"/>')
        if label:
            x, y = pts[-1]
            out.append(f'<text x="{sx(x) + 4:.1f}" y="{sy(y):.1f}" font-size="10">{label}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _svg_2d(front: RegionFrontier, title) -> str:
    b = front.budgets[0]
    ok = np.isfinite(front.values)
    pts = list(zip(b[ok], front.values[ok]))
    return _svg([("", pts)], float(b.max()), float(np.nanmax(front.values)),
                "Rd (bits)", "R (bits)", title)


def _svg_contours(front: RegionFrontier, title, levels=5) -> str:
    """Constant-R slices: for each level, the least Rd2 reaching it per Rd1."""
    b1, b2 = front.budgets
    V = front.values
    top = float(np.nanmax(V))
    lines = []
    for k in range(1, levels + 1):
        level = top * k / (levels + 1)
        pts = []
        for i, d1 in enumerate(b1):
            reach = np.flatnonzero(np.nan_to_num(V[i], nan=-1.0) >= level - 1e-12)
            if reach.size:
                pts.append((float(d1), float(b2[reach[0]])))
        lines.append((f"R={level:.3f}", pts))
    return _svg(lines, float(b1.max()), float(b2.max()), "Rd1 (bits)", "Rd2 (bits)", title)


# -- commands ------------------------------------------------------------------

def _read_input(path):
    try:
        text = Path(path).read_text()
    except OSError as e:
        raise ChannelFormatError(f"cannot read {path}: {e.strerror}") from None
    return text


def _channel(args) -> ChannelSpec:
    ch = parse_channel(_read_input(args.input))
    if isinstance(ch, GaussianChannel):
        raise ChannelFormatError("expected a discrete channel, got a Gaussian one")
    return ch


def _floats(text):
    return [float(t) for t in text.split(",")] if text else None


def _frontier_output(front: RegionFrontier, title):
    if front.dims == 2:
        csv = _csv(("R", "Rd"), zip(front.values, front.budgets[0]))
        svg = _svg_2d(front, title)
    else:
        g, v = front.grid_points()
        csv = _csv(("Rd1", "Rd2", "R"), ((a, b, r) for (a, b), r in zip(g, v)))
        svg = _svg_contours(front, title)
    return csv, svg, f"max R = {front.max_rate:.9f}"


def cmd_region(args):
    ch = _channel(args)
    kw = dict(budget_steps=args.budget_steps)
    grid = args.grid
    name = args.command
    if name == "region-1dc":
        front = regions.region_1dc(ch, grid=grid or regions.DEFAULT_GRID, seed=args.seed, **kw)
    elif name == "region-1dc-det":
        front = regions.region_1dc_det(ch, grid=grid or 24, **kw)
    elif name == "region-2dc-inner":
        front = regions.inner_2dc(ch, grid=grid or regions.DEFAULT_GRID, seed=args.seed, **kw)
    elif name == "region-2dc-roof":
        front = regions.inner_2dc_roof(ch, grid=grid or regions.DEFAULT_GRID, seed=args.seed, **kw)
    elif name == "region-2dc-outer":
        front = regions.outer_2dc(ch, grid=grid or regions.DEFAULT_GRID, **kw)
    else:
        front = regions.region_2dc_exact(ch, grid=grid or regions.DEFAULT_GRID, **kw)
    csv, svg, summary = _frontier_output(front, name)
    if name == "region-2dc-exact":
        summary += f", case {front.meta['case']}"
    return csv, svg, summary


def cmd_check_exactness(args):
    ch = _channel(args)
    held = regions.exactness_cases(ch)
    rows = [(c, "1" if c in held else "0") for c in regions.EXACT_CASES]
    return _csv(("case", "holds"), rows), None, f"case: {regions.check_exactness(ch)}"


def cmd_gaussian_scalar(args):
    spec = GaussianScalarSpec(args.P, args.N)
    pts = scalar_points(spec, args.steps)
    alpha = np.linspace(0.0, 1.0, args.steps)
    csv = _csv(("alpha", "R", "Rd"), ((a, r, d) for a, (r, d) in zip(alpha, pts)))
    svg = _svg([("", list(zip(pts[:, 1], pts[:, 0])))], float(pts[-1, 1]), float(pts[-1, 0]),
               "Rd (bits)", "R (bits)", "gaussian-scalar")
    return csv, svg, f"endpoint R = {pts[-1, 0]:.9f}, Rd = {pts[-1, 1]:.9f}"


def cmd_gaussian_vector(args):
    ch = parse_channel(_read_input(args.input))
    if not isinstance(ch, GaussianChannel):
        raise ChannelFormatError("expected a 'gaussian d P' channel")
    spec = GaussianVectorSpec.from_channel(ch)
    front = vector_region(spec, seed=args.seed, samples=args.samples,
                          budget_steps=args.budget_steps or 64,
                          gap_tol=args.tol if args.tol is not None else 1e-10)
    return _frontier_output(front, "gaussian-vector")


def cmd_fm_project(args):
    sys_, keep = parse_system(_read_input(args.input))
    if not keep:
        raise ValueError("the system needs a 'keep' line")
    proj = project(sys_, keep)
    rows = [(format_row(proj.variables, r.coeffs, r.bound),) for r in proj.rows]
    return _csv(("inequality",), rows), None, f"{len(rows)} inequalities over {', '.join(keep)}"


def _random_pux(rng, ch, nu_max=3):
    nu = int(rng.integers(1, nu_max + 1))
    return rng.dirichlet(np.full(nu * ch.n_inputs, 0.7)).reshape(nu, ch.n_inputs)


def cmd_verify_thm4(args):
    ch = _channel(args)
    if ch.K != 2:
        raise ValueError("verify-thm4 needs a channel with two side outputs")
    rng = np.random.default_rng(args.seed)
    rows, ok = [], 0
    for t in range(args.trials):
        v = verify_thm4_projection(thm4_terms(standard_joint(ch, _random_pux(rng, ch))))
        ok += v.equal
        rows.append((str(t), "1" if v.equal else "0", v.detail.replace(",", ";")))
    return _csv(("trial", "equal", "detail"), rows), None, f"equal: {ok}/{args.trials}"


def _pux(ch: ChannelSpec, args) -> np.ndarray:
    nx = ch.n_inputs
    px = np.array(_floats(args.px) or [1.0 / nx] * nx)
    if px.size != nx or np.any(px < 0) or abs(px.sum() - 1) > 1e-9:
        raise ValueError(f"--px must be a pmf with {nx} entries")
    if args.aux in (None, "none"):
        aux = np.zeros(nx, dtype=int)
    elif args.aux in ch.names:
        out = ch.output(args.aux)
        if not out.deterministic:
            raise ValueError(f"output {args.aux} is not deterministic")
        aux = np.array(out.det_map)
    else:
        aux = np.array([int(t) for t in args.aux.split(",")])
        if aux.size != nx or aux.min() < 0:
            raise ValueError(f"--aux needs {nx} nonnegative labels")
    pux = np.zeros((int(aux.max()) + 1, nx))
    pux[aux, np.arange(nx)] = px
    return pux[pux.sum(axis=1) > 0]


def cmd_sim_1dc(args):
    ch = _channel(args)
    rep = sim_1dc(ch, _pux(ch, args), args.n, args.R0, args.R1, args.eps, args.trials,
                  seed=args.seed, method=args.method)
    e = rep["error_rate"]
    return rep.to_csv(), None, f"error rate {e.estimate:.4f} [{e.ci_low:.4f}, {e.ci_high:.4f}]"


def cmd_sim_marton(args):
    ch = _channel(args)
    if ch.K != 2:
        raise ValueError("sim-marton needs a channel with two side outputs")
    joint = standard_joint(ch, _pux(ch, args))
    rep = sset_stats(joint, args.n, args.r1, args.r2, args.eps, args.trials, seed=args.seed)
    return rep.to_csv(), None, (f"P(S empty) {rep['s_empty'].estimate:.4f}, "
                                f"P(collision) {rep['collision'].estimate:.4f}")


def cmd_independence(args):
    pA = _floats(args.pA)
    sub = [int(t) for t in args.subset.split(",")]
    rows = []
    ns = [args.n] if args.n else list(range(2, 7))
    for n in ns:
        shifts = [args.s] if args.s else list(range(1, n))
        for s in shifts:
            rows.append((str(n), str(s), independence_oracle(pA, sub, n, s)))
    worst = max(r[2] for r in rows)
    return _csv(("n", "s", "deviation"), rows), None, f"max deviation {worst:.3e}"


HANDLERS = {
    "check-exactness": cmd_check_exactness,
    "gaussian-scalar": cmd_gaussian_scalar,
    "gaussian-vector": cmd_gaussian_vector,
    "fm-project": cmd_fm_project,
    "verify-thm4": cmd_verify_thm4,
    "sim-1dc": cmd_sim_1dc,
    "sim-marton": cmd_sim_marton,
    "independence-check": cmd_independence,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--grid", type=int, default=None, help="rational grid resolution m")
    common.add_argument("--budget-steps", type=int, default=64)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--tol", type=float, default=None, help="tolerance in bits")
    common.add_argument("--format", choices=("csv", "svg"), default="csv")
    common.add_argument("--out", default=".", help="output directory")

    parser = argparse.ArgumentParser(prog="ratedist", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", metavar="command")
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name in NEEDS_INPUT:
            p.add_argument("input", help="channel or inequality file")
        if name == "gaussian-scalar":
            p.add_argument("--P", type=float, default=1.0)
            p.add_argument("--N", type=float, default=3.0)
            p.add_argument("--steps", type=int, default=64)
        if name == "gaussian-vector":
            p.add_argument("--samples", type=int, default=2000)
        if name == "verify-thm4":
            p.add_argument("--trials", type=int, default=20)
        if name in ("sim-1dc", "sim-marton"):
            p.add_argument("--n", type=int, default=200 if name == "sim-1dc" else 40)
            p.add_argument("--eps", type=float, default=0.3 if name == "sim-1dc" else 0.5)
            p.add_argument("--trials", type=int, default=200 if name == "sim-1dc" else 100)
            p.add_argument("--px", default=None, help="input pmf, comma separated")
            p.add_argument("--aux", default=None,
                           help="U as an output name, comma labels per input, or none")
        if name == "sim-1dc":
            p.add_argument("--R0", type=float, default=0.05)
            p.add_argument("--R1", type=float, default=0.8)
            p.add_argument("--method", choices=("lazy", "explicit"), default="lazy")
        if name == "sim-marton":
            p.add_argument("--r1", type=float, default=0.1)
            p.add_argument("--r2", type=float, default=0.1)
        if name == "independence-check":
            p.add_argument("--pA", default="0.5,0.3,0.2")
            p.add_argument("--subset", default="1,2")
            p.add_argument("--n", type=int, default=None)
            p.add_argument("--s", type=int, default=None)
    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv or argv[0] not in COMMANDS:
        if argv and argv[0] in ("-h", "--help"):
            parser.print_help()
            return 0
        parser.print_usage(sys.stderr)
        print(f"ratedist: unknown command {argv[0] if argv else '(none)'}; "
              f"choose from {', '.join(COMMANDS)}", file=sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return 0 if e.code == 0 else 2
    handler = HANDLERS.get(args.command, cmd_region)
    try:
        csv, svg, summary = handler(args)
    except GuardError as e:
        print(f"ratedist: guard: {e}", file=sys.stderr)
        return 3
    except (ValueError, ChannelFormatError, KeyError) as e:
        print(f"ratedist: {e}", file=sys.stderr)
        return 2
    out = Path(args.out)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / f"{args.command}.csv").write_text(csv)
        if args.format == "svg":
            if svg is None:
                print(f"ratedist: {args.command} has no plot; wrote CSV only", file=sys.stderr)
            else:
                (out / f"{args.command}.svg").write_text(svg)
    except OSError as e:
        print(f"ratedist: cannot write output: {e}", file=sys.stderr)
        return 2
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
