"""Command-line front end.

Each command evaluates a quantity on a grid and writes a table to stdout (or
``--output``) as CSV or JSON.  Exit codes: 0 success, 1 failed verification
check, 2 invalid input, 3 numerical failure, 4 I/O error.  Errors are also
reported as a JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from .errors import LevyExpError, NumericalError, PoleError, ValidationError

EXIT_OK, EXIT_CHECK_FAILED, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 1, 2, 3, 4
THREADS_ENV = "LEVYEXP_THREADS"

COMMANDS = ("mellin", "density", "supremum", "entrance-law", "excursion-law", "lifetime",
            "radial-entrance", "last-passage", "simulate", "verify")


@dataclass(frozen=True)
class Grid:
    lo: float
    hi: float
    n_points: int
    spacing: str = "log"

    def points(self):
        if self.n_points == 1:
            return np.array([self.lo])
        if self.spacing == "log":
            return np.geomspace(self.lo, self.hi, self.n_points)
        return np.linspace(self.lo, self.hi, self.n_points)


def parse_grid(text, positive=True):
    """Parse ``min:max:n[:linear|log]``."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ValidationError(f"grid must look like min:max:n[:spacing], got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ValidationError(f"bad grid {text!r}: {exc}") from None
    spacing = parts[3] if len(parts) == 4 else "log"
    if spacing not in ("linear", "log"):
        raise ValidationError(f"grid spacing must be 'linear' or 'log', got {spacing!r}")
    if n < 1:
        raise ValidationError("grid needs at least one point")
    if not (math.isfinite(lo) and math.isfinite(hi)) or hi < lo:
        raise ValidationError(f"grid bounds must be finite with min <= max, got {lo}, {hi}")
    if positive and lo <= 0:
        raise ValidationError("grid minimum must be positive")
    if spacing == "log" and lo <= 0:
        raise ValidationError("log spacing needs a positive minimum")
    return Grid(lo, hi, n, spacing)


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, str):
        return v
    return format(float(v), ".17g")


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, str):
        return v
    return float(v)


def render(table, fmt):
    if fmt == "csv":
        lines = [",".join(table.columns)]
        lines += [",".join(_fmt(v) for v in row) for row in table.rows]
        return "\n".join(lines) + "\n"
    doc = {"columns": table.columns, "rows": [[_plain(v) for v in row] for row in table.rows]}
    doc.update(table.meta)
    return json.dumps(doc, indent=1) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def _spec(args):
    from .mellin import ExpFunctionalSpec
    from .process import HypergeometricParams
    params = HypergeometricParams(args.beta, args.gamma, args.beta_hat, args.gamma_hat)
    return ExpFunctionalSpec(params, args.alpha)


def _stable(args):
    from .process import StableParams
    return StableParams(args.alpha, args.rho)


def _radial(args):
    from .applications import RadialSpec
    return RadialSpec(args.alpha, args.d)


def _grid_table(xs, values, column="x"):
    return Table([column, "value"], [[x, v] for x, v in zip(xs, np.atleast_1d(values))])


def cmd_mellin(args):
    from .mellin import mellin_full
    spec = _spec(args)
    s = parse_grid(args.grid, positive=False).points()
    vals = mellin_full(spec, s + 1j * args.imag)
    return Table(["s", "value", "imag"], [[a, v.real, v.imag] for a, v in zip(s, np.atleast_1d(vals))])


def cmd_density(args):
    spec = _spec(args)
    xs = parse_grid(args.grid).points()
    if args.method == "inversion":
        from .oracle import mellin_invert
        res = mellin_invert(spec, xs)
        return Table(["x", "value", "imag"], [[x, v, i] for x, v, i in zip(xs, res.value, res.imag)])
    from .series import density
    return _grid_table(xs, density(spec, xs, rel_tol=args.rel_tol, method=args.method))


def cmd_supremum(args):
    from .applications import supremum_cdf, supremum_density
    xs = parse_grid(args.grid).points()
    f = supremum_cdf if args.cdf else supremum_density
    return _grid_table(xs, f(_stable(args), xs, method=args.method))


def cmd_entrance_law(args):
    from .applications import entrance_law_up
    xs = parse_grid(args.grid).points()
    return _grid_table(xs, entrance_law_up(_stable(args), xs, method=args.method))


def cmd_excursion_law(args):
    from .applications import excursion_entrance_law
    xs = parse_grid(args.grid).points()
    return _grid_table(xs, excursion_entrance_law(_stable(args), xs, method=args.method))


def cmd_lifetime(args):
    from .applications import lifetime_density_down
    ts = parse_grid(args.grid).points()
    return _grid_table(ts, lifetime_density_down(_stable(args), ts, method=args.method), column="t")


def cmd_radial_entrance(args):
    from .applications import radial_entrance_law
    xs = parse_grid(args.grid).points()
    return _grid_table(xs, radial_entrance_law(_radial(args), xs, method=args.method))


def cmd_last_passage(args):
    from .applications import last_passage_density
    ts = parse_grid(args.grid).points()
    return _grid_table(ts, last_passage_density(_radial(args), ts, radius=args.radius), column="t")


def moment_strip(spec):
    """Open interval of real s on which E[I^(s-1)] is finite."""
    b, g, _, _ = spec.params.as_tuple()
    lo = 0.0 if b < 1 else -(1 - b + g) * spec.delta
    return lo, spec.cramer_strip[1]


def cmd_simulate(args):
    from .mellin import mellin_full
    from .oracle import SimulationConfig, mc_moment, simulate_exponential_functional
    spec = _spec(args)
    config = SimulationConfig(jump_cutoff=args.jump_cutoff, n_paths=args.n_paths,
                              rng_seed=args.seed, workers=args.threads)
    samples = simulate_exponential_functional(spec, config)
    s_values = parse_grid(args.grid, positive=False).points()
    rows = []
    for s in s_values:
        est = mc_moment(samples, s)
        lo, hi = moment_strip(spec)
        exact = float(np.real(mellin_full(spec, s))) if lo < s < hi else math.inf
        rows.append([s, est.mean, est.std_error, exact, (est.mean - exact) / est.std_error if est.std_error and math.isfinite(exact) else math.nan])
    return Table(["s", "value", "std_error", "exact", "z_score"], rows,
                 meta={"n_paths": config.n_paths, "jump_cutoff": config.jump_cutoff, "seed": config.rng_seed})


def cmd_verify(args):
    from .verification import run_suite
    results = run_suite(args.suite)
    rows = [[r.name, r.value, r.tolerance, r.passed] for r in results]
    table = Table(["check", "value", "tolerance", "passed"], rows)
    table.meta["all_passed"] = all(r.passed for r in results)
    return table


HANDLERS = {
    "mellin": cmd_mellin,
    "density": cmd_density,
    "supremum": cmd_supremum,
    "entrance-law": cmd_entrance_law,
    "excursion-law": cmd_excursion_law,
    "lifetime": cmd_lifetime,
    "radial-entrance": cmd_radial_entrance,
    "last-passage": cmd_last_passage,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
}


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


def _add_hyper(p):
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--beta-hat", type=float, required=True)
    p.add_argument("--gamma-hat", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)


def _add_stable(p):
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--rho", type=float, required=True, help="P(Y_1 > 0)")


def _add_radial(p):
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--d", type=int, required=True, help="dimension")


def build_parser():
    from .verification import SUITES
    parser = _Parser(prog="levyexp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def command(name, help_text, grid_default="0.1:10:50:log"):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--grid", default=grid_default, help="min:max:n[:linear|log]")
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", help="output file (default stdout)")
        return p

    p = command("mellin", "Mellin transform E[I^(s-1)] on a grid of Re(s)", "0.5:1.5:11:linear")
    _add_hyper(p)
    p.add_argument("--imag", type=float, default=0.0, help="imaginary part added to every s")
    p = command("density", "density of the exponential functional")
    _add_hyper(p)
    p.add_argument("--method", choices=("auto", "convergent", "inversion"), default="auto")
    p.add_argument("--rel-tol", type=float, default=1e-10)
    p = command("supremum", "density (or --cdf) of the supremum of a stable process on [0, 1]")
    _add_stable(p)
    p.add_argument("--cdf", action="store_true")
    p.add_argument("--method", choices=("auto", "convergent", "inversion"), default="auto")
    p = command("entrance-law", "entrance law at time 1 of the stable process conditioned to stay positive")
    _add_stable(p)
    p.add_argument("--method", choices=("transport", "series", "inversion"), default="transport")
    p = command("excursion-law", "entrance law at time 1 of the excursions from the infimum")
    _add_stable(p)
    p.add_argument("--method", choices=("transport", "series", "inversion"), default="transport")
    p = command("lifetime", "lifetime density of the stable process conditioned to hit zero continuously")
    _add_stable(p)
    p.add_argument("--method", choices=("auto", "convergent", "inversion"), default="auto")
    p = command("radial-entrance", "entrance law at time 1 of |Y|/2 for a symmetric stable process")
    _add_radial(p)
    p.add_argument("--method", choices=("series", "transport"), default="series")
    p = command("last-passage", "density of the last exit time from a ball")
    _add_radial(p)
    p.add_argument("--radius", type=float, default=2.0)
    p = command("simulate", "Monte Carlo moments E[I^(s-1)] on a grid of s", "2:2:1:linear")
    _add_hyper(p)
    p.add_argument("--n-paths", type=int, default=100_000)
    p.add_argument("--jump-cutoff", type=float, default=1e-3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=int(os.environ.get(THREADS_ENV, "1")))
    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", choices=sorted(SUITES), default="identities")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--output")
    return parser


def _report(kind, exc, code):
    err = {"error": kind, "type": type(exc).__name__, "message": str(exc), "exit_code": code}
    print(json.dumps(err), file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        table = HANDLERS[args.command](args)
    except ValidationError as exc:
        return _report("validation", exc, EXIT_VALIDATION)
    except (NumericalError, PoleError) as exc:
        return _report("numerical", exc, EXIT_NUMERICAL)
    except LevyExpError as exc:
        return _report("numerical", exc, EXIT_NUMERICAL)
    text = render(table, args.format)
    try:
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    except OSError as exc:
        return _report("io", exc, EXIT_IO)
    if args.command == "verify" and not table.meta.get("all_passed", True):
        return EXIT_CHECK_FAILED
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
