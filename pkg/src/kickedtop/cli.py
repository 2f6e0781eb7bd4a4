"""``kickedtop`` command line: measures, sweeps, period checks, quasienergies and classical portraits.

Every subcommand writes CSV: a ``#`` metadata block, one header line, then rows.
Exit codes: 0 success, 2 bad arguments, 1 a numerical or contract failure.
"""

import argparse
import ast
import datetime
import operator
import os
import re
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from ._validation import ContractError, InvariantViolation, NumericalError
from .classical import phase_portrait, to_angles
from .floquet import FloquetParams, build_floquet, kappa_period, quasienergies
from .measures import (
    default_coarse_graining,
    echo_time_series,
    ge_series,
    oe_series,
    otoc_time_series,
)
from .series import read_table, series_from_csv, series_to_csv, write_table
from .spinops import PRNG_NAME, CoherentAngles, Spin, goe_sample, jz_matrix
from .sweep import (
    DEFAULT_DIVISORS,
    PERIOD_TOL,
    SpecError,
    SweepSpec,
    check_period,
    minimal_period,
    reflection_check,
    reflection_grid,
    run_sweep,
    special_k_scan,
)

OUT_DIR_ENV = "KICKEDTOP_OUT_DIR"


class ArgumentError(Exception):
    pass


# ---------------------------------------------------------------- literal parsing


class _PiLinear:
    """Exact ``q + c * pi`` with rational ``q`` and ``c``."""

    def __init__(self, q=Fraction(0), c=Fraction(0)):
        self.q, self.c = Fraction(q), Fraction(c)

    def __add__(self, o):
        return _PiLinear(self.q + o.q, self.c + o.c)

    def __sub__(self, o):
        return _PiLinear(self.q - o.q, self.c - o.c)

    def __neg__(self):
        return _PiLinear(-self.q, -self.c)

    def __mul__(self, o):
        if self.c and o.c:
            raise ArgumentError("pi^2 terms are not supported")
        if self.c:
            return _PiLinear(self.q * o.q, self.c * o.q)
        return _PiLinear(self.q * o.q, self.q * o.c)

    def __truediv__(self, o):
        if o.c or o.q == 0:
            raise ArgumentError("can only divide by a nonzero plain number")
        return _PiLinear(self.q / o.q, self.c / o.q)

    def value(self):
        return float(self.q) + float(self.c) * np.pi


_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def parse_angle(text, twice_j=None):
    """Parse literals such as ``pi/4``, ``3*pi/2``, ``2pi``, ``N*pi/2+0.1`` (``N = 2j``) or ``0.785``."""
    src = str(text).strip().replace("π", "pi")
    # implicit products such as "2pi" or "3N"
    src = re.sub(r"(\d)\s*(pi|N)\b", r"\1*\2", src)
    try:
        tree = ast.parse(src, mode="eval")
    except SyntaxError:
        raise ArgumentError(f"cannot parse angle {text!r}") from None

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and type(node.value) in (int, float):
            return _PiLinear(Fraction(str(node.value)))
        if isinstance(node, ast.Name):
            if node.id == "pi":
                return _PiLinear(0, 1)
            if node.id == "N":
                if twice_j is None:
                    raise ArgumentError("'N' (= 2j) needs --j")
                return _PiLinear(twice_j)
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            inner = ev(node.operand)
            return -inner if isinstance(node.op, ast.USub) else inner
        raise ArgumentError(f"unsupported token in angle {text!r}")

    return ev(tree).value()


def parse_spin(text):
    try:
        return Spin.from_j(str(text).strip())
    except ContractError as exc:
        raise ArgumentError(str(exc)) from None


# ---------------------------------------------------------------- output


def _open_out(path):
    if path is None or path == "-":
        return sys.stdout, False
    base = os.environ.get(OUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        path = os.path.join(base, path)
    return open(path, "w", newline=""), True


def _meta(args, **extra):
    meta = {"command": args.command, "version": __version__}
    for key, val in sorted(vars(args).items()):
        if key in ("command", "func", "out", "deterministic") or val is None:
            continue
        meta[key] = val
    meta.update(extra)
    if not args.deterministic:
        meta["generated"] = datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds")
    return meta


def _emit(args, columns, rows, meta):
    stream, close = _open_out(args.out)
    try:
        write_table(stream, columns, rows, meta)
    finally:
        if close:
            stream.close()


# ---------------------------------------------------------------- subcommands


def _measure_spec(args, measure_id, spin, alpha):
    kw = {}
    if measure_id == "OTOC":
        kw = {"operator": args.operator, "w_seed": args.w_seed if args.operator == "goe" else None}
    elif measure_id == "LE":
        if args.dk is None:
            raise ArgumentError("a k sweep of the echo needs --dk")
        kw = {"dk": parse_angle(args.dk, spin.twice_j)}
    elif measure_id == "GE":
        kw = {"angles": _angles(args, spin)}
    else:
        kw = {"angles": _angles(args, spin), "coarse": default_coarse_graining(spin, args.coarse_len)}
    if args.m is None:
        raise ArgumentError("a k sweep needs --m")
    k0 = parse_angle(args.k_start, spin.twice_j)
    k1 = parse_angle(args.k_stop, spin.twice_j)
    dkk = parse_angle(args.k_step, spin.twice_j)
    return SweepSpec(measure_id, spin, alpha, args.m, k0, k1, dkk, **kw)


def _angles(args, spin):
    return CoherentAngles(parse_angle(args.theta, spin.twice_j), parse_angle(args.phi, spin.twice_j))


def _run_measure(args, measure_id):
    spin = parse_spin(args.j)
    alpha = parse_angle(args.alpha, spin.twice_j)
    if args.k_start is not None or args.k_stop is not None:
        if None in (args.k_start, args.k_stop, args.k_step):
            raise ArgumentError("a k sweep needs --k-start, --k-stop and --k-step")
        spec = _measure_spec(args, measure_id, spin, alpha)
        series = run_sweep(spec)
    else:
        if args.k is None:
            raise ArgumentError("give --k with --m-max, or a k range")
        k = parse_angle(args.k, spin.twice_j)
        p = FloquetParams(spin, k, alpha)
        m_max = args.m_max if args.m_max is not None else args.m
        if m_max is None:
            raise ArgumentError("give --m or --m-max")
        if measure_id == "OTOC":
            w = goe_sample(spin.dim, args.w_seed) if args.operator == "goe" else jz_matrix(spin)
            series = otoc_time_series(p, w, m_max, w_seed=args.w_seed)
        elif measure_id == "LE":
            if args.k_prime is not None:
                kp = parse_angle(args.k_prime, spin.twice_j)
            elif args.dk is not None:
                kp = k + parse_angle(args.dk, spin.twice_j)
            else:
                raise ArgumentError("the echo needs --k-prime or --dk")
            series = echo_time_series(p, kp, m_max)
        elif measure_id == "GE":
            series = ge_series(p, _angles(args, spin), m_max)
        else:
            series = oe_series(p, _angles(args, spin), default_coarse_graining(spin, args.coarse_len), m_max)
    _emit(args, [series.axis_name, "value"], zip(series.axis, series.values),
          _meta(args, measure=series.measure_id, prng=PRNG_NAME, kappa_j=kappa_period(spin)))
    return 0


def cmd_quasi(args):
    spin = parse_spin(args.j)
    p = FloquetParams(spin, parse_angle(args.k, spin.twice_j), parse_angle(args.alpha, spin.twice_j))
    phases = quasienergies(build_floquet(p), branch=args.branch)
    _emit(args, ["phase_index", "phase"], enumerate(phases), _meta(args))
    return 0


def cmd_classical(args):
    k = parse_angle(args.k)
    alpha = parse_angle(args.alpha)
    pts = phase_portrait(k, alpha, args.n_init, args.n_iter, args.seed)
    if args.coords == "angles":
        cols, rows = ["theta", "phi"], to_angles(pts)
    else:
        cols, rows = ["X", "Y", "Z"], pts
    _emit(args, cols, rows, _meta(args, prng=PRNG_NAME))
    return 0


def cmd_sweep(args):
    return _run_measure(args, _MEASURE_NAMES[args.measure])


def _read_series(path):
    if path == "-":
        return series_from_csv(sys.stdin.read())
    with open(path) as fh:
        return series_from_csv(fh.read())


def cmd_check_period(args):
    series = _read_series(args.input)
    twice_j = parse_spin(args.j).twice_j if args.j else None
    if args.kappa is not None:
        kappa = parse_angle(args.kappa, twice_j)
    elif args.j is not None:
        kappa = kappa_period(parse_spin(args.j))
    else:
        raise ArgumentError("give --kappa or --j")
    report = check_period(series, kappa, args.tol)
    rows = report.as_rows()
    if args.divisors:
        try:
            divisors = [int(x) for x in args.divisors.split(",")]
        except ValueError:
            raise ArgumentError(f"--divisors must be a comma list of integers, got {args.divisors!r}") from None
        if any(n < 2 for n in divisors):
            raise ArgumentError("--divisors entries must be >= 2")
        rows.append(("minimal_period", minimal_period(series, kappa, divisors, args.tol)))
    _emit(args, ["quantity", "value"], rows, _meta(args, measure=series.measure_id))
    return 0


def cmd_reflection(args):
    spin = parse_spin(args.j)
    if args.input:
        series = _read_series(args.input)
        dk = parse_angle(args.dk, spin.twice_j) if args.dk else None
    else:
        if args.dk is None or args.m is None:
            raise ArgumentError("reflection without --input needs --dk and --m")
        dk = parse_angle(args.dk, spin.twice_j)
        start, stop, step = reflection_grid(kappa_period(spin), dk, args.k_step)
        spec = SweepSpec("LE", spin, parse_angle(args.alpha, spin.twice_j), args.m, start, stop, step, dk=dk)
        series = run_sweep(spec)
    report = reflection_check(series, spin, args.tol, dk=dk)
    _emit(args, ["quantity", "value"], report.as_rows(), _meta(args))
    return 0


def cmd_special_k(args):
    spin = parse_spin(args.j)
    alpha = parse_angle(args.alpha, spin.twice_j)
    angles = (parse_angle(args.theta, spin.twice_j), parse_angle(args.phi, spin.twice_j))
    offset = parse_angle(args.offset, spin.twice_j)
    o, g, e = special_k_scan(spin, alpha, args.m_max, offset, args.w_seed, angles, args.coarse_len)
    rows = ((int(m), a, b, c) for m, a, b, c in zip(o.axis, o.values, g.values, e.values))
    _emit(args, ["m", "otoc", "ge", "oe"], rows,
          _meta(args, k=spin.twice_j * np.pi / 2 + offset, prng=PRNG_NAME))
    return 0


_MEASURE_NAMES = {"otoc": "OTOC", "echo": "LE", "ge": "GE", "oe": "OE"}


# ---------------------------------------------------------------- parser


def _nonneg_int(text):
    try:
        val = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if val < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {val}")
    return val


def _pos_int(text):
    val = _nonneg_int(text)
    if val < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return val


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: argument error: {message}\n")


def _common(p, spin=True):
    if spin:
        p.add_argument("--j", required=True, help="spin as 'N' or 'N/2'")
        p.add_argument("--alpha", default="pi/4", help="precession angle, e.g. pi/4")
    p.add_argument("--out", default=None, help=f"output CSV (default stdout; relative paths go under ${OUT_DIR_ENV})")
    p.add_argument("--deterministic", action="store_true", help="omit the timestamp comment")


def _measure_args(p, measure):
    p.add_argument("--k", help="kick strength for a time series")
    p.add_argument("--k-start")
    p.add_argument("--k-stop")
    p.add_argument("--k-step")
    p.add_argument("--m", type=_nonneg_int, help="fixed time for a k sweep")
    p.add_argument("--m-max", type=_nonneg_int, help="last time step for a time series")
    if measure in ("otoc", "any"):
        p.add_argument("--w-seed", type=_nonneg_int, default=0, help="seed of the GOE observable")
        p.add_argument("--operator", choices=("goe", "jz"), default="goe")
    if measure in ("echo", "any"):
        p.add_argument("--k-prime")
        p.add_argument("--dk")
    if measure in ("ge", "oe", "any"):
        p.add_argument("--theta", default="pi/4")
        p.add_argument("--phi", default="pi/4")
    if measure in ("oe", "any"):
        p.add_argument("--coarse-len", type=_pos_int, default=2)


def build_parser():
    parser = _Parser(prog="kickedtop", description=__doc__.splitlines()[0].replace("``", ""))
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name in ("otoc", "echo", "ge", "oe"):
        p = sub.add_parser(name, help=f"{_MEASURE_NAMES[name]} as a k sweep or a time series")
        _common(p)
        _measure_args(p, name)
        p.set_defaults(func=lambda a, mid=_MEASURE_NAMES[name]: _run_measure(a, mid))

    p = sub.add_parser("sweep-k", help="k sweep of any measure at fixed m")
    _common(p)
    p.add_argument("--measure", choices=sorted(_MEASURE_NAMES), required=True)
    _measure_args(p, "any")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("quasi", help="sorted quasienergies of U(k)")
    _common(p)
    p.add_argument("--k", required=True)
    p.add_argument("--branch", choices=("half", "principal"), default="half",
                   help="half: arctan branch (-pi/2, pi/2]; principal: (-pi, pi]")
    p.set_defaults(func=cmd_quasi)

    p = sub.add_parser("classical", help="classical phase portrait")
    _common(p, spin=False)
    p.add_argument("--k", required=True)
    p.add_argument("--alpha", default="pi/2")
    p.add_argument("--n-init", type=_pos_int, default=100)
    p.add_argument("--n-iter", type=_pos_int, default=200)
    p.add_argument("--seed", type=_nonneg_int, default=0)
    p.add_argument("--coords", choices=("angles", "xyz"), default="angles")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("check-period", help="exact-shift period check of a series CSV")
    _common(p, spin=False)
    p.add_argument("--input", required=True, help="series CSV ('-' for stdin)")
    p.add_argument("--kappa", help="shift to test; defaults to kappa_j of --j")
    p.add_argument("--j")
    p.add_argument("--tol", type=float, default=PERIOD_TOL)
    p.add_argument("--divisors", help=f"comma list for a minimal-period search, e.g. "
                                      f"{','.join(map(str, DEFAULT_DIVISORS))}")
    p.set_defaults(func=cmd_check_period)

    p = sub.add_parser("reflection", help="echo mirror symmetry about kappa_j / 2")
    _common(p)
    p.add_argument("--input", help="echo k-series CSV; computed when omitted")
    p.add_argument("--dk")
    p.add_argument("--m", type=_nonneg_int)
    p.add_argument("--k-step", type=float, default=0.1)
    p.add_argument("--tol", type=float, default=PERIOD_TOL)
    p.set_defaults(func=cmd_reflection)

    p = sub.add_parser("special-k", help="OTOC, GE and OE time series at k = N pi / 2 + offset")
    _common(p)
    p.add_argument("--m-max", type=_nonneg_int, default=200)
    p.add_argument("--offset", default="0")
    p.add_argument("--w-seed", type=_nonneg_int, default=0)
    p.add_argument("--theta", default="pi/4")
    p.add_argument("--phi", default="pi/4")
    p.add_argument("--coarse-len", type=_pos_int, default=2)
    p.set_defaults(func=cmd_special_k)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ArgumentError, SpecError) as exc:
        print(f"kickedtop {args.command}: argument error: {exc}", file=sys.stderr)
        return 2
    except (ContractError, NumericalError, InvariantViolation) as exc:
        print(f"kickedtop {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except BrokenPipeError:
        # downstream closed the pipe (e.g. `| head`); silence the flush at interpreter exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 1
    except OSError as exc:
        print(f"kickedtop {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
