"""Command-line front end.

Exit codes: 0 success, 2 usage/config error, 3 resource or precision error,
4 internal invariant violation (e.g. identity residual over its error budget).
"""
from __future__ import annotations

import argparse
import re
import sys
from dataclasses import asdict, dataclass, fields
from fractions import Fraction

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_INVARIANT = 0, 2, 3, 4

COMMANDS = ("sum", "decompose", "convergents", "select-q", "sweep", "lemma1", "lemma2")

COLUMN_HELP = """columns per record type:
  sum          x,re,im,abs,err_bound,terms
  decompose    x,M,N,variant,s_re,s_im,t1_re,t1_im,t2_re,t2_im,sM_re,sM_im,sN_re,sN_im,residual,err_budget
  convergents  index,a,p,q
  select-q     x,tau,i,q_prev,q,xrange_ok,approx_ok
  sweep        x,M,abs_sum,emp_exponent,pred_exponent,eta,tau,q,xrange_ok,approx_ok,t1_bound,t2_bound,lemma1_ratio,lemma2_ratio,error
  lemma1       x,M,q,lhs,rhs,ratio,lhs_err
  lemma2       x,M,N,q,seq,lhs,rhs,ratio,lhs_err
CSV output starts with the line '# moebius-expsum v1'."""


class UsageError(Exception):
    pass


def parse_int(text: str) -> int:
    """Integer in plain decimal or as 1eK / 5e6 (exact)."""
    m = re.fullmatch(r"(\d+)(?:e(\d+))?", text)
    if not m:
        raise UsageError(f"not an integer: {text!r}")
    return int(m.group(1)) * 10 ** int(m.group(2) or 0)


def parse_x_range(text: str) -> list[int]:
    """``start:stop:xK`` -> start, start*K, ... up to and including stop."""
    m = re.fullmatch(r"([^:]+):([^:]+):x(\d+)", text)
    if not m:
        raise UsageError(f"x-range must look like start:stop:xK, got {text!r}")
    start, stop, factor = parse_int(m.group(1)), parse_int(m.group(2)), int(m.group(3))
    if factor < 2 or start < 1 or stop < start:
        raise UsageError(f"bad x-range {text!r}")
    xs = []
    x = start
    while x <= stop:
        xs.append(x)
        x *= factor
    return xs


@dataclass(frozen=True)
class RunConfig:
    command: str
    alpha: str | None = None
    xs: tuple = ()
    tau: Fraction | None = None
    M: int | None = None
    N: int | None = None
    epsilon: Fraction = Fraction(1, 20)
    eta: Fraction | None = None
    sieve_limit: int | None = None
    frac_bits: int = 256
    seed: int = 0
    format: str = "csv"
    output: str | None = None
    count: int = 10
    gamma_variant: str = "exact"
    seq: str = "mobius"
    lemmas: bool = False

    def canonical(self) -> dict:
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, Fraction):
                v = str(v)
            elif isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out

    @classmethod
    def from_canonical(cls, data: dict) -> "RunConfig":
        kw = dict(data)
        for key in ("tau", "epsilon", "eta"):
            if kw.get(key) is not None:
                kw[key] = Fraction(kw[key])
        kw["xs"] = tuple(kw.get("xs", ()))
        return cls(**kw)


def _frac(text):
    from .diophantine import parse_rational
    try:
        return parse_rational(text)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="moebius-expsum",
        description="Moebius-twisted exponential sums and Vaughan's identity.",
        epilog=COLUMN_HELP, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, xs=True):
        p.add_argument("--alpha", required=True,
                       help="quad:D | quad:P,D,Q | cf:a0,a1,... | liouville:ETA | golden")
        if xs:
            g = p.add_mutually_exclusive_group(required=True)
            g.add_argument("--x", help="single x (decimal or 1eK)")
            g.add_argument("--x-range", help="geometric range start:stop:xK")
        p.add_argument("--sieve-limit", help="sieve size (default: what the command needs)")
        p.add_argument("--frac-bits", type=int, default=256)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--output", help="output path (default: stdout)")
        p.add_argument("--workers", type=int, help="numba worker threads")
        p.add_argument("--memory-budget", type=int, default=2 * 1024**3,
                       help="sieve memory budget in bytes")

    p = sub.add_parser("sum", help="S(x)", epilog=COLUMN_HELP,
                       formatter_class=argparse.RawDescriptionHelpFormatter)
    common(p)
    p = sub.add_parser("decompose", help="Vaughan decomposition and residual")
    common(p)
    p.add_argument("--M")
    p.add_argument("--N")
    p.add_argument("--gamma-variant", choices=("exact", "literal"), default="exact")
    p = sub.add_parser("convergents", help="partial quotients and convergents")
    common(p, xs=False)
    p.add_argument("--count", type=int, default=10)
    p = sub.add_parser("select-q", help="convergent denominator for x and tau")
    common(p)
    p.add_argument("--tau")
    p = sub.add_parser("sweep", help="exponent sweep against the theorem's bound")
    common(p)
    p.add_argument("--tau")
    p.add_argument("--epsilon", default="1/20")
    p.add_argument("--eta", help="override the irrationality exponent")
    p.add_argument("--lemmas", action="store_true", help="add lemma ratios per row")
    p.add_argument("--emit-plot-data", help="write (log10 x, log10 |S|, pred*log10 x) CSV here")
    p.add_argument("--plot", help="render a matplotlib figure of the sweep to this path")
    for name in ("lemma1", "lemma2"):
        p = sub.add_parser(name, help=f"{name} ratio check")
        common(p)
        p.add_argument("--M")
        p.add_argument("--tau")
        if name == "lemma2":
            p.add_argument("--N")
            p.add_argument("--seq", choices=("mobius", "ones", "random"), default="mobius")
    return parser


def config_from_args(args) -> RunConfig:
    from .diophantine import format_alpha, parse_alpha
    try:
        alpha = format_alpha(parse_alpha(args.alpha))
    except ValueError as exc:
        raise UsageError(f"invalid --alpha: {exc}") from None
    xs = ()
    if getattr(args, "x", None) is not None:
        xs = (parse_int(args.x),)
    elif getattr(args, "x_range", None) is not None:
        xs = tuple(parse_x_range(args.x_range))
    if any(x < 1 for x in xs):
        raise UsageError("x must be positive")
    get = lambda name: getattr(args, name, None)  # noqa: E731
    return RunConfig(
        command=args.command, alpha=alpha, xs=xs,
        tau=_frac(get("tau")) if get("tau") else None,
        M=parse_int(get("M")) if get("M") else None,
        N=parse_int(get("N")) if get("N") else None,
        epsilon=_frac(get("epsilon")) if get("epsilon") else Fraction(1, 20),
        eta=_frac(get("eta")) if get("eta") else None,
        sieve_limit=parse_int(args.sieve_limit) if args.sieve_limit else None,
        frac_bits=args.frac_bits, seed=args.seed, format=args.format, output=args.output,
        count=get("count") or 10, gamma_variant=get("gamma_variant") or "exact",
        seq=get("seq") or "mobius", lemmas=bool(get("lemmas")))


def _tables(cfg, need, budget):
    from .arith import build_tables
    limit = cfg.sieve_limit or need
    if limit < need:
        raise UsageError(f"--sieve-limit {limit} below required {need}")
    return build_tables(limit, budget)


def _tau_for(cfg, spec):
    from .analysis import resolve_eta
    from .diophantine import default_tau
    return cfg.tau if cfg.tau is not None else default_tau(resolve_eta(spec, cfg.eta))


def run(cfg: RunConfig, n_workers=None, budget=2 * 1024**3, plot_data_path=None, plot_path=None):
    """Execute a config; returns (record_type, rows, exit_code)."""
    from . import analysis, diophantine, expsum

    spec = diophantine.parse_alpha(cfg.alpha)
    cmd = cfg.command
    if cmd == "convergents":
        terms = diophantine.cf_terms(spec, cfg.count)
        convs = diophantine.convergents(spec, cfg.count)
        return cmd, [dict(index=c.index, a=int(a), p=int(c.p), q=int(c.q))
                     for a, c in zip(terms, convs)], EXIT_OK
    if cmd == "select-q":
        tau = _tau_for(cfg, spec)
        rows = []
        for x in cfg.xs:
            s = diophantine.select_q(spec, x, tau, cfg.frac_bits)
            rows.append(dict(x=x, tau=s.tau, i=s.i, q_prev=s.q_prev, q=s.q,
                             xrange_ok=s.xrange_ok, approx_ok=s.approx_ok))
        return cmd, rows, EXIT_OK

    alpha = diophantine.alpha_fixed_point(spec, cfg.frac_bits)
    xmax = max(cfg.xs)
    if cmd == "sum":
        tables = _tables(cfg, xmax, budget)
        rows = []
        for x in cfg.xs:
            s = expsum.mobius_sum(x, alpha, tables, n_workers=n_workers)
            rows.append(dict(x=x, re=s.re, im=s.im, abs=s.abs, err_bound=s.err_bound,
                             terms=s.terms))
        return cmd, rows, EXIT_OK
    if cmd == "decompose":
        tables = _tables(cfg, xmax, budget)
        rows, code = [], EXIT_OK
        for x in cfg.xs:
            M = cfg.M or analysis.ceil_two_fifths(x)
            N = cfg.N or analysis.ceil_two_fifths(x)
            d = expsum.vaughan_decompose(x, M, N, alpha, tables, cfg.gamma_variant, n_workers)
            if cfg.gamma_variant == "exact" and not d.within_budget:
                code = EXIT_INVARIANT
            rows.append(dict(x=x, M=M, N=N, variant=d.variant,
                             s_re=d.s_total.re, s_im=d.s_total.im, t1_re=d.t1.re, t1_im=d.t1.im,
                             t2_re=d.t2.re, t2_im=d.t2.im, sM_re=d.s_M.re, sM_im=d.s_M.im,
                             sN_re=d.s_N.re, sN_im=d.s_N.im, residual=d.residual,
                             err_budget=d.err_budget))
        return cmd, rows, code
    if cmd == "sweep":
        tables = _tables(cfg, xmax, budget)
        recs = analysis.theorem_sweep(spec, list(cfg.xs), tables, tau=cfg.tau,
                                      epsilon=cfg.epsilon, eta=cfg.eta, frac_bits=cfg.frac_bits,
                                      lemmas=cfg.lemmas, seed=cfg.seed, n_workers=n_workers)
        rows = [asdict(r) for r in recs]
        return cmd, rows, EXIT_OK
    if cmd in ("lemma1", "lemma2"):
        tau = _tau_for(cfg, spec)
        rows = []
        tables = None
        if cmd == "lemma2" and cfg.seq == "mobius":
            tables = _tables(cfg, xmax, budget)
        for x in cfg.xs:
            sel = diophantine.select_q(spec, x, tau, alpha=alpha)
            M = cfg.M or analysis.ceil_two_fifths(x)
            if cmd == "lemma1":
                r = analysis.lemma1_check(x, M, alpha, sel)
            else:
                N = cfg.N or analysis.ceil_two_fifths(x)
                r = analysis.lemma2_check(x, M, N, alpha, sel, cfg.seq, tables, cfg.seed,
                                          n_workers)
            rows.append(asdict(r))
        return cmd, rows, EXIT_OK
    raise UsageError(f"unknown command {cmd}")


def _write(text, path):
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    from . import records
    from .errors import (CapacityError, InsufficientTermsError, InvariantError,
                         PrecisionError, SelectionError)

    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = config_from_args(args)
        rtype, rows, code = run(cfg, n_workers=args.workers, budget=args.memory_budget)
    except (UsageError, ValueError, InsufficientTermsError, SelectionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CapacityError, PrecisionError, IndexError, MemoryError) as exc:
        print(f"resource error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT

    if cfg.format == "json":
        text = records.dumps_json(rows, rtype, cfg.canonical())
    else:
        text = records.dumps_csv(rows, rtype)
    _write(text, cfg.output)

    if rtype == "sweep":
        from . import plotting
        if args.emit_plot_data:
            _write(records.dumps_csv(plotting.plot_data(rows), "plot-data"), args.emit_plot_data)
        if args.plot:
            plotting.render_sweep(rows, args.plot, title=cfg.alpha)
    if code == EXIT_INVARIANT:
        print("invariant violation: identity residual exceeds its error budget", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
