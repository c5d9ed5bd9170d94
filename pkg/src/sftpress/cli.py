"""Command-line interface.

Exit codes: 0 success, 2 usage or input error, 3 budget exceeded,
4 verification failure.
"""
from __future__ import annotations

import argparse
import random
import sys
import warnings
from fractions import Fraction
from math import log
from pathlib import Path

import numpy as np

from . import _config
from ._config import BudgetExceeded, VerificationError
from .freegroup.automaton import DualMetricAutomaton, dual_potential, geodesic_automaton, verify_dual
from .freegroup.metrics import tau_empirical
from .freegroup.words import GenSet, necklace_array, necklace_count
from .io import AutomatonFormatError, ResultTable, curve_svg, example_path, load_automaton, save_automaton
from .orbits import birkhoff_distribution, count_window, enumerate_cycles, trace_power
from .sft import primitivity, scc_decompose, spectral_radius
from .shrink import QuadraticSurd, extremal_means, rational_orbit, shrink_constant, shrink_orbits
from .thermo import (
    EdgePotential,
    ManhattanCurve,
    as_fraction,
    delta_r,
    equilibrium_measure,
    pressure,
    pressure_two,
    rate_function,
    theta_residual,
)

EXIT_OK, EXIT_USAGE, EXIT_BUDGET, EXIT_VERIFY = 0, 2, 3, 4


class UsageError(ValueError):
    pass


# ---------------------------------------------------------------------------
# helpers


def parse_number(text, exact=True):
    """``"p/q"``, decimals (read exactly), ``"phi"`` or ``"a+b*sqrt(c)"``."""
    t = str(text).strip()
    if "sqrt" in t.lower() or t.lower() in ("phi", "golden"):
        return QuadraticSurd.parse(t)
    try:
        return Fraction(t) if exact else float(t)
    except ValueError as exc:
        raise UsageError(f"cannot parse number {text!r}") from exc


def _resolve(path):
    p = Path(path)
    if p.exists():
        return p
    ex = example_path(path)
    if ex.exists():
        return ex
    raise UsageError(f"no such automaton file or example: {path}")


def _coding(args):
    """Automaton, maximal-component shift, roof and potential."""
    auto = load_automaton(_resolve(args.file))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        sft, r, psi, emap = auto.maximal_component()
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if args.exact:
        if psi.exact is None:
            psi = EdgePotential([as_fraction(v) for v in psi.values.tolist()])
        if r.exact is None:
            r = type(r)([as_fraction(v) for v in r.values.tolist()])
    return auto, sft, r, psi


def _emit(args, table: ResultTable, svg=None):
    fmt = args.format
    if fmt == "svg":
        if svg is None:
            raise UsageError("--format svg is only available for manhattan")
        text = svg
    else:
        text = table.render(fmt)
    if args.output:
        Path(args.output).write_text(text if text.endswith("\n") else text + "\n")
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _default_s_range(sft, psi):
    if (psi.values > 0).all():
        return 0.0, delta_r(sft, psi.values)
    return 0.0, 1.0


# ---------------------------------------------------------------------------
# commands


def cmd_components(args):
    from .sft import Sft

    auto = load_automaton(_resolve(args.file))
    sft = Sft(auto.n_states, sorted({(a, b) for a, b, _ in auto.edges}), names=auto.names or None)
    dec = scc_decompose(sft)
    # parallel edges count towards the growth rate
    A = np.zeros((auto.n_states, auto.n_states))
    for a, b, _ in auto.edges:
        A[a, b] += 1
    radii = []
    for c in range(dec.n_components):
        idx = dec.states(c)
        radii.append(float(spectral_radius(A[np.ix_(idx, idx)])) if dec.recurrent[c] else 0.0)
    top = max(radii)
    t = ResultTable(["component", "states", "recurrent", "spectral_radius", "maximal"])
    for c in range(dec.n_components):
        states = ",".join(sft.names[s] if sft.names else str(s) for s in dec.states(c).tolist())
        t.add(c, states, bool(dec.recurrent[c]), radii[c], bool(dec.recurrent[c]) and radii[c] >= top * (1 - 1e-12))
    t.meta["growth_rate"] = float(spectral_radius(A))
    _emit(args, t)


def cmd_pressure(args):
    _, sft, r, psi = _coding(args)
    t = ResultTable(["a", "s", "pressure"])
    for a in args.a:
        for s in args.s:
            t.add(float(a), float(s), pressure_two(sft, r, psi, a, s))
    t.meta["delta_r"] = delta_r(sft, r)
    _emit(args, t)


def cmd_manhattan(args):
    _, sft, r, psi = _coding(args)
    lo, hi = _default_s_range(sft, psi)
    lo = lo if args.s_min is None else args.s_min
    hi = hi if args.s_max is None else args.s_max
    n = args.samples or 25
    svals = np.linspace(lo, hi, n) if n > 1 else np.array([lo])
    order = list(range(n))
    random.Random(args.seed).shuffle(order)  # sampling order only
    curve = ManhattanCurve(sft, r, psi)
    for i in order:
        curve.theta(svals[i])
    t = ResultTable(["s", "theta", "dtheta", "residual"])
    for s in svals.tolist():
        t.add(s, curve.theta(s), curve.derivative(s), theta_residual(curve, s))
    svg = None
    if args.format == "svg":
        svg = curve_svg(
            [(row[0], row[1]) for row in t.rows], [row[2] for row in t.rows], title="Manhattan curve theta(s)"
        )
    _emit(args, t, svg)


def cmd_rate(args):
    _, sft, r, psi = _coding(args)
    rf = rate_function(sft, psi)
    etas = [parse_number(e, args.exact) for e in (args.eta or [])]
    if not etas:
        n = args.samples or 11
        a, b = float(rf.alpha_min), float(rf.alpha_max)
        etas = [a + (b - a) * i / (n - 1) for i in range(n)] if n > 1 else [0.5 * (a + b)]
    t = ResultTable(["eta", "t", "rate", "growth", "boundary"])
    for eta in etas:
        pt = rf.solve(eta if not isinstance(eta, QuadraticSurd) else float(eta))
        t.add(eta, pt.t if pt.t is not None else float("nan"), pt.value, rf.entropy - pt.value, pt.boundary)
    t.meta.update({"alpha_min": rf.alpha_min, "alpha_max": rf.alpha_max, "entropy": rf.entropy})
    _emit(args, t)


def cmd_extremes(args):
    _, sft, r, psi = _coding(args)
    ex = extremal_means(sft, psi)
    info = primitivity(sft, 0)
    t = ResultTable(["alpha_min", "alpha_max", "witness_min_period", "witness_max_period", "l", "period", "M"])
    t.add(ex.alpha_min, ex.alpha_max, ex.witness_min.period, ex.witness_max.period, ex.l, info.period, info.index)
    if info.aperiodic and psi.exact is not None:
        c0 = shrink_constant(info.index, sft.k, ex.spread)
        t.meta.update({"k": sft.k, "c0": c0, "C": float(c0) / 5**0.5})
    _emit(args, t)


def cmd_count(args):
    _, sft, r, psi = _coding(args)
    eta = parse_number(args.eta)
    delta = parse_number(args.delta)
    t = ResultTable(["n", "eta", "delta", "count", "total", "log_count_over_n"])
    for n in args.n:
        w = count_window(sft, psi, n, eta, delta)
        t.add(n, w.eta, w.delta, w.count, w.total, log(w.count) / n if w.count else float("-inf"))
    _emit(args, t)


def cmd_shrink(args):
    _, sft, r, psi = _coding(args)
    eta = parse_number(args.eta)
    certs = shrink_orbits(sft, psi, eta, args.count)
    t = ResultTable(["length", "mean", "error", "bound", "satisfied", "interval", "n", "n1", "n2"])
    for c in certs:
        t.add(c.length, c.mean, c.error, c.bound, c.satisfied, c.interval, *c.triple)
    if certs:
        t.meta.update({"eta": str(eta), "c0": certs[0].c0, "C": certs[0].C})
    _emit(args, t)
    if not all(c.satisfied for c in certs):
        raise VerificationError("a shrinking certificate failed its bound")


def cmd_rational(args):
    _, sft, r, psi = _coding(args)
    if args.mean is not None:
        q = parse_number(args.mean)
        if not isinstance(q, Fraction):
            raise UsageError("--mean must be rational")
        p_, q_ = q.numerator, q.denominator
    else:
        if args.p is None or args.q is None:
            raise UsageError("give --mean p/q or both --p and --q")
        p_, q_ = args.p, args.q
    cyc = rational_orbit(sft, psi, p_, q_)
    hits = count_window(sft, psi, cyc.period, Fraction(p_, q_), 0).count
    t = ResultTable(["period", "mean", "start", "states", "exact_hits"])
    t.add(cyc.period, cyc.mean(), cyc.start, " ".join(str(s) for s in cyc.states(sft)), hits)
    _emit(args, t)


def _gens(text, rank):
    return GenSet.parse(text, rank=rank)


def cmd_fg_automaton(args):
    g = _gens(args.gens, args.rank)
    auto = geodesic_automaton(args.rank, g, rho=args.rho, verify_depth=args.verify_depth)
    if args.save:
        save_automaton(auto, args.save)
    t = ResultTable(["n", "sphere"])
    for n, c in enumerate(auto.spheres):
        t.add(n, c)
    A = np.zeros((auto.n_states, auto.n_states))
    for a, b, _ in auto.edges:
        A[a, b] += 1
    t.meta.update(
        {"states": auto.n_states, "edges": len(auto.edges), "rho": auto.rho, "growth": float(spectral_radius(A))}
    )
    _emit(args, t)


def cmd_fg_dual(args):
    g = _gens(args.gens, args.rank)
    auto = geodesic_automaton(args.rank, g, rho=args.rho, verify_depth=args.verify_depth)
    dual = dual_potential(auto, g, _gens(args.other, args.rank), memory=args.memory,
                          verify_cycles_to=args.verify_cycles_to)
    if args.save:
        save_automaton(dual, args.save)
    sft, r, psi, _ = dual.maximal_component()
    ex = extremal_means(sft, psi)
    t = ResultTable(["states", "edges", "memory", "alpha_min", "alpha_max", "verified_cycles_to"])
    t.add(dual.n_states, len(dual.edges), dual.meta["memory"], ex.alpha_min, ex.alpha_max, args.verify_cycles_to)
    _emit(args, t)


def cmd_fg_tau(args):
    base = _gens(args.base, args.rank)
    other = _gens(args.other, args.rank)
    est = tau_empirical(args.rank, base, other, args.T)
    t = ResultTable(["T", "classes", "tau", "tau_float"])
    t.add(args.T, est.count, est.mean, est.value)
    _emit(args, t)


def cmd_fg_necklaces(args):
    t = ResultTable(["n", "necklaces", "burnside"])
    for n in range(1, args.max_len):
        t.add(n, int(necklace_array(args.rank, n).shape[0]), necklace_count(args.rank, n))
    _emit(args, t)


def run_checks(auto: DualMetricAutomaton, max_n=8):
    """Invariant suite; returns rows ``(check, ok, detail)``."""
    rows = []

    def add(name, ok, detail=""):
        rows.append((name, bool(ok), str(detail)))

    add("roof positive", all(float(x) > 0 for x in auto.r), f"{len(auto.r)} edges")
    sft, r, psi, emap = auto.maximal_component()
    add("maximal component irreducible", sft.is_irreducible, f"{sft.k} states, {sft.n_edges} edges")
    rho = spectral_radius(sft.matrix.astype(float))
    P0 = pressure(sft, np.zeros(sft.n_edges))
    add("pressure(0) = log spectral radius", abs(P0 - log(rho)) <= 1e-9, f"{P0:.12g}")
    for name, w in (("0", np.zeros(sft.n_edges)), ("-psi", -psi.values), ("-r", -r.values)):
        em = equilibrium_measure(sft, w)
        inflow = np.bincount(sft.dst, weights=em.mu, minlength=sft.k)
        outflow = np.bincount(sft.src, weights=em.mu, minlength=sft.k)
        stat = float(np.abs(inflow - outflow).max())
        var = abs(em.entropy + float(em.mu @ w) - em.pressure)
        add(f"equilibrium({name}) stationary", stat <= _config.STATIONARITY_TOL, f"{stat:.2e}")
        add(f"equilibrium({name}) variational", var <= _config.VARIATIONAL_TOL, f"{var:.2e}")
    curve = ManhattanCurve(sft, r, psi)
    lo, hi = _default_s_range(sft, psi)
    worst = 0.0
    worst_fd = 0.0
    for s in np.linspace(lo, hi, 7).tolist():
        worst = max(worst, abs(theta_residual(curve, s)))
        h = 1e-5
        fd = (curve.theta(s + h) - curve.theta(s - h)) / (2 * h)
        worst_fd = max(worst_fd, abs(fd - curve.derivative(s)))
    add("manhattan residual", worst <= 1e-10, f"{worst:.2e}")
    add("manhattan derivative vs finite difference", worst_fd <= 1e-6, f"{worst_fd:.2e}")
    ex = extremal_means(sft, psi)
    ok = True
    n_done = 0
    for n in range(1, max_n + 1):
        if trace_power(sft, n) > 200_000:
            break
        for c in enumerate_cycles(sft, n, {"psi": psi}):
            m = c.mean()
            if m < ex.alpha_min or m > ex.alpha_max:
                ok = False
        n_done = n
    add("cycle means within [alpha_min, alpha_max]", ok, f"alpha in [{ex.alpha_min}, {ex.alpha_max}], n <= {n_done}")
    if psi.exact is not None:
        ok = True
        for n in range(1, max_n + 1):
            _, counts = birkhoff_distribution(sft, psi, n)
            ok &= sum(counts) == trace_power(sft, n)
        add("exact counts sum to tr(A^n)", ok, f"n <= {max_n}")
    rf = rate_function(sft, psi)
    if not rf.degenerate:
        at_mean = rf(rf.mean)
        add("rate vanishes at the mean", abs(at_mean) <= 1e-9, f"{at_mean:.2e}")
    meta = auto.meta or {}
    if "gens" in meta and "other" in meta:
        rank = int(meta.get("rank", 2))
        gens = GenSet(meta["gens"], rank=rank)
        other = GenSet(meta["other"], rank=rank)
        try:
            verify_dual(auto, gens, other, max_n)
            add("dual contract on cycles", True, f"length <= {max_n}")
        except VerificationError as exc:
            add("dual contract on cycles", False, str(exc))
    return rows


def cmd_verify(args):
    auto = load_automaton(_resolve(args.file))
    rows = run_checks(auto, max_n=args.max_n)
    t = ResultTable(["check", "ok", "detail"])
    for row in rows:
        t.add(*row)
    _emit(args, t)
    bad = [r[0] for r in rows if not r[1]]
    if bad:
        raise VerificationError("failed checks: " + ", ".join(bad))


# ---------------------------------------------------------------------------
# parser


def _global_flags(p, suppress):
    d = argparse.SUPPRESS if suppress else None

    def dflt(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--tolerance", type=float, default=d, help="root-finding tolerance on pressure residuals")
    p.add_argument("--samples", type=int, default=d, help="number of samples")
    p.add_argument("--budget", default=d, help='budget overrides "key=value,..."')
    p.add_argument("--seed", type=int, default=dflt(0), help="seed for sampling order (never affects values)")
    p.add_argument("--format", choices=["csv", "json", "svg"], default=dflt("json"))
    p.add_argument("--exact", action="store_true", default=dflt(False), help="force the rational pipeline")
    p.add_argument("-o", "--output", default=d, help="write output here instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(prog="sftpress", description=__doc__.splitlines()[0], allow_abbrev=False)
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    _global_flags(common, suppress=True)

    def add(name, fn, help_, file=True):
        p = sub.add_parser(name, help=help_, parents=[common], allow_abbrev=False)
        if file:
            p.add_argument("file", help="automaton JSON file or example name")
        p.set_defaults(func=fn)
        return p

    add("components", cmd_components, "strongly connected components")
    p = add("pressure", cmd_pressure, "pressure P(-a r - s psi)")
    p.add_argument("--a", type=float, nargs="+", default=[0.0])
    p.add_argument("--s", type=float, nargs="+", default=[0.0])
    p = add("manhattan", cmd_manhattan, "sampled Manhattan curve")
    p.add_argument("--s-min", type=float)
    p.add_argument("--s-max", type=float)
    p = add("rate", cmd_rate, "large-deviation rate function")
    p.add_argument("--eta", "--eta-at", dest="eta", action="append")
    add("extremes", cmd_extremes, "extremal cycle means and the shrink constant")
    p = add("count", cmd_count, "exact periodic-point window counts")
    p.add_argument("--n", type=int, nargs="+", required=True)
    p.add_argument("--eta", required=True)
    p.add_argument("--delta", default="0")
    p = add("shrink", cmd_shrink, "shrinking-interval orbit certificates")
    p.add_argument("--eta", required=True)
    p.add_argument("--count", type=int, default=5)
    p = add("rational", cmd_rational, "periodic orbit with an exact rational mean")
    p.add_argument("--mean")
    p.add_argument("--p", type=int)
    p.add_argument("--q", type=int)
    p = add("verify", cmd_verify, "invariant suite on an automaton file")
    p.add_argument("--max-n", type=int, default=8)

    fg = sub.add_parser("freegroup", help="free-group metrics and codings", parents=[common], allow_abbrev=False)
    fsub = fg.add_subparsers(dest="fg_command", required=True)

    def fadd(name, fn, help_):
        q = fsub.add_parser(name, help=help_, parents=[common], allow_abbrev=False)
        q.add_argument("--rank", type=int, default=2)
        q.set_defaults(func=fn)
        return q

    q = fadd("automaton", cmd_fg_automaton, "shortlex geodesic automaton")
    q.add_argument("--gens", default="a,b")
    q.add_argument("--rho", type=int)
    q.add_argument("--verify-depth", type=int, default=8)
    q.add_argument("--save")
    q = fadd("dual", cmd_fg_dual, "dual potential for a second generating set")
    q.add_argument("--gens", default="a,b,ab")
    q.add_argument("--other", default="a,b")
    q.add_argument("--rho", type=int)
    q.add_argument("--verify-depth", type=int, default=8)
    q.add_argument("--memory", type=int)
    q.add_argument("--verify-cycles-to", type=int, default=8)
    q.add_argument("--save")
    q = fadd("tau", cmd_fg_tau, "average length ratio over conjugacy classes")
    q.add_argument("--base", default="a,b")
    q.add_argument("--other", default="a,b,ab")
    q.add_argument("--T", type=float, default=10)
    q = fadd("necklaces", cmd_fg_necklaces, "necklace counts per length")
    q.add_argument("--max-len", type=int, default=8)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    # overrides last for this call only, so embedding callers keep their settings
    saved_budget, saved_tol = dict(_config.BUDGET), _config.ROOT_TOL
    try:
        if args.budget:
            _config.apply_budget(args.budget)
        if args.tolerance:
            _config.ROOT_TOL = float(args.tolerance)
        args.func(args)
    except BudgetExceeded as exc:
        print(f"error: budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except VerificationError as exc:
        print(f"error: verification failed: {exc}", file=sys.stderr)
        return EXIT_VERIFY
    except (UsageError, AutomatonFormatError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        _config.BUDGET.clear()
        _config.BUDGET.update(saved_budget)
        _config.ROOT_TOL = saved_tol
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
