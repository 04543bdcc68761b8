"""Command line entry point.

Exit codes: 0 when every verdict passes, 1 when a mathematical verdict fails
(witnesses are in the report), 2 for usage or configuration errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys

import jsonschema

from . import combinatorics, counting, kclass, lemmas, reports, sieve
from .expsums import FAMILIES, SumSpec, evaluate
from .multfun import constant_one, load_multfun, random_table, sharpness_k, sharpness_squarefree

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _k_value(text: str):
    if text == "all":
        return "all"
    try:
        k = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError("k must be a positive integer or 'all'") from exc
    if k < 1:
        raise argparse.ArgumentTypeError("k must be positive")
    return k


def _common(suppress: bool) -> argparse.ArgumentParser:
    """Global flags, accepted before or after the subcommand."""
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--backend", choices=("exact", "numeric"), default=d("exact"))
    g.add_argument("--precision-bits", type=int, default=d(100))
    g.add_argument("--threads", type=int, default=d(1),
                   help="accepted for compatibility; computations run in one thread")
    g.add_argument("--seed", type=int, default=d(0))
    fmt = g.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="fmt", action="store_const", const="json", default=d("json"))
    fmt.add_argument("--csv", dest="fmt", action="store_const", const="csv", default=d("json"))
    g.add_argument("--out", default=d(None), help="write the report here instead of stdout")
    g.add_argument("--constant-C", dest="constant_C", type=float, default=d(1.0),
                   help="Hardy-Ramanujan type constant C entering beta = 14 + 2C")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twistsum", parents=[_common(False)],
                                     description="Kloosterman-type sums: evaluation, counting and finite checks.")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _common(True)

    s = sub.add_parser("sum", parents=[common], help="evaluate one exponential sum")
    s.add_argument("--family", choices=sorted(set(FAMILIES) | {"kl"}), default="kloosterman")
    s.add_argument("-a", "--a", type=int, required=True)
    s.add_argument("-b", "--b", type=int, default=1)
    s.add_argument("-c", "--c", type=int, required=True, help="modulus")
    s.add_argument("--range", dest="rng", choices=("unit-range", "full-range"), default="unit-range",
                   help="summation range for Birch and generic sums")
    s.add_argument("--g", type=_int_list, default=None, help="coefficients of g, constant term first")
    s.add_argument("--h", type=_int_list, default=None, help="coefficients of h, constant term first")
    s.add_argument("--twist", choices=("none", "jacobi"), default="none")

    sv = sub.add_parser("sieve", parents=[common], help="primes and square-free almost primes")
    sv.add_argument("--what", choices=("primes", "almost", "pi-k"), default="almost")
    sv.add_argument("--X", type=int, required=True)
    sv.add_argument("--k", type=int, default=2)
    sv.add_argument("--y", "--smooth", dest="y", type=int, default=None, help="smoothness bound")
    sv.add_argument("--C1", type=float, default=1.0)
    sv.add_argument("--C2", type=float, default=1.0)

    c = sub.add_parser("count", parents=[common], help="matched sets R_k(X) and theorem bounds")
    c.add_argument("-a", "--a", type=int, default=1)
    c.add_argument("-b", "--b", type=int, default=1)
    c.add_argument("--mode", choices=("exact", "numeric"), default=None, help="equality mode (overrides --backend)")
    c.add_argument("--k", type=_k_value, default=2)
    c.add_argument("--X", type=int, default=None)
    c.add_argument("--sweep", type=_int_list, default=None, help="comma-separated X grid (CSV table)")
    c.add_argument("--f", dest="f", choices=("sharpness-k", "sharpness-squarefree", "one", "random", "file"),
                   default="sharpness-k")
    c.add_argument("--f-file", default=None, help="JSON multiplicative-function file (with --f file)")
    c.add_argument("--eta", default="1", help="eta, or comma-separated eta_1,eta_2,...")
    c.add_argument("--exceptional-scan", type=int, default=None)
    c.add_argument("--cap-M", type=int, default=counting.DEFAULT_CAP_M)
    c.add_argument("--verify-lemmas", action="store_true", help="also run the divisor and intersection checks")

    lm = sub.add_parser("lemma", parents=[common], help="run a named lemma suite")
    lm.add_argument("--suite", required=True, choices=lemmas.SUITE_NAMES + ("all",))
    lm.add_argument("--prime-bound", type=int, default=None)
    lm.add_argument("--X", type=int, default=None)
    lm.add_argument("--trials", type=int, default=None)
    lm.add_argument("--cross-checks", type=int, default=None)

    cl = sub.add_parser("class", parents=[common], help="kloostermanian classification checks")
    cl.add_argument("--family", choices=("kloosterman", "birch", "salie"), default="birch")
    cl.add_argument("-a", "--a", type=int, required=True)
    cl.add_argument("-b", "--b", type=int, required=True)
    cl.add_argument("--prime-bound", type=int, default=60)
    cl.add_argument("--mult-bound", type=int, default=100)

    ss = sub.add_parser("setsys", parents=[common], help="extremal set-system checks")
    ss.add_argument("--file", default=None, help="JSON set system {N, t, subsets}")
    ss.add_argument("--random", action="store_true", help="seeded random trials (the default without --file)")
    ss.add_argument("--trials", type=int, default=1000)
    ss.add_argument("--cross-checks", type=int, default=100)

    pr = sub.add_parser("probe", parents=[common], help="search a box for kloostermanian candidates")
    pr.add_argument("--g", type=_int_list, required=True)
    pr.add_argument("--h", type=_int_list, required=True)
    pr.add_argument("--variant", choices=("unit-range", "full-range"), default="unit-range")
    pr.add_argument("--twist", choices=("none", "jacobi"), default="none")
    pr.add_argument("--box", type=int, default=2)
    pr.add_argument("--prime-bound", type=int, default=40)
    pr.add_argument("--mult-bound", type=int, default=40)
    return parser


# subcommands: each returns (result, passed, warnings, csv_text or None) ----------------

def _cmd_sum(args):
    fam = "kloosterman" if args.family == "kl" else args.family
    b = 1 if args.family == "kl" else args.b
    if fam == "generic" and (args.g is None or args.h is None):
        raise UsageError("generic sums need --g and --h")
    spec = SumSpec(fam, args.a, b, args.c, tuple(args.g or ()), tuple(args.h or ()),
                   variant=args.rng, twist=args.twist, birch_range=args.rng)
    val = evaluate(spec, args.backend, args.precision_bits)
    res = val.to_json(args.precision_bits)
    num = res["numeric"]
    res["value"] = f"{num['re']} + {num['im']}i"
    table = None
    if args.fmt == "csv":
        table = _rows_csv([["family", "a", "b", "c", "re", "im", "error_bound"],
                           [fam, args.a, b, args.c, num["re"], num["im"], num["error_bound"]]])
    return res, True, [], table


def _cmd_sieve(args):
    if args.what == "pi-k":
        text = sieve.pi_k_table_csv(args.X, args.k, args.C1, args.C2)
        rows = list(csv.reader(io.StringIO(text)))
        return {"table": rows}, True, [], text
    if args.what == "primes":
        vals = sieve.primes_up_to(args.X)
    elif args.y is not None:
        vals = sieve.squarefree_k_almost_smooth(args.X, args.k, args.y)
    else:
        vals = sieve.squarefree_k_almost(args.X, args.k)
    text = sieve.enumeration_csv(args.X, args.k, args.y) if args.what == "almost" else \
        _rows_csv([["p"]] + [[v] for v in vals])
    return {"count": len(vals), "values": vals}, True, [], text


def _make_f(args, k):
    eta = [e.strip() for e in args.eta.split(",")]
    eta = eta if len(eta) > 1 else eta[0]
    if args.f == "sharpness-k":
        if k == "all":
            raise UsageError("sharpness-k needs a fixed k")
        return sharpness_k(args.a, args.b, eta, k)
    if args.f == "sharpness-squarefree":
        return sharpness_squarefree(args.a, args.b, eta)
    if args.f == "one":
        return constant_one(eta)
    if args.f == "random":
        return random_table(args.seed, eta)
    if not args.f_file:
        raise UsageError("--f file needs --f-file")
    return load_multfun(args.f_file, args.a, args.b)


def _cmd_count(args):
    mode = args.mode or args.backend
    if args.sweep:
        if args.k == "all":
            raise UsageError("sweeps need a fixed k")
        f = _make_f(args, args.k)
        text = counting.sweep_csv(args.a, args.b, f, args.k, args.sweep, mode)
        rows = list(csv.DictReader(io.StringIO(text)))
        passed = all(r["thm1_verdict"] == "True" for r in rows)
        return {"sweep": rows}, passed, [], text
    if args.X is None:
        raise UsageError("count needs --X or --sweep")
    f = _make_f(args, args.k)
    q = counting.MatchQuery(args.a, args.b, f, args.X, args.k, mode, args.cap_M, args.constant_C,
                            args.exceptional_scan)
    rep = counting.compute_matches(q)
    if args.verify_lemmas and args.k != "all":
        r1 = counting.r1_primes_from(rep, args.X)
        scan = counting.divisor_scan(rep, args.a, args.b, r1)
        rep.extra["divisor_scan"] = scan
        rep.verdicts["divisor_lemmas"] = scan["violations"] + scan["r1_violations"] == 0
        inter = counting.verify_intersection_bounds(rep, args.a, args.b, args.k, args.X, r1)
        rep.extra["intersection"] = [v.to_json() for v in inter]
        rep.verdicts["intersection_bounds"] = all(v.status != "fail" for v in inter)
    res = rep.to_json()
    passed = all(v is not False for v in rep.verdicts.values())
    table = None
    if args.fmt == "csv":
        table = _rows_csv([["n"]] + [[n] for n in rep.matched])
    return res, passed, rep.warnings, table


def _cmd_lemma(args):
    names = lemmas.SUITE_NAMES if args.suite == "all" else (args.suite,)
    overrides = {"prime_bound": args.prime_bound, "X": args.X, "trials": args.trials,
                 "cross_checks": args.cross_checks, "precision_bits": args.precision_bits, "seed": args.seed}
    results = [lemmas.run_suite(n, **overrides) for n in names]
    res = results[0] if len(results) == 1 else {"suites": results}
    table = _rows_csv([["suite", "pass"]] + [[r["suite"], r["pass"]] for r in results])
    return res, all(r["pass"] for r in results), [], table


def _cmd_class(args):
    if args.family == "birch":
        res = kclass.classify_birch(args.a, args.b, args.prime_bound, args.mult_bound)
    elif args.family == "salie":
        res = kclass.check_kloostermanian(kclass.FamilyHandle("salie", args.a, args.b), args.prime_bound,
                                          args.mult_bound)
        res["condition"] = kclass.salie_condition(args.a, args.b)
        res["vanishing_primes"] = kclass.salie_bad_prime_scan(args.a, args.b, args.prime_bound)
    else:
        res = kclass.check_kloostermanian(kclass.FamilyHandle("kloosterman", args.a, args.b), args.prime_bound,
                                          args.mult_bound)
    table = _rows_csv([["family", "a", "b", "pass"], [args.family, args.a, args.b, res["pass"]]])
    return res, res["pass"], [], table


def _cmd_setsys(args):
    if args.file:
        with open(args.file) as fh:
            system = combinatorics.SetSystem.from_json(json.load(fh))
        verdict = combinatorics.check_lemma(system)
        res = {"system": system.to_json(), "verdict": verdict,
               "hypothesis": combinatorics.check_hypothesis(system),
               "bound": combinatorics.extremal_bound(system.m, system.ground_size, system.t)}
        passed = verdict != combinatorics.COUNTEREXAMPLE
        table = _rows_csv([["verdict"], [verdict]])
    else:
        res = combinatorics.run_trials(args.seed, args.trials, args.cross_checks)
        passed = res["pass"]
        table = _rows_csv([[k, v] for k, v in res["verdicts"].items()])
    return res, passed, [], table


def _cmd_probe(args):
    res = kclass.conjecture_probe(args.g, args.h, args.variant, args.twist, args.box,
                                  args.prime_bound, args.mult_bound)
    table = _rows_csv([["a", "b", "pass"]] + [[r["a"], r["b"], r["pass"]] for r in res["pairs"]])
    return res, True, res["warnings"], table


COMMANDS = {"sum": _cmd_sum, "sieve": _cmd_sieve, "count": _cmd_count, "lemma": _cmd_lemma,
            "class": _cmd_class, "setsys": _cmd_setsys, "probe": _cmd_probe}


def _rows_csv(rows) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _config(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k != "fmt"}


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    try:
        result, passed, warnings, table = COMMANDS[args.command](args)
    except (UsageError, ValueError, KeyError, OSError, jsonschema.ValidationError) as exc:
        parser.print_usage(sys.stderr)
        print(f"twistsum: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    config = _config(args)
    if args.fmt == "csv" and table is not None:
        _emit("# config: " + json.dumps(reports._canonical(config), sort_keys=True) + "\n" + table, args.out)
    else:
        rep = reports.build_report(args.command, config, result, passed, warnings)
        _emit(reports.dumps(rep), args.out)
    if args.command == "sum" and args.fmt != "csv":
        print(f"value = {result['value']}", file=sys.stderr)
    return EXIT_OK if passed else EXIT_FAIL


def main(argv=None) -> int:
    return run(argv)
