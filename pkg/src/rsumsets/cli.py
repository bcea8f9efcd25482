"""Command-line driver.

    rsumsets identities --n 1..4 --m 0..2 --b 0..4 [--ids leading,linear] [--strict-shifted]
    rsumsets theorems   --thm t1_3,t1_5 --n 2..3 --k 1..5 --m 0..1 [--p P] --trials 50 --seed 1
    rsumsets coeff      --n 2 --expr "vdm(2,2)*(sum)^2" --target 2,2
    rsumsets lemma21    --n 3 --m 1 --k 3 --L "e2*sum"

Exit codes: 0 success, 1 verification failure, 2 usage error.  The worker
count for grid and sweep fan-out comes from ``--workers`` or the
``RSUMSETS_WORKERS`` environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import expr as expr_mod
from .morris import (
    Identity,
    IdentityId,
    IdentityReport,
    MorrisParams,
    PreconditionError,
    antisymmetrize_check,
    grid_check,
)
from .nullstellensatz import HypothesisError, h_mod_p, theorem_h
from .polyring import GF, ZZ, ring_from_tag
from .sumsets import (
    ConditionMismatch,
    InfeasibleError,
    SumsetInstance,
    TheoremId,
    auto_prime,
    gen_instance,
    verify,
)

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
WORKERS_ENV = "RSUMSETS_WORKERS"


class UsageError(Exception):
    pass


def parse_range(text: str) -> list[int]:
    """``"3"``, ``"0..4"`` (inclusive) or ``"1,3,5"``."""
    values = []
    try:
        for part in text.split(","):
            part = part.strip()
            if ".." in part:
                lo, hi = part.split("..")
                values.extend(range(int(lo), int(hi) + 1))
            elif part:
                values.append(int(part))
    except ValueError:
        raise UsageError(f"bad range {text!r}") from None
    if not values:
        raise UsageError(f"range {text!r} is empty")
    return sorted(set(values))


def _workers(args) -> int:
    if getattr(args, "workers", None):
        return args.workers
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        raise UsageError(f"{WORKERS_ENV} must be an integer") from None


def _emit(lines: list[str], args) -> None:
    text = "\n".join(lines) + ("\n" if lines else "")
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_lines(header: list[str], rows: list[list]) -> list[str]:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue().splitlines()


# --------------------------------------------------------------------------
# identities
# --------------------------------------------------------------------------

def _identity_failed(report: IdentityReport, strict_shifted: bool) -> bool:
    if report.skipped:
        return False
    if not report.equal:
        return True
    if report.id.kind.shifted and not strict_shifted:
        return False
    return not report.per_index_equal


def _identity_text(r: IdentityReport) -> str:
    head = f"{str(r.id):15s} n={r.n} m={r.m} b={r.b}"
    if r.skipped:
        return f"{head}  SKIP  {r.reason}"
    status = "ok" if r.ok else ("SYM-ONLY" if r.equal else "FAIL")
    line = f"{head}  {status:8s} lhs={r.lhs} rhs={r.rhs}"
    if r.per_index:
        vals = " ".join(f"{','.join(map(str, s.id.indices))}:{s.lhs}" for s in r.per_index)
        line += f"  per-index[{vals}] vs {r.per_index[0].rhs}"
    if r.lemma21 is not None:
        line += f"  lemma21={r.lemma21}"
    return line


def cmd_identities(args) -> int:
    if args.ids:
        ids = [IdentityId.parse(s) for s in args.ids.split(",") if s.strip()]
    else:
        ids = [IdentityId(kind) for kind in Identity]
    reports = grid_check(ids, parse_range(args.n), parse_range(args.m), parse_range(args.b),
                         workers=_workers(args))
    failed = [r for r in reports if _identity_failed(r, args.strict_shifted)]
    if args.format == "json":
        lines = [json.dumps(r.to_json(), sort_keys=True) for r in reports]
    elif args.format == "csv":
        lines = _csv_lines(
            ["id", "n", "m", "b", "lhs", "rhs", "equal", "per_index_equal", "skipped", "reason"],
            [[str(r.id), r.n, r.m, r.b, r.lhs, r.rhs, r.equal, r.per_index_equal,
              r.skipped, r.reason or ""] for r in reports])
    else:
        lines = [_identity_text(r) for r in reports]
        done = [r for r in reports if not r.skipped]
        lines.append(f"# {len(done)} checked, {len(reports) - len(done)} skipped, "
                     f"{len(failed)} failed")
    _emit(lines, args)
    return EXIT_FAIL if failed else EXIT_OK


# --------------------------------------------------------------------------
# theorems
# --------------------------------------------------------------------------

def _run_point(task):
    theorem, n, k, m, p, seeds, force = task
    reports = []
    for seed in seeds:
        reports.append(verify(gen_instance(seed, theorem, p, n, k, m), theorem, force=force))
    return reports


def _point_summary(theorem, n, k, m, p, reports) -> dict:
    hyp = [r for r in reports if r.hypotheses_ok]
    cards = [r.cardinality for r in reports if r.cardinality is not None]
    first = reports[0]
    return {
        "theorem": theorem.value, "n": n, "k": k, "m": m, "p": p,
        "trials": len(reports),
        "hypotheses_ok": len(hyp),
        "passed": sum(r.passed for r in hyp),
        "failed": sum(not r.passed for r in hyp),
        "bound": first.bound,
        "trivial": first.trivial,
        "min_cardinality": min(cards) if cards else None,
        "certificates": sum(r.certificate is not None for r in reports),
        "unsound_certificates": sum(r.certificate_sound is False for r in reports),
        **_unit_h(theorem, n, k, m, p),
    }


def _unit_h(theorem, n, k, m, p) -> dict:
    # closed-form h with form sum 1; per-instance values scale by the form sum
    b = k - 1 - m * (n - 1)
    try:
        h = theorem_h(theorem, MorrisParams(n, m, b), 1)
    except (ValueError, PreconditionError):
        return {"h": None, "h_mod_p": None}
    return {"h": str(h), "h_mod_p": h_mod_p(h, p)}


def cmd_theorems(args) -> int:
    if args.trials < 1:
        raise UsageError("--trials must be at least 1")
    names = args.thm.split(",") if args.thm else [t.value for t in TheoremId]
    try:
        theorems = [TheoremId(s.strip().lower()) for s in names]
    except ValueError as exc:
        raise UsageError(str(exc)) from None

    if args.instance:
        if len(theorems) != 1:
            raise UsageError("--instance needs exactly one --thm")
        with open(args.instance) as fh:
            instance = SumsetInstance.from_json(json.load(fh))
        try:
            report = verify(instance, theorems[0], force=args.force)
        except ConditionMismatch as exc:
            raise UsageError(str(exc)) from None
        if args.format == "json":
            _emit([json.dumps(report.to_json(), sort_keys=True)], args)
        else:
            _emit([_report_text(report)], args)
        return EXIT_OK if report.passed or not report.hypotheses_ok else EXIT_FAIL

    seeds = [args.seed + t for t in range(args.trials)]
    tasks, infeasible = [], []
    for theorem in theorems:
        for n in parse_range(args.n):
            for k in parse_range(args.k):
                for m in parse_range(args.m):
                    p = args.p if args.p else auto_prime(theorem, n, k, m)
                    try:
                        gen_instance(seeds[0], theorem, p, n, k, m)
                    except (InfeasibleError, ValueError) as exc:
                        infeasible.append((theorem, n, k, m, p, str(exc)))
                        continue
                    tasks.append((theorem, n, k, m, p, seeds, args.force))

    workers = _workers(args)
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_point, tasks))
    else:
        results = [_run_point(t) for t in tasks]

    rows = []
    for task, reports in zip(tasks, results):
        theorem, n, k, m, p = task[:5]
        rows.append((_sort_key(theorem, n, k, m), _point_summary(theorem, n, k, m, p, reports),
                     reports))
    for theorem, n, k, m, p, reason in infeasible:
        rows.append((_sort_key(theorem, n, k, m),
                     {"theorem": theorem.value, "n": n, "k": k, "m": m, "p": p,
                      "infeasible": reason}, []))
    rows.sort(key=lambda r: r[0])

    failures = sum(row[1].get("failed", 0) for row in rows)
    if args.format == "json":
        lines = []
        for _, summary, reports in rows:
            lines.append(json.dumps({"type": "point", **summary}, sort_keys=True))
            if args.verbose:
                lines.extend(json.dumps({"type": "instance", **r.to_json()}, sort_keys=True)
                             for r in reports)
    elif args.format == "csv":
        header = ["theorem", "n", "k", "m", "p", "trials", "hypotheses_ok", "passed", "failed",
                  "bound", "min_cardinality", "certificates", "h", "h_mod_p", "infeasible"]
        lines = _csv_lines(header, [[s.get(h, "") if s.get(h) is not None else "" for h in header]
                                    for _, s, _ in rows])
    else:
        lines = []
        for _, s, reports in rows:
            lines.append(_summary_text(s))
            if args.verbose:
                lines.extend("    " + _report_text(r) for r in reports)
        lines.append(f"# {len(tasks)} points, {len(infeasible)} infeasible, "
                     f"{failures} failing instances")
    _emit(lines, args)
    return EXIT_FAIL if failures else EXIT_OK


def _sort_key(theorem, n, k, m):
    return (list(TheoremId).index(theorem), n, k, m)


def _summary_text(s: dict) -> str:
    head = f"{s['theorem']:6s} n={s['n']} k={s['k']} m={s['m']} p={s['p']}"
    if "infeasible" in s:
        return f"{head}  infeasible: {s['infeasible']}"
    text = (f"{head}  {s['passed']}/{s['hypotheses_ok']} passed"
            f" ({s['trials']} trials)  bound={s['bound']}  min|C|={s['min_cardinality']}")
    if s["trivial"]:
        text += "  [trivial bound]"
    text += f"  certs={s['certificates']}"
    if s["h"] is not None:
        text += f"  h={s['h']}  h mod p={s['h_mod_p']}"
    return text


def _report_text(r) -> str:
    inst = r.instance
    status = "PASS" if r.passed else ("FAIL" if r.hypotheses_ok else "HYP-FAIL")
    text = (f"{r.theorem.value} p={inst.p} n={inst.n} k={inst.k} m={inst.m} seed={inst.seed}"
            f"  {status} |C|={r.cardinality} bound={r.bound}")
    if r.reasons:
        text += "  (" + "; ".join(r.reasons) + ")"
    if r.h is not None:
        text += f"  h={r.h} h mod p={r.h_mod_p} key={r.key}"
    if r.certificate is not None:
        text += f"  cert>={r.certificate.bound} nonvanishing={r.nonvanishing}"
    return text


# --------------------------------------------------------------------------
# coeff / lemma21
# --------------------------------------------------------------------------

def _parse_target(text: str, n: int) -> tuple[int, ...]:
    try:
        target = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"bad target {text!r}") from None
    if len(target) != n:
        raise UsageError(f"target has {len(target)} entries, expected {n}")
    return target


def _ring(args):
    if args.p:
        return GF(args.p)
    return ring_from_tag(args.ring)


def cmd_coeff(args) -> int:
    target = _parse_target(args.target, args.n)
    try:
        value = expr_mod.coefficient(args.expr, args.n, target, _ring(args))
    except expr_mod.ParseError as exc:
        raise UsageError(f"parse error: {exc}") from None
    if args.format == "json":
        _emit([json.dumps({"expr": args.expr, "n": args.n, "target": list(target),
                           "coefficient": str(value)}, sort_keys=True)], args)
    else:
        _emit([str(value)], args)
    return EXIT_OK


def cmd_lemma21(args) -> int:
    try:
        L = expr_mod.to_poly(expr_mod.parse(args.L), args.n, ZZ)
        report = antisymmetrize_check(args.m, args.k, args.n, L)
    except expr_mod.ParseError as exc:
        raise UsageError(f"parse error: {exc}") from None
    except PreconditionError as exc:
        raise UsageError(str(exc)) from None
    if args.format == "json":
        _emit([json.dumps(report.to_json(), sort_keys=True)], args)
    else:
        _emit([f"n={report.n} m={report.m} k={report.k} L={args.L}: "
               f"flat coefficient {report.lhs}, n! * staircase {report.rhs}  "
               f"{'ok' if report.equal else 'FAIL'}"], args)
    return EXIT_OK if report.equal else EXIT_FAIL


# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="rsumsets", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--format", choices=["text", "json", "csv"], default="text")
        p.add_argument("--json", dest="format", action="store_const", const="json")
        p.add_argument("--csv", dest="format", action="store_const", const="csv")
        p.add_argument("--output", "-o", default=None)
        p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("identities", help="check coefficient identities on a grid")
    p.add_argument("--ids", default=None,
                   help="comma list, e.g. leading,linear:1,shifted-linear (default: all)")
    p.add_argument("--n", default="1..4")
    p.add_argument("--m", default="0..2")
    p.add_argument("--b", default="0..4")
    p.add_argument("--strict-shifted", action="store_true",
                   help="treat per-index inequality of shifted identities as failure")
    common(p)
    p.set_defaults(func=cmd_identities)

    p = sub.add_parser("theorems", help="verify sumset bounds on seeded random instances")
    p.add_argument("--thm", default=None, help="comma list of t1_3 ... t1_7p (default: all)")
    p.add_argument("--n", default="2..3")
    p.add_argument("--k", default="1..5")
    p.add_argument("--m", default="0..1")
    p.add_argument("--p", type=int, default=None,
                   help="prime; default is the smallest admissible prime above the threshold")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--force", action="store_true", help="enumerate even when the bound is trivial")
    p.add_argument("--instance", default=None, help="verify one instance from a JSON file")
    p.add_argument("--verbose", "-v", action="store_true")
    common(p)
    p.set_defaults(func=cmd_theorems)

    p = sub.add_parser("coeff", help="coefficient of a monomial in an expression")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--expr", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--ring", default="ZZ", help="ZZ, QQ or GF(p)")
    p.add_argument("--p", type=int, default=None, help="shorthand for --ring GF(p)")
    common(p)
    p.set_defaults(func=cmd_coeff)

    p = sub.add_parser("lemma21", help="check the antisymmetrization relation for one L")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--L", default="1", help="symmetric polynomial in the expression grammar")
    common(p)
    p.set_defaults(func=cmd_lemma21)
    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"rsumsets: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, HypothesisError, ConditionMismatch, ValueError) as exc:
        print(f"rsumsets: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
