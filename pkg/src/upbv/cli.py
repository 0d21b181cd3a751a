"""Command-line front end: ``upbv construct|verify|certify|report``.

Exit codes: 0 every check passed, 1 some check failed, 2 some check was
inconclusive (and none failed), 3 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .entangle import ppt_report, upb_mixed_state
from .errors import ConsistencyError, DomainError, PreconditionError, ResourceError
from .families import FamilyId, build_family, expected_size
from .io import read_state_set, write_state_set
from .lemmas import certify
from .linalg import Tolerances
from .opm import VerdictKind, coalitions, is_trivial_opm
from .states import StateSet
from .unextend import find_extension, orthogonality_defects

PASS, FAIL, INCONCLUSIVE, SKIPPED = "PASS", "FAIL", "INCONCLUSIVE", "SKIPPED"
EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3
CHECKS = ("orth", "upb", "strong", "ppt")
CSV_COLUMNS = [
    "d", "family", "size", "expected", "orth", "upb",
    "opm_bc_dim", "opm_ca_dim", "opm_ab_dim", "min_gap", "ppt_min", "secs",
]  # fmt: skip


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@dataclass
class CheckResult:
    verdict: str
    detail: str = ""
    secs: float = 0.0
    data: dict = field(default_factory=dict)


@dataclass
class RunReport:
    family: str
    d: int | None
    checks: dict[str, CheckResult] = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    version: str = __version__

    def exit_code(self) -> int:
        verdicts = {c.verdict for c in self.checks.values()}
        if FAIL in verdicts:
            return EXIT_FAIL
        if INCONCLUSIVE in verdicts:
            return EXIT_INCONCLUSIVE
        return EXIT_OK

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, default=str)


def _tol(args) -> Tolerances:
    return Tolerances(zero=args.tol_zero, rank=args.tol_rank, gap_min=args.gap_min)


def _jobs(args) -> int:
    if args.jobs is not None:
        return max(1, args.jobs)
    env = os.environ.get("UPBV_JOBS", "")
    return max(1, int(env)) if env.isdigit() else 1


def _fmt_gap(g: float) -> str:
    return "inf" if math.isinf(g) else f"{g:.3g}"


def _check_orth(s: StateSet, tol: Tolerances) -> CheckResult:
    bad = orthogonality_defects(s, tol.zero)
    if not bad:
        return CheckResult(PASS, f"{len(s)} states pairwise orthogonal (tol_zero {tol.zero:g})")
    i, j, v = bad[0]
    return CheckResult(FAIL, f"{len(bad)} non-orthogonal pairs, e.g. {s[i].label} vs {s[j].label} ({v:.3g})")


def _check_upb(s: StateSet, tol: Tolerances, max_d: int) -> CheckResult:
    if max(s.dims) > max_d:
        return CheckResult(SKIPPED, f"local dimension {max(s.dims)} above --upb-max-d {max_d}")
    try:
        w = find_extension(s, tol)
    except PreconditionError as exc:
        return CheckResult(FAIL, str(exc))
    except (ResourceError, ConsistencyError) as exc:
        return CheckResult(INCONCLUSIVE, str(exc))
    if w is None:
        return CheckResult(PASS, f"no orthogonal product vector (tol_rank {tol.rank:g})")
    return CheckResult(FAIL, f"extendible; witness residual {w.residual:.2e}")


def _opm_cuts(s: StateSet, tol: Tolerances, max_d: int, jobs: int) -> dict[str, CheckResult]:
    cuts = coalitions(s.nparties, s.dims)

    def run(cut):
        if max(s.dims[p] for p in cut.parties) > max_d:
            return CheckResult(SKIPPED, f"local dimension above --opm-max-d {max_d}")
        t0 = time.perf_counter()
        try:
            v = is_trivial_opm(s, cut, tol)
        except PreconditionError as exc:
            return CheckResult(FAIL, str(exc))
        except ConsistencyError as exc:
            return CheckResult(INCONCLUSIVE, str(exc))
        verdict = {VerdictKind.TRIVIAL: PASS, VerdictKind.NONTRIVIAL: FAIL}.get(v.kind, INCONCLUSIVE)
        detail = f"{v.kind.value}: dim {v.dim}, gap ratio {_fmt_gap(v.gap_ratio)} (gap_min {tol.gap_min:g})"
        data = {"dim": v.dim, "gap_ratio": v.gap_ratio}
        return CheckResult(verdict, detail, time.perf_counter() - t0, data)

    with ThreadPoolExecutor(max_workers=jobs) as pool:
        results = list(pool.map(run, cuts))
    return {f"strong[{c.name}]": r for c, r in zip(cuts, results)}


def _check_ppt(s: StateSet, tol: Tolerances) -> CheckResult:
    try:
        rho = upb_mixed_state(s, validate=False, tol=tol)
    except (PreconditionError, DomainError) as exc:
        return CheckResult(FAIL, str(exc))
    mins = ppt_report(rho)
    worst = min(mins.values())
    detail = ", ".join(f"{k} {v:.2e}" for k, v in mins.items()) + f" (tol_psd {tol.psd:g})"
    return CheckResult(PASS if worst >= -tol.psd else FAIL, detail, data={"minima": mins, "min": worst})


def _run_checks(s: StateSet, checks, args, tol: Tolerances) -> RunReport:
    d = s.dims[0] if len(set(s.dims)) == 1 else None
    report = RunReport(s.name, d, tolerances=asdict(tol))
    timed = {
        "orth": lambda: _check_orth(s, tol),
        "upb": lambda: _check_upb(s, tol, args.upb_max_d),
        "ppt": lambda: _check_ppt(s, tol),
    }
    for name in CHECKS:
        if name not in checks:
            continue
        if name == "strong":
            report.checks.update(_opm_cuts(s, tol, args.opm_max_d, _jobs(args)))
            continue
        t0 = time.perf_counter()
        res = timed[name]()
        res.secs = time.perf_counter() - t0
        report.checks[name] = res
    return report


def cmd_construct(args) -> int:
    fam = FamilyId(args.family)
    if fam is FamilyId.COMPLEMENT_PHI_3:
        raise DomainError("family phi3 holds entangled vectors, not a product-state set")
    if fam is FamilyId.UPBDDD and args.d is None:
        raise DomainError("family ddd needs -d")
    s = build_family(fam, args.d)
    write_state_set(s, args.out)
    print(f"wrote {len(s)} states ({s.name}, dims {'x'.join(map(str, s.dims))}) to {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = set(checks) - set(CHECKS)
    if unknown or not checks:
        raise DomainError(f"unknown checks {sorted(unknown)}; choose from {','.join(CHECKS)}")
    s = read_state_set(args.input)
    tol = _tol(args)
    report = _run_checks(s, checks, args, tol)
    print(f"{s.name or args.input}: {len(s)} states, dims {'x'.join(map(str, s.dims))}")
    for name, res in report.checks.items():
        print(f"  {name:<12} {res.verdict:<12} {res.detail}")
    if args.json:
        Path(args.json).write_text(report.to_json())
    return report.exit_code()


def cmd_certify(args) -> int:
    s = read_state_set(args.input)
    if s.nparties != 3:
        raise DomainError(f"certify needs a tripartite set, got {s.nparties} parties")
    cert, residual = certify(s, args.cut, _tol(args))
    out = Path(args.out)
    out.with_suffix(".txt").write_text(cert.to_text())
    out.with_suffix(".json").write_text(cert.to_json())
    counts = ", ".join(f"{k} x{v}" for k, v in sorted(cert.rule_counts().items()))
    print(f"certificate: {counts}; residual dim {residual.dim}, gap ratio {_fmt_gap(residual.gap_ratio)}")
    print(f"wrote {out.with_suffix('.txt')} and {out.with_suffix('.json')}")
    return EXIT_OK if residual.dim == 1 else EXIT_FAIL


def _report_row(d: int, args, tol: Tolerances) -> tuple[dict, list[str]]:
    t0 = time.perf_counter()
    s = build_family(FamilyId.UPBDDD, d)
    checks = ["orth", "upb", "strong", "ppt"]
    rep = _run_checks(s, checks, args, tol)
    row = {"d": d, "family": FamilyId.UPBDDD.value, "size": len(s), "expected": expected_size(d)}
    row["orth"] = rep.checks["orth"].verdict
    row["upb"] = rep.checks["upb"].verdict
    gaps = []
    for cut in ("BC", "CA", "AB"):
        res = rep.checks[f"strong[{cut}]"]
        row[f"opm_{cut.lower()}_dim"] = res.data.get("dim", "")
        if "gap_ratio" in res.data:
            gaps.append(res.data["gap_ratio"])
    row["min_gap"] = _fmt_gap(min(gaps)) if gaps else ""
    ppt = rep.checks["ppt"].data
    row["ppt_min"] = f"{ppt['min']:.3e}" if "min" in ppt else ""
    row["secs"] = f"{time.perf_counter() - t0:.2f}"
    return row, [c.verdict for c in rep.checks.values()]


def cmd_report(args) -> int:
    if not 3 <= args.dmin <= args.dmax:
        raise DomainError(f"need 3 <= dmin <= dmax, got {args.dmin}..{args.dmax}")
    tol = _tol(args)
    ds = list(range(args.dmin, args.dmax + 1))
    with ThreadPoolExecutor(max_workers=_jobs(args)) as pool:
        rows = list(pool.map(lambda d: _report_row(d, args, tol), ds))
    with open(args.out, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        w.writeheader()
        for row, _ in rows:
            w.writerow(row)
    print(f"# tolerances: zero {tol.zero:g}, rank {tol.rank:g}, psd {tol.psd:g}, gap_min {tol.gap_min:g}")
    print(",".join(CSV_COLUMNS))
    for row, _ in rows:
        print(",".join(str(row[c]) for c in CSV_COLUMNS))
    verdicts = {v for _, vs in rows for v in vs}
    sizes_ok = all(row["size"] == row["expected"] for row, _ in rows)
    if FAIL in verdicts or not sizes_ok:
        return EXIT_FAIL
    return EXIT_INCONCLUSIVE if INCONCLUSIVE in verdicts else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-zero", type=float, default=1e-9, help="relative overlap treated as zero")
    common.add_argument("--tol-rank", type=float, default=1e-9, help="relative singular value cutoff")
    common.add_argument("--gap-min", type=float, default=1e6, help="gap ratio needed for a confident verdict")
    common.add_argument("--upb-max-d", type=int, default=5, help="skip the unextendibility check above this d")
    common.add_argument("--opm-max-d", type=int, default=6, help="skip measurement checks above this d")
    common.add_argument("--jobs", type=int, default=None, help="worker threads (default: $UPBV_JOBS or 1)")

    p = _Parser(prog="upbv", description="Verify strongly nonlocal UPBs in d x d x d.")
    p.add_argument("--version", action="version", version=f"upbv {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("construct", parents=[common], help="write a family to a JSON state-set file")
    c.add_argument("--family", required=True, choices=[f.value for f in FamilyId])
    c.add_argument("-d", type=int, default=None)
    c.add_argument("-o", "--out", required=True)
    c.set_defaults(func=cmd_construct)

    v = sub.add_parser("verify", parents=[common], help="run checks on a state-set file")
    v.add_argument("input")
    v.add_argument("--checks", default=",".join(CHECKS), help="comma list from orth,upb,strong,ppt")
    v.add_argument("--json", default=None, help="also write the run report as JSON")
    v.set_defaults(func=cmd_verify)

    r = sub.add_parser("certify", parents=[common], help="emit a lemma-engine certificate")
    r.add_argument("input")
    r.add_argument("--cut", default="BC", help="measured parties, e.g. BC")
    r.add_argument("-o", "--out", required=True, help="output prefix; .txt and .json are written")
    r.set_defaults(func=cmd_certify)

    t = sub.add_parser("report", parents=[common], help="CSV summary for the ddd family over a range of d")
    t.add_argument("--dmin", type=int, default=3)
    t.add_argument("--dmax", type=int, default=5)
    t.add_argument("-o", "--out", required=True)
    t.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, PreconditionError, KeyError, ValueError, OSError) as exc:
        print(f"upbv: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
