"""``butterflow`` command line.

Jobs are described by a flat TOML document, for example::

    variant = "butterfly1"
    C1 = 1
    C2 = 1
    C3 = "3/2"
    C4 = 1
    C5 = 1
    C6 = 1
    C7 = 1
    q = 2
    secure = false
    R1 = 1
    R2 = "1/2"
    seed = 7
    out = "trace.csv"

Rationals are integers or ``"p/q"`` strings; floats are rejected.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .errors import (
    AuditTooLargeError,
    InfeasibleRateError,
    InvalidConfigError,
    SecureImpossibleError,
    UnsupportedVariantError,
)
from .gfq import FieldSpec
from .netgraph import (
    Variant,
    build_template,
    cutset_bounds,
    gns_sum_bound_butterfly1,
    normalize_label,
    parse_rational,
)
from .regions import RatePair, boundary_order, capacity_region, vertices
from .schemes import plan, simulate, verify_reliability
from .secaudit import audit, default_budget, impossibility_search

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_SECURE_IMPOSSIBLE = 4
EXIT_BUDGET = 5
EXIT_UNSUPPORTED = 6

_SCALAR_KEYS = {"variant", "q", "secure", "r1", "r2", "seed", "out"}


@dataclass(frozen=True)
class JobConfig:
    variant: Variant
    capacities: dict[str, Fraction]
    q: int = 2
    secure: bool = False
    rate: RatePair | None = None
    seed: int = 0
    out: str | None = None


def parse_config(data: dict[str, Any]) -> JobConfig:
    caps: dict[str, Fraction] = {}
    scalars: dict[str, Any] = {}
    for key, value in data.items():
        k = str(key).strip().lower()
        if k in _SCALAR_KEYS:
            scalars[k] = value
            continue
        try:
            label = normalize_label(key)
        except InvalidConfigError:
            raise InvalidConfigError(f"unknown config key {key!r}") from None
        caps[label] = parse_rational(value)

    if "variant" not in scalars:
        raise InvalidConfigError("config needs a 'variant'")
    variant = Variant.parse(scalars["variant"])
    q = scalars.get("q", 2)
    if isinstance(q, bool) or not isinstance(q, int):
        raise InvalidConfigError(f"q must be an integer, got {q!r}")
    FieldSpec(q)
    secure = scalars.get("secure", False)
    if not isinstance(secure, bool):
        raise InvalidConfigError("secure must be true or false")
    rate = None
    if ("r1" in scalars) != ("r2" in scalars):
        raise InvalidConfigError("give both R1 and R2 or neither")
    if "r1" in scalars:
        r1, r2 = parse_rational(scalars["r1"]), parse_rational(scalars["r2"])
        if r1 < 0 or r2 < 0:
            raise InvalidConfigError("rates must be non-negative")
        rate = RatePair(r1, r2)
    seed = _parse_seed(scalars.get("seed", 0))
    out = scalars.get("out")
    if out is not None and not isinstance(out, str):
        raise InvalidConfigError("out must be a path string")
    # surfaces missing or negative capacities now rather than mid-command
    build_template(variant, caps)
    return JobConfig(variant, caps, q, secure, rate, seed, out)


def _parse_seed(value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value < 2**64:
        raise InvalidConfigError(f"seed must be an unsigned 64-bit integer, got {value!r}")
    return value


def load_config(path: str | Path) -> JobConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidConfigError(f"cannot read config {path}: {exc}") from None
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InvalidConfigError(f"config {path} is not valid TOML: {exc}") from None
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise InvalidConfigError(f"config must be flat; found tables {nested}")
    return parse_config(data)


def _job(args: argparse.Namespace) -> JobConfig:
    job = load_config(args.config)
    updates: dict[str, Any] = {}
    if getattr(args, "out", None):
        updates["out"] = args.out
    if getattr(args, "seed", None) is not None:
        updates["seed"] = _parse_seed(args.seed)
    if getattr(args, "q", None) is not None:
        FieldSpec(args.q)
        updates["q"] = args.q
    if getattr(args, "secure", False):
        updates["secure"] = True
    return replace(job, **updates)


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    p.write_text(text, encoding="utf-8", newline="\n")


def _need_rate(job: JobConfig) -> RatePair:
    if job.rate is None:
        raise InvalidConfigError("this command needs R1 and R2 in the config")
    return job.rate


# --------------------------------------------------------------------------
# commands


def cmd_region(args: argparse.Namespace) -> int:
    job = _job(args)
    region = capacity_region(job.variant, job.capacities, job.secure)
    kind = "secure" if job.secure else "non-secure"
    print(f"REGION {job.variant.value} {kind}")
    for line in region.describe():
        print(line)
    if region.note:
        print(f"NOTICE {region.note}")
    pts = boundary_order(v.point for v in vertices(region))
    csv = "r1,r2\n" + "".join(f"{p.r1},{p.r2}\n" for p in pts)
    _write(job.out, csv)
    if args.plot:
        from .plotting import plot_regions

        shown = [(kind, region)]
        if not job.secure:
            if job.variant is not Variant.BUTTERFLY1:
                shown.append(("secure", capacity_region(job.variant, job.capacities, True)))
        plot_regions(shown, args.plot, title=job.variant.value)
    return EXIT_OK


def cmd_simulate(args: argparse.Namespace) -> int:
    job = _job(args)
    rate = _need_rate(job)
    tp = plan(job.variant, job.capacities, rate, job.secure, FieldSpec(job.q))
    trace = simulate(tp, job.seed)
    ok = verify_reliability(trace)
    print(f"{'RELIABLE' if ok else 'UNRELIABLE'} n={tp.block_n} k1={tp.k1} k2={tp.k2}")
    _write(job.out, trace.to_csv())
    return EXIT_OK if ok else 1


def cmd_audit(args: argparse.Namespace) -> int:
    job = _job(args)
    rate = _need_rate(job)
    tp = plan(job.variant, job.capacities, rate, job.secure, FieldSpec(job.q))
    verdict = audit(tp, budget=default_budget())
    for e in verdict.edges:
        status = "PASS" if e.factorizes else "FAIL"
        print(f"{status} edge={e.edge} mi_bits={e.mutual_information_bits:.6f}")
    if verdict.passed:
        print(f"SECURE states={verdict.states}")
    else:
        print(f"LEAKS first_edge={verdict.first_failure} states={verdict.states}")
    return EXIT_OK


def cmd_bounds(args: argparse.Namespace) -> int:
    job = _job(args)
    net = build_template(job.variant, job.capacities)
    for expr, value in cutset_bounds(net):
        print(f"{expr} <= {value}  [min-cut]")
    if job.variant is Variant.BUTTERFLY1:
        print(f"R1 + R2 <= {gns_sum_bound_butterfly1(net)}  [gns: min{{C3+C4, C3+C5}}]")
    return EXIT_OK


def cmd_impossibility(args: argparse.Namespace) -> int:
    report = impossibility_search(workers=args.workers, limit=args.limit)
    print(report.to_text())
    if args.out:
        _write(args.out, report.to_json() + "\n")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="butterflow",
        description="Exact capacity regions, packet schemes and secrecy audits "
        "for butterfly-family two-unicast networks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def job_parser(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="flat TOML job description")
        p.add_argument("--out", help="output path (stdout if omitted)")
        p.add_argument("--seed", type=int, help="override the config seed")
        p.add_argument("--q", type=int, help="override the field size (prime)")
        p.add_argument("--secure", action="store_true", help="use the secure region/scheme")
        return p

    p = job_parser("region", "list region inequalities and write the vertex CSV")
    p.add_argument("--plot", help="also render the region(s) to this image file")
    p.set_defaults(func=cmd_region)
    job_parser("simulate", "plan, execute and verify a scheme; write the trace CSV").set_defaults(
        func=cmd_simulate
    )
    job_parser("audit", "exact per-edge secrecy audit of a scheme").set_defaults(func=cmd_audit)
    job_parser("bounds", "cut-set (and butterfly1 sum-rate) bounds").set_defaults(func=cmd_bounds)

    p = sub.add_parser("impossibility", help="exhaustive unit butterfly1 encoder search")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--limit", type=int, help="search only the first N families")
    p.add_argument("--out", help="write the JSON report here")
    p.set_defaults(func=cmd_impossibility)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleRateError as exc:
        print(f"INFEASIBLE {exc.constraint}", file=sys.stdout)
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SecureImpossibleError as exc:
        print(f"IMPOSSIBLE {exc}", file=sys.stdout)
        return EXIT_SECURE_IMPOSSIBLE
    except AuditTooLargeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except UnsupportedVariantError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    raise SystemExit(main())
