"""Command-line front end: ``bbtprobe route|locate|experiment|study-segments|eq-check``."""
from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import re
import statistics
import sys

from .analysis import DomainError, f_t1, profile_of, segment_access_study
from .experiment import (
    ConfigError,
    ExperimentConfig,
    aggregate_csv,
    dumps_report,
    expand_sweep,
    run_experiment,
)
from .locator import DEFAULT_THRESHOLD, StatsOracle, access_order_trace, locate
from .probesim import LossSpec, expected_counts, make_loss_model, simulate_probing, trial_rng
from .routes import ConfigurationError, StructuralError, build_route, render_route, route_stats, validate_route
from .topology import DirectedLink, Topology, TopologyError, resolve_topology

EXIT_USAGE = 2
EXIT_INVARIANT = 3

log = logging.getLogger("bbtprobe")


class UsageError(Exception):
    pass


class InvariantError(Exception):
    pass


def _load(args) -> Topology:
    ref = args.topology
    if ref not in ("ideal", "renater") and not os.path.exists(ref):
        raise UsageError(f"topology not found: {ref}")
    return resolve_topology(ref, args.mh)


def _scheme(args) -> str:
    scheme = args.scheme
    if scheme == "bbt":
        scheme = f"bbt-{args.variant}"
    return scheme


def _route(args, topo):
    rt = build_route(topo, _scheme(args), args.seg_len)
    report = validate_route(rt, topo)
    if not report.ok:
        raise InvariantError("; ".join(f"{v.kind}: {v.detail}" for v in report.violations[:5]))
    return rt


def _parse_link(topo: Topology, text: str) -> DirectedLink:
    """``12`` or ``12f`` is the forward direction of link 12, ``12r`` the reverse; ``A->B`` names endpoints."""
    m = re.fullmatch(r"(\d+)([fr]?)", text)
    if m:
        if int(m.group(1)) >= len(topo.links):
            raise UsageError(f"unknown link id {m.group(1)}")
        link = topo.link(int(m.group(1)))
        return link.directed(link.u if m.group(2) != "r" else link.v)
    if "->" in text:
        tail, head = text.split("->", 1)
        if tail not in topo.nodes:
            raise UsageError(f"unknown node {tail!r}")
        for link in topo.incident(tail):
            if link.other(tail) == head:
                return link.directed(tail)
    raise UsageError(f"unknown directed link {text!r}")


def cmd_route(args) -> int:
    topo = _load(args)
    rt = _route(args, topo)
    st = route_stats(rt)
    if args.format == "json":
        out = json.dumps({"scheme": rt.scheme, "measurement_node": topo.measurement_node, **st.as_dict()}, indent=2)
    elif st.paths == 1:
        out = f"paths=1 len={st.max}"
    else:
        out = f"paths={st.paths} avg={st.avg:g} min={st.min} max={st.max} segments={st.segments} stdev={st.stdev:.2f}"
    print(out)
    if args.dump:
        text = render_route(rt)
        if args.out:
            os.makedirs(args.out, exist_ok=True)
            with open(os.path.join(args.out, f"route_{rt.scheme}.txt"), "w") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)
    return 0


def _loss_spec(args, topo) -> LossSpec:
    placement = None
    if args.high_loss_links:
        placement = [_parse_link(topo, x) for x in args.high_loss_links]
    count = len(placement) if placement else args.high_loss_count
    try:
        return LossSpec(count, tuple(args.high_loss_range), tuple(args.light_loss_range), placement)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def cmd_locate(args) -> int:
    if not 0 < args.threshold < 1:
        raise UsageError("--threshold must lie strictly between 0 and 1")
    topo = _load(args)
    rt = _route(args, topo)
    lm = make_loss_model(topo, _loss_spec(args, topo), trial_rng(args.seed, 0, 0))
    if args.exact_counts:
        stats = expected_counts(rt, lm, args.packets)
    else:
        stats = simulate_probing(rt, lm, args.packets, trial_rng(args.seed, 0, 1))
    rep = locate(rt, StatsOracle(stats), args.threshold)
    doc = {
        "scheme": rt.scheme,
        "terminal_paths": len(rt.leaves()),
        "truth": sorted(str(d) for d in lm.truth),
        **rep.as_dict(),
    }
    if args.trace:
        doc["trace"] = [st.__dict__ for st in rep.trace]
    print(json.dumps(doc, indent=2))
    if args.trace and args.verbose:
        sys.stderr.write(access_order_trace(rep))
    return 0


_FLAG_KEYS = {
    "topology": "topology",
    "mh": "mh",
    "scheme": "scheme",
    "seg_len": "seg_len",
    "packets": "packets",
    "threshold": "threshold",
    "seed": "seed",
    "trials": "trials",
    "high_loss_count": "high_loss_count",
    "high_loss_range": "high_loss_range",
    "light_loss_range": "light_loss_range",
    "exact_counts": "exact_counts",
}


def cmd_experiment(args) -> int:
    base: dict = {}
    sweep: dict = {}
    out_dir = args.out
    if args.config:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except FileNotFoundError:
            raise UsageError(f"config not found: {args.config}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"config is not valid JSON: {exc}") from None
        sweep = raw.pop("sweep", {}) or {}
        out_dir = out_dir or raw.pop("out", None)
        raw.pop("out", None)
        raw.pop("jobs", None)
        base.update(raw)
    for flag, key in _FLAG_KEYS.items():
        value = getattr(args, flag, None)
        if value is not None and value is not False:
            if flag == "scheme":
                value = _scheme(args)
            base[key] = value
            sweep.pop(key, None)
    try:
        configs = expand_sweep(base, sweep) if sweep else [ExperimentConfig.from_dict(base)]
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    reports = [run_experiment(cfg, jobs=args.jobs) for cfg in configs]
    for rep in reports:
        a = rep.aggregates
        print(f"{rep.config.label} mean_accesses={a['mean_accesses']:.4f} sem={a['sem_accesses']:.4f} "
              f"accuracy={a['accuracy']:.4f} paths={rep.route_stats['paths']}")
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "report.json"), "w") as fh:
            fh.write(dumps_report(reports))
        with open(os.path.join(out_dir, "aggregates.csv"), "w") as fh:
            fh.write(aggregate_csv(reports))
        if args.format == "csv":
            with open(os.path.join(out_dir, "trials.csv"), "w") as fh:
                for i, rep in enumerate(reports):
                    fh.write(rep.trials_csv(header=i == 0, label=rep.config.label))
    return 0


def cmd_study_segments(args) -> int:
    rows = []
    for S in args.segments:
        try:
            pts = segment_access_study(args.links, S, seed=args.seed)
        except DomainError as exc:
            raise UsageError(str(exc)) from None
        rows += [(S, p.stdev, p.expected_accesses, "-".join(map(str, p.parts))) for p in pts]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["segments", "stdev", "expected_accesses", "parts"])
        for S, sd, val, parts in rows:
            w.writerow([S, f"{sd:.6f}", f"{val:.6f}", parts])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return 0


def cmd_eq_check(args) -> int:
    """Compare the closed-form T1 estimate with an exhaustive single-link sweep."""
    topo = _load(args)
    args.scheme, args.variant = "bbt", "t1"
    rt = _route(args, topo)
    n = topo.n_directed
    estimate = f_t1(profile_of(rt), n)
    accesses = []
    for d in sorted(topo.directed_links()):
        lm = make_loss_model(topo, LossSpec(placement=[d], high_loss_range=(args.rate, args.rate)), 0)
        rep = locate(rt, StatsOracle(expected_counts(rt, lm, args.packets)), args.threshold)
        accesses.append(rep.access_count)
    mean = statistics.fmean(accesses)
    print(f"seg_len={args.seg_len} formula={estimate:.4f} enumerated={mean:.4f} diff={round(estimate - mean, 9) + 0.0:+.4f}")
    return 0


def _shared(p: argparse.ArgumentParser, defaults: bool = True) -> None:
    d = (lambda v: v) if defaults else (lambda v: None)
    p.add_argument("--topology", default=d("ideal"), help="ideal, renater, or a path to an edge-list/GraphML file")
    p.add_argument("--mh", default=None, help="measurement node id")
    p.add_argument("--scheme", default=d("bbt-t2"),
                   choices=["unicursal", "bbt", "bbt-t1", "bbt-t2", "spt-m1", "spt-m2"])
    p.add_argument("--variant", default="t2", choices=["t1", "t2"], help="BBT variant when --scheme bbt")
    p.add_argument("--seg-len", dest="seg_len", type=int, default=d(8))
    p.add_argument("--packets", type=int, default=d(100_000))
    p.add_argument("--threshold", type=float, default=d(DEFAULT_THRESHOLD))
    p.add_argument("--seed", type=int, default=d(0))
    p.add_argument("--trials", type=int, default=None, help="trial count (experiment only)")
    p.add_argument("--out", default=None, help="output directory")
    p.add_argument("--format", default="json", choices=["json", "csv", "text"])
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--trace", action="store_true")
    p.add_argument("-v", "--verbose", action="store_true")


def _loss_flags(p: argparse.ArgumentParser, defaults: bool = True) -> None:
    d = (lambda v: v) if defaults else (lambda v: None)
    p.add_argument("--high-loss-count", dest="high_loss_count", type=int, default=d(1))
    p.add_argument("--high-loss-range", dest="high_loss_range", type=float, nargs=2, default=d([0.15, 0.2]))
    p.add_argument("--light-loss-range", dest="light_loss_range", type=float, nargs=2, default=d([0.0, 0.0]))
    p.add_argument("--exact-counts", dest="exact_counts", action="store_true",
                   help="use noise-free expected counts instead of simulated probing")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bbtprobe", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("route", help="build a probe route and print its terminal-path statistics")
    _shared(p)
    p.add_argument("--dump", action="store_true", help="also write the full route listing")
    p.set_defaults(func=cmd_route, format="text")

    p = sub.add_parser("locate", help="simulate one probing round and locate high-loss links")
    _shared(p)
    _loss_flags(p)
    p.add_argument("--high-loss-links", dest="high_loss_links", nargs="+",
                   help="explicit directed links: 12, 12r, or A->B")
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("experiment", help="run a batch experiment from a JSON config")
    p.add_argument("--config", help="flat JSON config file; flags override its values")
    _shared(p, defaults=False)
    _loss_flags(p, defaults=False)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("study-segments", help="weighted segment cost against segment-length spread")
    p.add_argument("--links", type=int, default=56)
    p.add_argument("--segments", type=int, nargs="+", default=[5, 6, 7])
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV output file (default stdout)")
    p.set_defaults(func=cmd_study_segments)

    p = sub.add_parser("eq-check", help="closed-form T1 access estimate against exhaustive enumeration")
    _shared(p)
    p.add_argument("--rate", type=float, default=0.2)
    p.set_defaults(func=cmd_eq_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, ConfigError, ConfigurationError, TopologyError, StructuralError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"error: not found: {exc.filename}", file=sys.stderr)
        return EXIT_USAGE
    except InvariantError as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
