"""Batch experiments: repeated loss draws, probing and location on one route."""
from __future__ import annotations

import csv
import dataclasses
import io
import itertools
import json
import math
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Any

from . import __version__
from .analysis import f_t1, profile_of
from .locator import DEFAULT_THRESHOLD, StatsOracle, locate
from .probesim import ConfigError, LossSpec, expected_counts, make_loss_model, simulate_probing, trial_rng
from .routes import build_route, route_stats
from .topology import resolve_topology


@dataclass
class ExperimentConfig:
    topology: str = "ideal"
    mh: str | None = None
    scheme: str = "bbt-t2"
    seg_len: int = 8
    high_loss_count: int = 1
    high_loss_range: tuple[float, float] = (0.15, 0.2)
    light_loss_range: tuple[float, float] = (0.0, 0.0)
    packets: int = 100_000
    threshold: float = DEFAULT_THRESHOLD
    trials: int = 1000
    seed: int = 0
    exact_counts: bool = False

    def __post_init__(self):
        self.high_loss_range = tuple(float(x) for x in self.high_loss_range)
        self.light_loss_range = tuple(float(x) for x in self.light_loss_range)
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.packets < 1:
            raise ConfigError("packets must be >= 1")
        if not 0 < self.threshold < 1:
            raise ConfigError("threshold must lie strictly between 0 and 1")
        if self.seg_len < 1:
            raise ConfigError("seg_len must be >= 1")
        LossSpec(self.high_loss_count, self.high_loss_range, self.light_loss_range)

    @property
    def label(self) -> str:
        name = self.scheme
        if name.startswith("bbt"):
            name += f"@{self.seg_len}"
        lo, hi = self.light_loss_range
        return f"{name}|hl={self.high_loss_count}|light=[{lo:g},{hi:g}]|N={self.packets}"

    def as_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["high_loss_range"] = list(self.high_loss_range)
        d["light_loss_range"] = list(self.light_loss_range)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class TrialResult:
    trial: int
    accesses: int
    exact_match: bool
    found_count: int
    unresolved: int
    true_count: int
    true_positives: int


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    route_stats: dict
    trials: list[TrialResult]
    t1_estimate: float | None = None
    metadata: dict = field(default_factory=dict)

    @property
    def aggregates(self) -> dict:
        acc = [t.accesses for t in self.trials]
        k = len(acc)
        sd = statistics.stdev(acc) if k > 1 else 0.0
        truth = sum(t.true_count for t in self.trials)
        tp = sum(t.true_positives for t in self.trials)
        return {
            "trials": k,
            "mean_accesses": statistics.fmean(acc),
            "stdev_accesses": sd,
            "sem_accesses": sd / math.sqrt(k),
            "accuracy": sum(t.exact_match for t in self.trials) / k,
            "recall": 1.0 if truth == 0 else tp / truth,
            "mean_unresolved": statistics.fmean(t.unresolved for t in self.trials),
        }

    def as_dict(self) -> dict:
        out = {
            "config": self.config.as_dict(),
            "label": self.config.label,
            "route_stats": self.route_stats,
            "aggregates": self.aggregates,
        }
        if self.t1_estimate is not None:
            out["t1_estimate"] = self.t1_estimate
        return out

    def trials_csv(self, header: bool = True, label: str | None = None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["trial", "accesses", "exact_match", "found_count", "unresolved"]
        if header:
            w.writerow((["run"] if label is not None else []) + cols)
        for t in self.trials:
            row = [t.trial, t.accesses, int(t.exact_match), t.found_count, t.unresolved]
            w.writerow(([label] if label is not None else []) + row)
        return buf.getvalue()


def _build(cfg: ExperimentConfig):
    topo = resolve_topology(cfg.topology, cfg.mh)
    return topo, build_route(topo, cfg.scheme, cfg.seg_len)


def run_trial(cfg: ExperimentConfig, topo, rt, trial: int) -> TrialResult:
    spec = LossSpec(cfg.high_loss_count, cfg.high_loss_range, cfg.light_loss_range)
    lm = make_loss_model(topo, spec, trial_rng(cfg.seed, trial, 0))
    if cfg.exact_counts:
        stats = expected_counts(rt, lm, cfg.packets)
    else:
        stats = simulate_probing(rt, lm, cfg.packets, trial_rng(cfg.seed, trial, 1))
    rep = locate(rt, StatsOracle(stats), cfg.threshold)
    found = rep.found_links
    return TrialResult(
        trial=trial,
        accesses=rep.access_count,
        exact_match=found == set(lm.truth) and not rep.unresolved_ranges and not rep.aborted,
        found_count=len(found),
        unresolved=len(rep.unresolved_ranges),
        true_count=len(lm.truth),
        true_positives=len(found & set(lm.truth)),
    )


def _run_chunk(cfg: ExperimentConfig, trials: list[int]) -> list[TrialResult]:
    topo, rt = _build(cfg)
    return [run_trial(cfg, topo, rt, i) for i in trials]


def run_experiment(cfg: ExperimentConfig, jobs: int = 1) -> ExperimentReport:
    """Run ``cfg.trials`` independent trials; ``jobs`` never changes the result."""
    topo, rt = _build(cfg)
    if jobs > 1 and cfg.trials > 1:
        chunks = [list(range(i, cfg.trials, jobs)) for i in range(jobs)]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            parts = pool.map(_run_chunk, [cfg] * len(chunks), chunks)
            results = [r for part in parts for r in part]
    else:
        results = [run_trial(cfg, topo, rt, i) for i in range(cfg.trials)]
    results.sort(key=lambda r: r.trial)
    t1_estimate = None
    if rt.scheme == "bbt_t1":
        t1_estimate = f_t1(profile_of(rt), topo.n_directed)
    return ExperimentReport(
        config=cfg,
        route_stats=route_stats(rt).as_dict(),
        trials=results,
        t1_estimate=t1_estimate,
        metadata={"generated_at": datetime.now(timezone.utc).isoformat(), "version": __version__},
    )


SWEEP_KEYS = ("scheme", "seg_len", "high_loss_count", "light_loss_range", "packets", "mh")


def expand_sweep(base: dict, sweep: dict[str, list[Any]]) -> list[ExperimentConfig]:
    """Cartesian product of the sweep lists over a base config.

    A ``scheme`` entry may carry its segment length as ``bbt-t1:4``.
    """
    unknown = set(sweep) - set(SWEEP_KEYS)
    if unknown:
        raise ConfigError(f"cannot sweep over {sorted(unknown)}")
    keys = list(sweep)
    configs = []
    for values in itertools.product(*(sweep[k] for k in keys)):
        d = dict(base)
        for k, v in zip(keys, values):
            if k == "scheme" and ":" in str(v):
                name, seg = str(v).split(":", 1)
                d["scheme"], d["seg_len"] = name, int(seg)
            else:
                d[k] = v
        configs.append(ExperimentConfig.from_dict(d))
    return configs


def aggregate_csv(reports: list[ExperimentReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["run", "scheme", "seg_len", "high_loss_count", "light_lo", "light_hi", "packets",
                "trials", "mean_accesses", "sem_accesses", "accuracy", "recall", "paths"])
    for rep in reports:
        c, a = rep.config, rep.aggregates
        w.writerow([c.label, c.scheme, c.seg_len, c.high_loss_count, c.light_loss_range[0], c.light_loss_range[1],
                    c.packets, a["trials"], f"{a['mean_accesses']:.6f}", f"{a['sem_accesses']:.6f}",
                    f"{a['accuracy']:.6f}", f"{a['recall']:.6f}", rep.route_stats["paths"]])
    return buf.getvalue()


def report_document(reports: list[ExperimentReport]) -> dict:
    meta = reports[0].metadata if reports else {}
    return {"metadata": meta, "runs": [r.as_dict() for r in reports]}


def dumps_report(reports: list[ExperimentReport]) -> str:
    return json.dumps(report_document(reports), indent=2, sort_keys=True) + "\n"


def strip_metadata(doc: str) -> str:
    d = json.loads(doc)
    d.pop("metadata", None)
    return json.dumps(d, indent=2, sort_keys=True)
