"""Benchmark harness: many seeded evidence cases across modes and thread counts."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .caseio import checksum, posterior_rows, rows_to_csv
from .exceptions import ZeroProbabilityEvidence
from .inference import DEFAULT_CHUNK, EngineMode, Propagator
from .junction_tree import JunctionTree
from .network import BayesianNetwork, Evidence, sample_evidence

DEFAULT_THREADS = (1, 2, 4, 8, 16, 32)
REPORT_HEADER = (
    "mode", "threads", "cases", "total_s", "mean_ms", "median_ms", "p95_ms", "speedup_vs_seq", "checksum",
)


@dataclass
class BenchmarkConfig:
    network: str
    num_cases: int = 2000
    evidence_ratio: float = 0.2
    threads: Sequence[int] = DEFAULT_THREADS
    modes: Sequence[str] = tuple(m.value for m in EngineMode)
    seed: int = 0
    chunk: int = DEFAULT_CHUNK
    output: str | None = None

    def __post_init__(self):
        if self.num_cases < 1:
            raise ValueError("num_cases must be at least 1")
        if not 0.0 <= self.evidence_ratio <= 1.0:
            raise ValueError("evidence_ratio must lie in [0, 1]")
        if not self.threads or any(t < 1 for t in self.threads):
            raise ValueError("thread counts must be at least 1")
        if self.chunk < 1:
            raise ValueError("chunk must be at least 1")
        self.modes = tuple(EngineMode(m) for m in self.modes)
        self.threads = tuple(int(t) for t in self.threads)


@dataclass
class BenchmarkRow:
    mode: EngineMode
    threads: int
    cases: int
    total_s: float
    mean_ms: float
    median_ms: float
    p95_ms: float
    checksum: int
    speedup: float | None = None

    def as_tuple(self):
        speedup = "" if self.speedup is None else f"{self.speedup:.4f}"
        return (self.mode.value, self.threads, self.cases, f"{self.total_s:.6f}", f"{self.mean_ms:.4f}",
                f"{self.median_ms:.4f}", f"{self.p95_ms:.4f}", speedup, f"{self.checksum:016x}")


@dataclass
class BenchmarkReport:
    config: BenchmarkConfig
    cases: list[Evidence]
    rows: list[BenchmarkRow] = field(default_factory=list)

    @property
    def checksums_agree(self) -> bool:
        return len({r.checksum for r in self.rows}) <= 1

    def to_csv(self) -> str:
        return rows_to_csv((r.as_tuple() for r in self.rows), REPORT_HEADER)


def generate_cases(net: BayesianNetwork, num_cases: int, ratio: float, seed: int) -> list[Evidence]:
    """Case ``i`` draws its evidence from a PCG64 stream seeded with ``(seed, i)``."""
    return [sample_evidence(net, ratio, [seed, i]) for i in range(num_cases)]


def configurations(config: BenchmarkConfig) -> list[tuple[EngineMode, int]]:
    out = []
    for mode in config.modes:
        if mode is EngineMode.SEQUENTIAL:
            out.append((mode, 1))
        else:
            out.extend((mode, t) for t in config.threads)
    return out


def time_cases(prop: Propagator, cases: Sequence[Evidence], clock: Callable[[], float] = time.perf_counter):
    """Run every case once, timing only the inference call. Returns (durations, results)."""
    durations, results = [], []
    for ev in cases:
        start = clock()
        try:
            res = prop.run_case(ev)
        except ZeroProbabilityEvidence:
            res = None
        durations.append(clock() - start)
        results.append(res)
    return durations, results


def results_checksum(results, net: BayesianNetwork) -> int:
    return checksum(row for i, res in enumerate(results) for row in posterior_rows(i, res, net))


def run_benchmark(net: BayesianNetwork, tree: JunctionTree, config: BenchmarkConfig,
                  clock: Callable[[], float] = time.perf_counter, cases=None, progress=None) -> BenchmarkReport:
    """Time every (mode, threads) configuration on one shared case set.

    The junction tree is built by the caller, so construction never enters the
    timings; each configuration also runs one untimed warm-up case.
    """
    if cases is None:
        cases = generate_cases(net, config.num_cases, config.evidence_ratio, config.seed)
    report = BenchmarkReport(config, list(cases))
    for mode, t in configurations(config):
        with Propagator(tree, mode, t, config.chunk) as prop:
            try:
                prop.run_case(cases[0])
            except ZeroProbabilityEvidence:
                pass
            durations, results = time_cases(prop, cases, clock)
        ms = np.asarray(durations) * 1e3
        row = BenchmarkRow(
            mode, t, len(cases), float(sum(durations)), float(ms.mean()), float(statistics.median(ms)),
            float(np.percentile(ms, 95)), results_checksum(results, net),
        )
        report.rows.append(row)
        if progress is not None:
            progress(row)
    seq = next((r for r in report.rows if r.mode is EngineMode.SEQUENTIAL), None)
    if seq is not None:
        for r in report.rows:
            r.speedup = seq.total_s / r.total_s if r.total_s > 0 else None
    return report
