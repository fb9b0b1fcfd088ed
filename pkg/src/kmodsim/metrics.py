"""Session timing, space accounting, and the cross-strategy bench harness."""

from __future__ import annotations

import statistics
import time
from dataclasses import dataclass
from typing import Iterable, Sequence

from .catalog import ModuleCatalog
from .errors import ConfigError
from .hardware import HardwareInventory
from .loader import (
    DUP_ATTEMPT,
    LOAD,
    SKIP_FLAG,
    SKIP_HW,
    LoadEvent,
    LoadState,
    StrategyConfig,
    STRATEGIES,
    load_stage0,
    load_stage1,
    run_strategy,
)
from .registry import (
    SelectionPolicy,
    register_v0,
    register_v1,
    resolve_selection,
)


@dataclass(frozen=True)
class SessionTiming:
    """Wall time between first and last LOAD, plus per-kind event counts."""

    first_load_us: int
    last_load_us: int
    wall_us: int
    loads: int
    skips_hw: int
    skips_flag: int
    dup_attempts: int


@dataclass(frozen=True)
class SpaceReport:
    """Kernel-size accounting; total = loaded + saved + base_only, exactly."""

    total_kb: int
    loaded_kb: int
    saved_kb: int
    base_only_kb: int


@dataclass(frozen=True)
class StrategyResult:
    strategy: str
    reps: int
    median_wall_us: float
    normalized: float | None
    loads: int
    dup_attempts: int
    loaded: frozenset[str]


@dataclass(frozen=True)
class CompositeResult:
    """Measured cost of one registration plus four loads, per index format.

    Timed with a real clock around the calls and with simulated attach
    latency off, so the comparison isolates the algorithmic work the two
    pipelines actually differ in (hardware checks and dependency walking at
    load time versus at registration time).
    """

    v0_us: float
    v1_us: float

    @property
    def improvement_pct(self) -> float:
        if self.v1_us <= 0:
            return 0.0
        return (self.v0_us / self.v1_us - 1.0) * 100.0


@dataclass(frozen=True)
class BenchReport:
    workers: int
    repetitions: int
    results: tuple[StrategyResult, ...]
    composite: CompositeResult


def timing_from_trace(trace: Sequence[LoadEvent]) -> SessionTiming:
    """Fold a trace into counts and first/last-LOAD wall time.

    Only LOAD events carry timing; reordering or removing other events never
    changes the result beyond their own counters.
    """
    counts = {LOAD: 0, SKIP_HW: 0, SKIP_FLAG: 0, DUP_ATTEMPT: 0}
    first = last = 0
    for event in trace:
        counts[event.kind] += 1
        if event.kind == LOAD:
            ts = event.timestamp_us
            if counts[LOAD] == 1:
                first = last = ts
            else:
                first = min(first, ts)
                last = max(last, ts)
    return SessionTiming(
        first_load_us=first,
        last_load_us=last,
        wall_us=last - first,
        loads=counts[LOAD],
        skips_hw=counts[SKIP_HW],
        skips_flag=counts[SKIP_FLAG],
        dup_attempts=counts[DUP_ATTEMPT],
    )


def space_report(catalog: ModuleCatalog, state: LoadState | Iterable[str]) -> SpaceReport:
    """Account catalog size against what a finished session actually attached.

    ``state`` may be a LoadState or any iterable of dynamically loaded module
    names. Base-kernel modules are bucketed separately: they are resident
    whether or not anything ran.
    """
    loaded_names = state.loaded() if isinstance(state, LoadState) else frozenset(state)
    total = loaded = base_only = 0
    for rec in catalog.records:
        total += rec.size_kb
        if rec.base_kernel_only:
            base_only += rec.size_kb
        elif rec.name in loaded_names:
            loaded += rec.size_kb
    return SpaceReport(
        total_kb=total,
        loaded_kb=loaded,
        saved_kb=total - loaded - base_only,
        base_only_kb=base_only,
    )


def bench(
    catalog: ModuleCatalog,
    policy: SelectionPolicy,
    inventory: HardwareInventory,
    strategies: Sequence[str],
    workers: int,
    repetitions: int = 5,
    load_base_us: float = 0.0,
    load_per_kb_us: float = 0.0,
) -> BenchReport:
    """Run every strategy on identical inputs and compare median wall times.

    Scores are normalized to stage0's median (1.0 by construction) when
    stage0 is among the strategies; otherwise they are omitted. The composite
    registration+4-loads metric for the v0 and v1 pipelines is always
    included.
    """
    if repetitions < 1:
        raise ConfigError(f"repetitions must be at least 1, got {repetitions}")
    for strategy in strategies:
        if strategy not in STRATEGIES:
            raise ConfigError(f"unknown strategy {strategy!r}")

    # Interactive policies would otherwise prompt once per run; pin the
    # selection up front so every run sees the identical choice.
    policy = SelectionPolicy.from_file(resolve_selection(catalog, policy))

    index_v0 = register_v0(catalog, policy)
    index_v1 = register_v1(catalog, policy, inventory)

    rows = []
    for strategy in strategies:
        config = StrategyConfig(
            strategy=strategy,
            workers=workers,
            load_base_us=load_base_us,
            load_per_kb_us=load_per_kb_us,
        )
        index = index_v1 if strategy == "stage1" else index_v0
        walls, loads, dups = [], 0, 0
        loaded: frozenset[str] | None = None
        for _ in range(repetitions):
            state, trace = run_strategy(catalog, index, inventory, config)
            timing = timing_from_trace(trace)
            walls.append(timing.wall_us)
            loads, dups = timing.loads, timing.dup_attempts
            if loaded is None:
                loaded = state.loaded()
            else:
                assert state.loaded() == loaded, "loaded set changed between repetitions"
        rows.append((strategy, statistics.median(walls), loads, dups, loaded or frozenset()))

    base = next((wall for strategy, wall, *_ in rows if strategy == "stage0"), None)
    results = tuple(
        StrategyResult(
            strategy=strategy,
            reps=repetitions,
            median_wall_us=wall,
            normalized=_normalize(wall, base),
            loads=loads,
            dup_attempts=dups,
            loaded=loaded,
        )
        for strategy, wall, loads, dups, loaded in rows
    )
    composite = _composite(catalog, policy, inventory, repetitions)
    return BenchReport(
        workers=workers, repetitions=repetitions, results=results, composite=composite
    )


def _normalize(wall: float, base: float | None) -> float | None:
    if base is None:
        return None
    if base == 0:
        return 1.0 if wall == 0 else float("inf")
    return wall / base


def _composite(catalog, policy, inventory, repetitions) -> CompositeResult:
    v0_samples, v1_samples = [], []
    instant0 = StrategyConfig("stage0")
    instant1 = StrategyConfig("stage1")
    for _ in range(repetitions):
        t0 = time.perf_counter_ns()
        index = register_v0(catalog, policy)
        for _ in range(4):
            load_stage0(catalog, index, inventory, instant0)
        v0_samples.append((time.perf_counter_ns() - t0) / 1000)

        t0 = time.perf_counter_ns()
        index = register_v1(catalog, policy, inventory)
        for _ in range(4):
            load_stage1(catalog, index, inventory, instant1)
        v1_samples.append((time.perf_counter_ns() - t0) / 1000)
    return CompositeResult(
        v0_us=statistics.median(v0_samples), v1_us=statistics.median(v1_samples)
    )


CSV_HEADER = "strategy,workers,reps,median_wall_us,normalized_to_stage0,loads,dup_attempts"


def render_bench_csv(report: BenchReport) -> str:
    lines = [CSV_HEADER]
    for r in report.results:
        normalized = "" if r.normalized is None else f"{r.normalized:.3f}"
        lines.append(
            f"{r.strategy},{report.workers},{r.reps},"
            f"{r.median_wall_us:.1f},{normalized},{r.loads},{r.dup_attempts}"
        )
    return "\n".join(lines) + "\n"


def render_bench_text(report: BenchReport) -> str:
    lines = [
        f"bench: workers={report.workers} reps={report.repetitions} "
        "(scores normalized to stage0 median wall)",
        f"{'strategy':<10} {'median_wall_us':>14} {'normalized':>10} {'loads':>6} {'dups':>5}",
    ]
    for r in report.results:
        normalized = "-" if r.normalized is None else f"{r.normalized:.3f}"
        lines.append(
            f"{r.strategy:<10} {r.median_wall_us:>14.1f} {normalized:>10} "
            f"{r.loads:>6} {r.dup_attempts:>5}"
        )
    c = report.composite
    lines.append("composite (1 registration + 4 loads, attach latency off):")
    lines.append(f"  v0 pipeline: {c.v0_us:.1f} us")
    lines.append(f"  v1 pipeline: {c.v1_us:.1f} us")
    lines.append(f"  v1 improvement: {c.improvement_pct:.0f}%")
    return "\n".join(lines) + "\n"


def render_session_text(timing: SessionTiming, space: SpaceReport) -> str:
    return (
        f"loads:        {timing.loads}\n"
        f"skips_hw:     {timing.skips_hw}\n"
        f"skips_flag:   {timing.skips_flag}\n"
        f"dup_attempts: {timing.dup_attempts}\n"
        f"first_load_us: {timing.first_load_us}\n"
        f"last_load_us:  {timing.last_load_us}\n"
        f"wall_us:       {timing.wall_us}\n"
        f"total_kb:     {space.total_kb}\n"
        f"loaded_kb:    {space.loaded_kb}\n"
        f"saved_kb:     {space.saved_kb}\n"
        f"base_only_kb: {space.base_only_kb}\n"
    )


def render_session_csv(timing: SessionTiming, space: SpaceReport) -> str:
    header = (
        "loads,skips_hw,skips_flag,dup_attempts,first_load_us,last_load_us,wall_us,"
        "total_kb,loaded_kb,saved_kb,base_only_kb"
    )
    row = (
        f"{timing.loads},{timing.skips_hw},{timing.skips_flag},{timing.dup_attempts},"
        f"{timing.first_load_us},{timing.last_load_us},{timing.wall_us},"
        f"{space.total_kb},{space.loaded_kb},{space.saved_kb},{space.base_only_kb}"
    )
    return header + "\n" + row + "\n"
