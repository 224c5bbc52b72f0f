#!/usr/bin/env python3
"""
Seeded ensembles of PICG growth runs, per-degree summaries across runs and
comparison of empirical degree densities with the predicted laws.
"""

import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from analytics import Distribution, degree_law_table
from errors import BadParams, InvariantViolation, NotNormalized
from graph_core import GraphProperty, MultiGraph, check_property, degree_density
from model_dsl import preset_kind
from random_stream import derive_seed
from rules_engine import PicgModel, StepRecord, StopCondition, check_conservation, grow

logger = logging.getLogger(__name__)

MONITOR_PERIOD = 100
NORMALIZATION_TOLERANCE = 1e-9

CLASS_PROPERTY: Dict[str, GraphProperty] = {
    "pa": GraphProperty.CONNECTED,
    "connected": GraphProperty.CONNECTED,
    "simple_connected": GraphProperty.CONNECTED,
    "two_vertex_connected": GraphProperty.BICONNECTED,
    "two_edge_connected": GraphProperty.TWO_EDGE_CONNECTED,
}


@dataclass
class RunSummary:
    """Final state of one run of an ensemble."""
    index: int
    seed: int
    basis: str
    steps: int
    n: int
    m: int
    degree_density: Dict[int, float]
    checks: int = 0


@dataclass
class DegreeSummary:
    degree: int
    minimum: float
    q1: float
    median: float
    q3: float
    maximum: float
    mean: float


@dataclass
class EnsembleStats:
    model_name: str
    runs: int
    stop: StopCondition
    master_seed: int
    degrees: List[DegreeSummary]
    finals: List[RunSummary]

    def mean_degree_distribution(self) -> Distribution:
        """Per-degree mean of the run densities."""
        return Distribution.from_dict({row.degree: row.mean for row in self.degrees})

    def empirical_mean_degree(self) -> float:
        """Mean over runs of 2m/n."""
        return float(np.mean(np.sort([2 * run.m / run.n for run in self.finals])))

    def mean_order(self) -> float:
        return float(np.mean(np.sort([run.n for run in self.finals])))

    def mean_size(self) -> float:
        return float(np.mean(np.sort([run.m for run in self.finals])))

    def mean_steps(self) -> float:
        return float(np.mean(np.sort([run.steps for run in self.finals])))


@dataclass
class ComparisonMetrics:
    """Fit of an empirical distribution to a predicted one."""
    tv: float
    max_abs_dev: float
    mean_emp: float
    mean_pred: float
    predictor: str = ""


@dataclass
class TrajectoryPoint:
    t: int
    mean_n: float
    mean_m: float


@dataclass
class _Monitor:
    """Observer that checks the class property every `period` steps; reads the graph only."""
    prop: Optional[GraphProperty]
    period: int
    checks: int = 0

    def __call__(self, t: int, g: MultiGraph, record: StepRecord) -> None:
        if t % self.period == 0:
            self.check(t, g)

    def check(self, t: int, g: MultiGraph) -> None:
        if self.prop is None:
            return
        self.checks += 1
        if not check_property(g, self.prop):
            raise InvariantViolation(f"graph after step {t} is not {self.prop.value} ({g!r})")


def class_property(model: PicgModel) -> Optional[GraphProperty]:
    """Structural property every graph of the model's class has, when known."""
    recognized = preset_kind(model)
    return CLASS_PROPERTY[recognized[0]] if recognized else None


def run_single(model: PicgModel, stop: StopCondition, seed: int, index: int = 0,
               check_invariants: bool = False, check_every: int = MONITOR_PERIOD) -> RunSummary:
    """Grow one graph and reconcile its trace; optionally monitor the class property."""
    monitor = _Monitor(class_property(model) if check_invariants else None, max(1, check_every))
    g, trace = grow(model, stop, seed, observer=monitor if check_invariants else None)
    steps = len(trace.steps)

    trace.reconcile(g)
    check_conservation(model, trace)
    delta_m = {rule.delta_m for rule in model.rules}
    if len(delta_m) == 1 and g.m != trace.m0 + steps * delta_m.pop():
        raise InvariantViolation(f"run {index}: m={g.m} after {steps} steps breaks the size law")
    delta_n = {rule.delta_n for rule in model.rules}
    if len(delta_n) == 1 and g.n != trace.n0 + steps * delta_n.pop():
        raise InvariantViolation(f"run {index}: n={g.n} after {steps} steps breaks the order law")
    if check_invariants:
        monitor.check(steps, g)

    return RunSummary(index=index, seed=seed, basis=trace.basis_name, steps=steps, n=g.n, m=g.m,
                      degree_density=degree_density(g), checks=monitor.checks)


def _run_worker(job: Tuple[PicgModel, StopCondition, int, int, bool, int]) -> RunSummary:
    model, stop, seed, index, check_invariants, check_every = job
    return run_single(model, stop, seed, index, check_invariants, check_every)


def summarize_degrees(finals: Sequence[RunSummary]) -> List[DegreeSummary]:
    """Five-number summary and mean of each degree's density across runs (0 where absent)."""
    degrees = sorted({d for run in finals for d in run.degree_density})
    rows = []
    for d in degrees:
        values = np.sort([run.degree_density.get(d, 0.0) for run in finals])
        low, q1, median, q3, high = np.percentile(values, [0, 25, 50, 75, 100])
        rows.append(DegreeSummary(degree=d, minimum=float(low), q1=float(q1), median=float(median),
                                  q3=float(q3), maximum=float(high), mean=float(np.mean(values))))
    return rows


def run_ensemble(model: PicgModel, runs: int, stop: StopCondition, master_seed: int, jobs: int = 1,
                 check_invariants: bool = False, check_every: int = MONITOR_PERIOD) -> EnsembleStats:
    """`runs` independent grows; run k uses derive_seed(master_seed, k).

    Results do not depend on `jobs`.
    """
    if runs < 1:
        raise BadParams(f"runs must be >= 1, got {runs}")
    work = [(model, stop, derive_seed(master_seed, k), k, check_invariants, check_every) for k in range(runs)]
    logger.info("ensemble %s: %d runs, %s, master seed %d, %d job(s)",
                model.name, runs, stop.describe(), master_seed, jobs)

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            finals = list(pool.map(_run_worker, work))
    else:
        finals = []
        for job in work:
            finals.append(_run_worker(job))
            logger.debug("run %d done: n=%d m=%d", finals[-1].index, finals[-1].n, finals[-1].m)

    finals.sort(key=lambda run: run.index)
    return EnsembleStats(model_name=model.name, runs=runs, stop=stop, master_seed=master_seed,
                         degrees=summarize_degrees(finals), finals=finals)


def _check_normalized(dist: Distribution, label: str) -> None:
    total = dist.total()
    if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
        raise NotNormalized(f"{label} distribution sums to {total:.12g}")


def compare_distributions(empirical: Distribution, predicted: Distribution, predictor: str = "") -> ComparisonMetrics:
    """Total variation, largest pointwise gap and both means over the union support."""
    _check_normalized(empirical, "empirical")
    _check_normalized(predicted, "predicted")
    low = min(empirical.offset, predicted.offset)
    high = max(empirical.offset + len(empirical.probs), predicted.offset + len(predicted.probs))
    p = np.zeros(high - low)
    p_hat = np.zeros(high - low)
    p[predicted.offset - low:predicted.offset - low + len(predicted.probs)] = predicted.probs
    p_hat[empirical.offset - low:empirical.offset - low + len(empirical.probs)] = empirical.probs
    gaps = np.abs(p_hat - p)
    return ComparisonMetrics(
        tv=float(min(1.0, 0.5 * gaps.sum())),
        max_abs_dev=float(gaps.max()) if len(gaps) else 0.0,
        mean_emp=empirical.mean(),
        mean_pred=predicted.mean(),
        predictor=predictor,
    )


def empirical_degree_distribution(stats: EnsembleStats) -> Distribution:
    return stats.mean_degree_distribution()


def compare_with_predictors(stats: EnsembleStats, kind: str, params: Sequence) -> List[ComparisonMetrics]:
    """Comparison of the ensemble's mean degree density with the printed and corrected laws."""
    empirical = stats.mean_degree_distribution()
    results = []
    for law in ("paper", "corrected"):
        predicted = degree_law_table(kind, params, law)
        results.append(compare_distributions(empirical, predicted, predictor=law))
    return results


def trajectory(model: PicgModel, checkpoints: Sequence[int], runs: int, seed: int) -> List[TrajectoryPoint]:
    """Mean n and m over `runs` runs at each checkpoint step."""
    points = list(checkpoints)
    if not points or any(b <= a for a, b in zip(points, points[1:])) or points[0] < 0:
        raise BadParams(f"checkpoints must be ascending and >= 0, got {points}")
    if runs < 1:
        raise BadParams(f"runs must be >= 1, got {runs}")

    wanted = set(points)
    totals = {t: [0, 0] for t in points}
    for k in range(runs):
        def record(t: int, g: MultiGraph, step: StepRecord) -> None:
            if t in wanted:
                totals[t][0] += g.n
                totals[t][1] += g.m

        g, trace = grow(model, StopCondition.after_steps(points[-1]), derive_seed(seed, k), observer=record)
        if 0 in wanted:
            totals[0][0] += trace.n0
            totals[0][1] += trace.m0

    return [TrajectoryPoint(t, totals[t][0] / runs, totals[t][1] / runs) for t in points]
