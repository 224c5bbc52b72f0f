#!/usr/bin/env python3
"""
Reproduce the three degree-density experiments.

Each experiment grows 10 graphs until they reach 10,000 vertices and compares the
mean degree density across runs with two predicted laws:
1. the printed stationary law (one endpoint of an added edge gains a degree)
2. the corrected law (both endpoints gain a degree)

Writes the ensemble summaries, the comparison reports and a JSON digest to data/figures/.
"""

import json
import logging
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

# Add src directory to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from analytics import model_params, rate_limits
from export_data import write_comparison_csv, write_ensemble_csv
from model_dsl import preset
from rules_engine import StopCondition
from sim_harness import ComparisonMetrics, EnsembleStats, compare_with_predictors, run_ensemble

OUTPUT_DIR = Path(__file__).parent.parent / "data" / "figures"
RUNS = 10
VERTICES = 10_000
SEED = 42


@dataclass
class Experiment:
    """One degree-density experiment."""
    label: str
    preset: str
    params: List[Fraction]


EXPERIMENTS = [
    Experiment(label="connected", preset="connected", params=[Fraction(1, 2)]),
    Experiment(label="two_vertex_connected", preset="two_vertex_connected", params=[Fraction(1, 2)]),
    Experiment(label="two_edge_connected", preset="two_edge_connected", params=[Fraction(1, 3), Fraction(1, 3)]),
]


@dataclass
class ExperimentResult:
    label: str
    stats: EnsembleStats
    comparisons: List[ComparisonMetrics]
    rate_mean_degree: float
    empirical_mean_degree: float

    @property
    def best(self) -> ComparisonMetrics:
        return min(self.comparisons, key=lambda metrics: metrics.tv)

    @property
    def mean_degree_error(self) -> float:
        """Relative gap between the ensemble's 2m/n and 2 dm/dn."""
        return abs(self.empirical_mean_degree - self.rate_mean_degree) / self.rate_mean_degree


def run_experiment(experiment: Experiment, runs: int = RUNS, vertices: int = VERTICES,
                   seed: int = SEED, jobs: int = 1) -> ExperimentResult:
    model = preset(experiment.preset, experiment.params)
    stats = run_ensemble(model, runs, StopCondition.at_vertices(vertices), seed, jobs=jobs)
    kind, params = model_params(model)
    return ExperimentResult(
        label=experiment.label,
        stats=stats,
        comparisons=compare_with_predictors(stats, kind, params),
        rate_mean_degree=rate_limits(model).mean_degree,
        empirical_mean_degree=stats.empirical_mean_degree(),
    )


def print_assumptions(runs: int, vertices: int, seed: int):
    print("\n" + "=" * 80)
    print("KEY ASSUMPTIONS AND INPUTS")
    print("=" * 80)
    print(f"\n1. RUNS: {runs} independent graphs per model, master seed {seed}")
    print(f"2. STOP: after the step that first reaches {vertices:,} vertices")
    print("3. MODELS:")
    for experiment in EXPERIMENTS:
        values = ", ".join(str(p) for p in experiment.params)
        print(f"   - {experiment.label} ({values})")
    print("4. DENSITIES: computed per run, then averaged per degree across runs")
    print("5. PREDICTORS: printed law and corrected law, compared by total variation")


def print_experiment_summary(result: ExperimentResult):
    stats = result.stats
    print(f"\n{'=' * 80}")
    print(f"{result.label} - {stats.runs} runs")
    print(f"{'=' * 80}")
    print(f"Mean steps: {stats.mean_steps():,.1f}")
    print(f"Mean vertices: {stats.mean_order():,.1f}")
    print(f"Mean edges: {stats.mean_size():,.1f}")
    print(f"Mean degree: {result.empirical_mean_degree:.4f} (rates give {result.rate_mean_degree:.4f}, "
          f"off by {result.mean_degree_error * 100:.2f}%)")
    print(f"\n{'Predictor':<12} {'TV':<14} {'Max |dev|':<14} {'Mean emp':<12} {'Mean pred':<12}")
    print("-" * 80)
    for metrics in result.comparisons:
        print(f"{metrics.predictor:<12} {metrics.tv:<14.6f} {metrics.max_abs_dev:<14.6f} "
              f"{metrics.mean_emp:<12.4f} {metrics.mean_pred:<12.4f}")
    print(f"\nCloser fit: {result.best.predictor}")


def save_results(results: List[ExperimentResult], output_dir: Path = OUTPUT_DIR) -> Path:
    output_dir.mkdir(parents=True, exist_ok=True)
    digest = {}
    for result in results:
        write_ensemble_csv(result.stats, output_dir / f"{result.label}_ensemble.csv")
        write_comparison_csv(result.comparisons, output_dir / f"{result.label}_comparison.csv")
        digest[result.label] = {
            'runs': result.stats.runs,
            'mean_vertices': result.stats.mean_order(),
            'mean_edges': result.stats.mean_size(),
            'empirical_mean_degree': result.empirical_mean_degree,
            'rate_mean_degree': result.rate_mean_degree,
            'comparisons': [asdict(metrics) for metrics in result.comparisons],
            'closer_fit': result.best.predictor,
        }
    output_file = output_dir / "summary.json"
    with open(output_file, 'w') as f:
        json.dump(digest, f, indent=2)
    return output_file


def main(runs: int = RUNS, vertices: int = VERTICES, seed: int = SEED, jobs: Optional[int] = None):
    """Run all three experiments and write their reports."""
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    print("=" * 80)
    print("DEGREE DENSITY EXPERIMENTS")
    print("=" * 80)

    print_assumptions(runs, vertices, seed)

    results = []
    for experiment in EXPERIMENTS:
        result = run_experiment(experiment, runs, vertices, seed, jobs or 1)
        print_experiment_summary(result)
        results.append(result)

    output_file = save_results(results)
    print(f"\n{'=' * 80}")
    print(f"Results saved to: {output_file}")
    print(f"{'=' * 80}")

    print("\n" + "=" * 80)
    print("COMPARISON SUMMARY")
    print("=" * 80)
    for result in results:
        tvs = ", ".join(f"{m.predictor} {m.tv:.4f}" for m in result.comparisons)
        print(f"  {result.label:<22} TV: {tvs}  (closer fit: {result.best.predictor})")


if __name__ == "__main__":
    main()
