from gesl.harness.experiment import (
    Problem, MetricSummary, AggregateResult, SweepResult, build_problem, run_single, aggregate, run_experiment,
    write_results, read_metric_csv, sweep_grid, verify_stepsize_gate, episodes_to_target,
)
from gesl.harness.divergence import DivergenceReport, demo_divergence
