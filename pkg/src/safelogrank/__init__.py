"""Anytime-valid logrank tests for two-group survival data.

The package builds multiplicative evidence processes (e-processes) on the
risk-set filtration of a survival trial: each event contributes a factor
with unit conditional expectation under the null hazard ratio, so the
running product can be monitored continuously and stopped at any time while
keeping the type-I error below alpha.  Exact per-event factors, a
Gaussian approximation on the logrank statistic, learned (plug-in and
Bayes predictive) alternatives, confidence sequences, a Monte Carlo design
engine, dataset I/O, and a command line front end live in the submodules:

- :mod:`safelogrank.core` — risk sets, event batches, exact e-processes
- :mod:`safelogrank.gaussian` — logrank Z, Gaussian e-values, boundaries
- :mod:`safelogrank.adaptive` — plug-in/Bayes numerators, confidence sequences
- :mod:`safelogrank.simulate` — samplers, stopping times, design tables
- :mod:`safelogrank.data` — survival records and delimited-text parsing
- :mod:`safelogrank.cli` — the ``safelogrank`` command
"""

from .core import (
    EventBatch,
    MartingaleState,
    RiskSet,
    evalue_increment,
    log_evalue_increment,
    log_evalue_trace,
    meta_combine,
    score_components,
    update_martingale,
    update_two_sided,
)
from .gaussian import (
    BoundarySpec,
    LogrankSummary,
    boundary_value,
    fixed_sample_boundary,
    gaussian_evalue,
    gaussian_safe_boundary,
    logrank_z,
    null_expectation_audit,
    obf_boundary,
    schoenfeld_mu,
)
from .adaptive import (
    BayesPosterior,
    ConfidenceSequence,
    PriorSpec,
    bayes_log_trace,
    confidence_sequence,
    new_plugin_state,
    plugin_log_trace,
    plugin_update,
)
from .data import (
    SurvivalRecord,
    TrialDataset,
    dataset_from_batches,
    parse_dataset,
    read_dataset,
    write_dataset,
)
from .simulate import (
    DesignSpec,
    SimScenario,
    StoppingReport,
    design_table,
    estimate_nmax,
    sample_single_event_stream,
    sample_tied_stream,
    schoenfeld_sample_size,
    simulate_stopping_times,
    stopping_time,
    stream_rng,
    summarize_stopping,
    wald_expected_stopping,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # core
    "RiskSet",
    "EventBatch",
    "MartingaleState",
    "log_evalue_increment",
    "evalue_increment",
    "update_martingale",
    "update_two_sided",
    "log_evalue_trace",
    "meta_combine",
    "score_components",
    # gaussian
    "LogrankSummary",
    "logrank_z",
    "gaussian_evalue",
    "schoenfeld_mu",
    "null_expectation_audit",
    "gaussian_safe_boundary",
    "obf_boundary",
    "fixed_sample_boundary",
    "BoundarySpec",
    "boundary_value",
    # adaptive
    "PriorSpec",
    "BayesPosterior",
    "ConfidenceSequence",
    "new_plugin_state",
    "plugin_update",
    "plugin_log_trace",
    "bayes_log_trace",
    "confidence_sequence",
    # data
    "SurvivalRecord",
    "TrialDataset",
    "parse_dataset",
    "read_dataset",
    "write_dataset",
    "dataset_from_batches",
    # simulate
    "DesignSpec",
    "SimScenario",
    "StoppingReport",
    "stream_rng",
    "sample_single_event_stream",
    "sample_tied_stream",
    "stopping_time",
    "simulate_stopping_times",
    "estimate_nmax",
    "summarize_stopping",
    "schoenfeld_sample_size",
    "wald_expected_stopping",
    "design_table",
]
