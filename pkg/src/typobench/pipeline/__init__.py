from .experiment import (
    ConfigError,
    ExperimentConfig,
    collect_trajectories,
    load_config,
    parse_config,
    report_from_runs,
    run_experiment,
)
from .external import ExternalSystemError, ExternalSystemSpec, run_external
from .runs import (
    CorpusInput,
    MissingBaseCorpusError,
    OracleSelection,
    RunRecord,
    correct_ladder,
    correction_ladder,
    correction_pipeline,
    translate,
    oracle_select,
    score_native,
    score_runs,
    translate_ladder,
)

__all__ = [
    "ConfigError",
    "CorpusInput",
    "ExperimentConfig",
    "ExternalSystemError",
    "ExternalSystemSpec",
    "MissingBaseCorpusError",
    "OracleSelection",
    "RunRecord",
    "collect_trajectories",
    "correct_ladder",
    "correction_ladder",
    "correction_pipeline",
    "translate",
    "load_config",
    "oracle_select",
    "parse_config",
    "report_from_runs",
    "run_experiment",
    "run_external",
    "score_native",
    "score_runs",
    "translate_ladder",
]
