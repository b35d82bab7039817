"""Budget-aware answer selection from scored candidate pools.

The package covers the full loop: selection rules over verifier-scored
candidates (selection), the verifier's pairwise training objective
(ranking), analytic FLOPs and measured-latency cost models (costs),
bootstrap slate evaluation with budget-equalized curves (evaluate),
synthetic pool generation (synth), and the record format plus CLI
(records, cli).
"""

from .core import (
    NO_ANSWER_KEY,
    AnswerCluster,
    Candidate,
    EmptyPoolError,
    IngestError,
    Problem,
    TokenStats,
    VeriselError,
    canonicalize_answer,
    cluster_by_answer,
)
from .costs import (
    BUNDLED_LATENCY,
    MODEL_PRESETS,
    FlopsBreakdown,
    LatencyTable,
    ModelConfig,
    flops_decode,
    flops_disc_verification,
    flops_generation,
    flops_prefill,
    latency_lookup,
    pipeline_breakdown,
    pipeline_flops,
)
from .evaluate import (
    BootstrapReport,
    BudgetPoint,
    EvalConfig,
    bootstrap_accuracy,
    budget_curve,
    crossover_threshold,
    pass_at_n,
    slate_rng,
)
from .ranking import (
    ScoredGroup,
    bt_loss,
    bt_loss_gradient,
    filter_learnable_groups,
    group_from_problem,
    score_margin,
)
from .records import emit_report, ingest, ingest_stats, write_records
from .selection import (
    SelectionResult,
    select_answer,
    select_bon,
    select_gpv,
    select_pv,
    select_sc,
    select_wsc,
)
from .synth import SynthSpec, generate_pool

__version__ = "0.1.0"

__all__ = [
    "NO_ANSWER_KEY",
    "AnswerCluster",
    "Candidate",
    "EmptyPoolError",
    "IngestError",
    "Problem",
    "TokenStats",
    "VeriselError",
    "canonicalize_answer",
    "cluster_by_answer",
    "BUNDLED_LATENCY",
    "MODEL_PRESETS",
    "FlopsBreakdown",
    "LatencyTable",
    "ModelConfig",
    "flops_decode",
    "flops_disc_verification",
    "flops_generation",
    "flops_prefill",
    "latency_lookup",
    "pipeline_breakdown",
    "pipeline_flops",
    "BootstrapReport",
    "BudgetPoint",
    "EvalConfig",
    "bootstrap_accuracy",
    "budget_curve",
    "crossover_threshold",
    "pass_at_n",
    "slate_rng",
    "ScoredGroup",
    "bt_loss",
    "bt_loss_gradient",
    "filter_learnable_groups",
    "group_from_problem",
    "score_margin",
    "emit_report",
    "ingest",
    "ingest_stats",
    "write_records",
    "SelectionResult",
    "select_answer",
    "select_bon",
    "select_gpv",
    "select_pv",
    "select_sc",
    "select_wsc",
    "SynthSpec",
    "generate_pool",
    "__version__",
]
