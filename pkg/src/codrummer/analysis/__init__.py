"""Study statistics: flow-index aggregation, paired tests, PCA, and the
listener-study pipeline, plus the published result tables as fixtures."""

from .flow import (
    FLOW_DIMENSIONS,
    SCORED_DIMENSIONS,
    ConditionStats,
    FlowResponse,
    condition_summary,
    flow_index,
    load_flow_csv,
    participant_condition_means,
    weighted_flow_index,
)
from .listener import (
    ListenerRow,
    ListenerSummary,
    exclude_participants,
    load_listener_csv,
    published_listener_table,
    summarize_listener,
)
from .stats import (
    PairedTResult,
    binomial_test_one_sided,
    paired_t,
    pca_first_component,
)

__all__ = [
    "FLOW_DIMENSIONS",
    "SCORED_DIMENSIONS",
    "ConditionStats",
    "FlowResponse",
    "condition_summary",
    "flow_index",
    "load_flow_csv",
    "participant_condition_means",
    "weighted_flow_index",
    "ListenerRow",
    "ListenerSummary",
    "exclude_participants",
    "load_listener_csv",
    "published_listener_table",
    "summarize_listener",
    "PairedTResult",
    "binomial_test_one_sided",
    "paired_t",
    "pca_first_component",
]
