from src.application.combiners.topologies import (
    bottleneck,
    combine_consec1,
    combine_consec2,
    combine_consec_fc,
    combine_simultaneous,
    fc_transform,
    flatten_systems,
    stack_heads,
    stack_systems,
)

__all__ = [
    "bottleneck",
    "combine_consec1",
    "combine_consec2",
    "combine_consec_fc",
    "combine_simultaneous",
    "fc_transform",
    "flatten_systems",
    "stack_heads",
    "stack_systems",
]
