"""Markov-chain sampling of the Gibbs measure for both model variants."""

from .chain import (
    RECORD_FIELDS,
    ChainState,
    MonteCarloError,
    SweepBlock,
    advance,
    cluster_update_phi,
    metropolis_color_update,
    metropolis_sweep,
    replica_exchange_step,
    swap_configurations,
    tune_width,
)
from .run import (
    RunPlan,
    RunResult,
    default_theta_grid,
    read_checkpoint_header,
    record_stream_digest,
    run,
)

__all__ = [
    "RECORD_FIELDS",
    "ChainState",
    "MonteCarloError",
    "RunPlan",
    "RunResult",
    "SweepBlock",
    "advance",
    "cluster_update_phi",
    "default_theta_grid",
    "metropolis_color_update",
    "metropolis_sweep",
    "read_checkpoint_header",
    "record_stream_digest",
    "replica_exchange_step",
    "run",
    "swap_configurations",
    "tune_width",
]
