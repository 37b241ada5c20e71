"""Offline-to-online reinforcement learning toolkit.

TD3+BC offline pretraining, a randomized ensemble of critics, offline replay
downsampling, and an adaptive behavior-cloning weight controller, with two
built-in continuous-control tasks. The heavy lifting lives in the compiled
`o2orl._core` extension; this package re-exports its public surface.
"""

from o2orl._core import (
    AlphaController,
    AlphaSettings,
    DenseNet,
    DownsampleMode,
    Env,
    EnvSpec,
    EvalStats,
    OfflineDataset,
    Origin,
    ReferenceScores,
    ReplayBuffer,
    StepResult,
    TargetMode,
    Tier,
    Transition,
    evaluate_checkpoint,
    load_dataset,
    make_env_spec,
    normalize_return,
    resolve_target,
    run_cli,
    save_dataset,
)

__all__ = [
    "AlphaController",
    "AlphaSettings",
    "DenseNet",
    "DownsampleMode",
    "Env",
    "EnvSpec",
    "EvalStats",
    "OfflineDataset",
    "Origin",
    "ReferenceScores",
    "ReplayBuffer",
    "StepResult",
    "TargetMode",
    "Tier",
    "Transition",
    "evaluate_checkpoint",
    "load_dataset",
    "make_env_spec",
    "normalize_return",
    "resolve_target",
    "run_cli",
    "save_dataset",
]

__version__ = "0.1.0"
