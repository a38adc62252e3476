"""Asynchronous distributed data augmentation: one manager, k block workers."""

from .engine import AddaConfig, FaultPlan, adda_run
from .model import BlockedAugmentedModel, check_block_locality, discrete_blocked_model
from .protocol import SHUTDOWN, BlockUpdate, Manager, ParamBroadcast, Shutdown, Worker
from .report import AddaReport, WallClockRow, adda_wall_clock_report
from .schedule import CompletionSchedule, EpochPlan, LatencyModel, LatencySchedule

__all__ = [
    "AddaConfig",
    "AddaReport",
    "BlockUpdate",
    "BlockedAugmentedModel",
    "CompletionSchedule",
    "EpochPlan",
    "FaultPlan",
    "LatencyModel",
    "LatencySchedule",
    "Manager",
    "ParamBroadcast",
    "SHUTDOWN",
    "Shutdown",
    "WallClockRow",
    "Worker",
    "adda_run",
    "adda_wall_clock_report",
    "check_block_locality",
    "discrete_blocked_model",
]
