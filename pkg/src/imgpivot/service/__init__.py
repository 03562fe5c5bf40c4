"""Campaign service: durable caption/rating collection campaigns behind an
HTTP + JSON API, with an append-only journal as the single source of truth."""

from .store import (
    CampaignClosed,
    CampaignStore,
    EmptySubmission,
    InvalidSpec,
    InvalidSubmission,
    LeaseExpired,
    NoTasksAvailable,
    QuotaExceeded,
    UnknownCampaign,
    UnknownLease,
    UnknownTask,
    WorkerIneligible,
)
from .config import ServiceConfig, load_config
from .journal import Journal

__all__ = [
    "CampaignClosed",
    "CampaignStore",
    "EmptySubmission",
    "InvalidSpec",
    "InvalidSubmission",
    "Journal",
    "LeaseExpired",
    "NoTasksAvailable",
    "QuotaExceeded",
    "ServiceConfig",
    "UnknownCampaign",
    "UnknownLease",
    "UnknownTask",
    "WorkerIneligible",
    "load_config",
]
