"""Multimodal behavioural indicators, latent class fusion and epistemic network comparison."""
from .model import (IndicatorCatalog, IntervalRecord, Modality, OutcomeGroups, RawSession, TaskType,
                    ZoneSpec, default_catalog)

__version__ = "0.1.0"

__all__ = ["IndicatorCatalog", "IntervalRecord", "Modality", "OutcomeGroups", "RawSession", "TaskType",
           "ZoneSpec", "default_catalog", "__version__"]
