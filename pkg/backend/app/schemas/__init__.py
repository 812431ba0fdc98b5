"""
Schemas Pydantic para o HelpCap
"""

from .base import BaseSchema
from .channel import ChannelFile, Channel
from .policy import AuxiliaryPolicy, JointDistribution, MiPair
from .capacity import (
    CapacityMethod, OptimOptions, GPoint, EnvelopePoint, Envelope,
    CapacityDiagnostics, CapacityResult
)
from .oracles import OracleCase, OracleValue, ModAdditiveDetection
from .simulation import CodebookMode, SimConfig, PolicyFile, Codebook, TrialRecord, SimReport
from .manifest import RunManifest

__all__ = [
    "BaseSchema",
    "ChannelFile",
    "Channel",
    "AuxiliaryPolicy",
    "JointDistribution",
    "MiPair",
    "CapacityMethod",
    "OptimOptions",
    "GPoint",
    "EnvelopePoint",
    "Envelope",
    "CapacityDiagnostics",
    "CapacityResult",
    "OracleCase",
    "OracleValue",
    "ModAdditiveDetection",
    "CodebookMode",
    "SimConfig",
    "PolicyFile",
    "Codebook",
    "TrialRecord",
    "SimReport",
    "RunManifest",
]
