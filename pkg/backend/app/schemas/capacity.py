"""
Schemas para o otimizador de capacidade
"""

from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import Field, field_validator

from ..config import settings
from .base import BaseSchema, frozen_array
from .policy import AuxiliaryPolicy


class CapacityMethod(str, Enum):
    """Caminho de cálculo"""

    ENVELOPE = "envelope"
    RATE_SPLIT = "rate_split"
    BRUTE_FORCE = "brute_force"


class OptimOptions(BaseSchema):
    """Opções do otimizador (padrões vêm de settings)"""

    r_grid_size: int = Field(default_factory=lambda: settings.r_grid_size, ge=1)
    restarts: int = Field(default_factory=lambda: settings.restarts, ge=1)
    max_iters: int = Field(default_factory=lambda: settings.max_iters, ge=1)
    step_init: float = Field(default_factory=lambda: settings.step_init, gt=0)
    penalty_schedule: List[float] = Field(default_factory=lambda: list(settings.penalty_schedule))
    phi_enum_cap: int = Field(default_factory=lambda: settings.phi_enum_cap, ge=1)
    phi_samples: int = Field(default_factory=lambda: settings.phi_samples, ge=1)
    rate_split_grid_size: int = Field(default_factory=lambda: settings.rate_split_grid_size, ge=2)
    seed: int = Field(0, ge=0, lt=2**64, description="Seed de 64 bits")
    u_size: Optional[int] = Field(None, ge=1, description="|U|; None usa |X|·|S|+1")
    tol: float = Field(1e-12, gt=0, description="Melhoria mínima por iteração")
    jobs: int = Field(default_factory=lambda: settings.default_jobs, ge=1)

    @field_validator("penalty_schedule")
    @classmethod
    def check_schedule(cls, v):
        if not v or any(m <= 0 for m in v):
            raise ValueError("penalty_schedule must contain positive multipliers")
        return v


class GPoint(BaseSchema):
    """Solução do problema interno para um orçamento r"""

    r: float = Field(..., description="Orçamento de taxa de ajuda (bits)")
    g: float = Field(..., description="I(U;Y) − I(U;S) no ótimo encontrado (bits)")
    q_u_given_s: np.ndarray = Field(..., description="Q_{U|S}, array (|S|, |U|)")
    phi: np.ndarray = Field(..., description="φ: U → X")
    slack: float = Field(..., description="r − I(U;S) no ótimo")
    i_uy: float = Field(..., description="I(U;Y) (bits)")
    i_us: float = Field(..., description="I(U;S) (bits)")
    phi_rank: int = Field(0, description="Posição de φ na ordem lexicográfica")
    restart: int = Field(0, description="Índice do recomeço que produziu o ponto")

    @field_validator("q_u_given_s", mode="before")
    @classmethod
    def freeze_q(cls, v):
        return frozen_array(v)

    @field_validator("phi", mode="before")
    @classmethod
    def freeze_phi(cls, v):
        return frozen_array(v, dtype=np.int64)


class EnvelopePoint(BaseSchema):
    """Ponto de suporte do envelope côncavo"""

    index: int = Field(..., description="Índice na lista de pontos de entrada")
    r: float
    g: float
    weight: float = Field(..., ge=0, le=1)


class Envelope(BaseSchema):
    """Envelope côncavo superior avaliado em um orçamento"""

    query: float = Field(..., description="Orçamento consultado")
    value_at: float = Field(..., description="Valor do envelope na consulta")
    support: List[EnvelopePoint] = Field(..., min_length=1, max_length=3)

    @property
    def weights(self) -> List[float]:
        return [p.weight for p in self.support]


class CapacityDiagnostics(BaseSchema):
    """Diagnósticos do cálculo"""

    restarts_used: int = 0
    slack: float = Field(0.0, description="Rh − I(U;S|V) da política devolvida")
    support_rs: List[float] = Field(default_factory=list)
    support_gs: List[float] = Field(default_factory=list)
    support_ws: List[float] = Field(default_factory=list)
    grid_points: int = 0
    lattice_step: Optional[float] = Field(None, description="Resolução do reticulado (força bruta)")


class CapacityResult(BaseSchema):
    """Resultado do cálculo de C(Rh)"""

    rh: float = Field(..., ge=0, description="Taxa de ajuda Rh (bits)")
    c: float = Field(..., description="C_I(Rh) calculado (bits)")
    policy: AuxiliaryPolicy
    r0: float = Field(..., description="Taxa de bits enviados diretamente pelo auxiliar")
    method: CapacityMethod
    diagnostics: CapacityDiagnostics = Field(default_factory=CapacityDiagnostics)
