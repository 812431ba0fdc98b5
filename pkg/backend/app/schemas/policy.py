"""
Schemas para variáveis auxiliares (U, V) e a lei conjunta fatorada
"""

import numpy as np
from pydantic import Field, field_validator, model_validator

from ..config import settings
from .base import BaseSchema, frozen_array, is_probability_vector


class AuxiliaryPolicy(BaseSchema):
    """
    Uma solução candidata: Q_V, Q_{U|S,V} e o mapa determinístico φ: (V, U) → X
    """

    v_size: int = Field(..., ge=1, le=3, description="|V| (no máximo 3)")
    u_size: int = Field(..., ge=1, description="|U|")
    q_v: np.ndarray = Field(..., description="Q_V, comprimento |V|")
    q_u_given_sv: np.ndarray = Field(..., description="Q_{U|S,V}, array (|V|, |S|, |U|)")
    phi: np.ndarray = Field(..., description="φ, array inteiro (|V|, |U|) com valores em X")
    help_rates: np.ndarray = Field(
        default_factory=lambda: np.zeros(0),
        description="Orçamento Rh_v de cada ramo (diagnóstico; vazio se não houver)"
    )

    @field_validator("q_v", "q_u_given_sv", "help_rates", mode="before")
    @classmethod
    def freeze_float(cls, v):
        return frozen_array(v)

    @field_validator("phi", mode="before")
    @classmethod
    def freeze_int(cls, v):
        return frozen_array(v, dtype=np.int64)

    @model_validator(mode="after")
    def check_shapes(self):
        tol = settings.prob_tolerance
        if self.q_v.shape != (self.v_size,):
            raise ValueError(f"q_v must have shape ({self.v_size},), got {self.q_v.shape}")
        if self.q_u_given_sv.ndim != 3 or self.q_u_given_sv.shape[0] != self.v_size \
                or self.q_u_given_sv.shape[2] != self.u_size:
            raise ValueError(
                f"q_u_given_sv must have shape ({self.v_size}, |S|, {self.u_size}), "
                f"got {self.q_u_given_sv.shape}"
            )
        if self.phi.shape != (self.v_size, self.u_size):
            raise ValueError(f"phi must have shape ({self.v_size}, {self.u_size}), got {self.phi.shape}")
        if not is_probability_vector(self.q_v, tol):
            raise ValueError("q_v is not a probability vector")
        if not is_probability_vector(self.q_u_given_sv, tol, axis=2):
            raise ValueError("q_u_given_sv rows are not probability vectors")
        if np.any(self.phi < 0):
            raise ValueError("phi must map into X = {0, ..., |X|-1}")
        return self

    @property
    def s_size(self) -> int:
        return int(self.q_u_given_sv.shape[1])


class JointDistribution(BaseSchema):
    """Lei conjunta p(v,u,s,x,y) da fatoração Q_V Q_S Q_{U|S,V} 1[x=φ(v,u)] W"""

    p: np.ndarray = Field(..., description="Array não-negativo (|V|, |U|, |S|, |X|, |Y|)")
    phi: np.ndarray = Field(..., description="φ usado na construção, (|V|, |U|)")

    @field_validator("p", mode="before")
    @classmethod
    def freeze_p(cls, v):
        return frozen_array(v)

    @field_validator("phi", mode="before")
    @classmethod
    def freeze_phi(cls, v):
        return frozen_array(v, dtype=np.int64)

    @model_validator(mode="after")
    def check_joint(self):
        tol = settings.arithmetic_tolerance
        if self.p.ndim != 5:
            raise ValueError("joint must be 5-dimensional (v, u, s, x, y)")
        if np.any(self.p < 0) or abs(float(self.p.sum()) - 1.0) > tol:
            raise ValueError("joint entries must be nonnegative and sum to 1")
        v_size, u_size, _, x_size, _ = self.p.shape
        off_support = np.ones((v_size, u_size, x_size), dtype=bool)
        v_idx, u_idx = np.meshgrid(np.arange(v_size), np.arange(u_size), indexing="ij")
        off_support[v_idx, u_idx, self.phi] = False
        if np.any(self.p.transpose(0, 1, 3, 2, 4)[off_support] > 0):
            raise ValueError("joint puts mass on x != phi(v, u)")
        return self


class MiPair(BaseSchema):
    """Os dois termos de informação mútua da expressão de capacidade (bits)"""

    i_uy_given_v: float = Field(..., description="I(U;Y|V) em bits")
    i_us_given_v: float = Field(..., description="I(U;S|V) em bits")

    @property
    def objective(self) -> float:
        """I(U;Y|V) − I(U;S|V)"""
        return self.i_uy_given_v - self.i_us_given_v
