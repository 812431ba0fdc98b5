"""
Schemas para o simulador do esquema de codificação
"""

import math
from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import Field, field_validator, model_validator

from ..config import settings
from .base import BaseSchema, frozen_array, is_probability_vector


class CodebookMode(str, Enum):
    """Como o livro-código aleatório é realizado"""

    EXPLICIT = "explicit"   # tabela materializada
    ENSEMBLE = "ensemble"   # estatísticas exatas do ensemble, sem tabela
    AUTO = "auto"           # explicit quando cabe na tabela


class SimConfig(BaseSchema):
    """Ponto de operação e política de um ramo (V suprimido)"""

    n: int = Field(..., ge=1, description="Comprimento de bloco")
    rate_r: float = Field(..., ge=0, description="Taxa R (bits/uso)")
    rate_rh: float = Field(..., ge=0, description="Taxa de ajuda Rh (bits/uso)")
    r0: float = Field(0.0, ge=0, description="Parte de Rh usada para bits diretos")
    q_u_given_s: np.ndarray = Field(..., description="Q_{U|S}, array (|S|, |U|)")
    phi: np.ndarray = Field(..., description="φ: U → X")
    epsilon: float = Field(
        default_factory=lambda: settings.helper_epsilon, gt=0, lt=0.5,
        description="Folga de tipicidade do auxiliar"
    )
    decoder_epsilon: float = Field(
        default_factory=lambda: settings.decoder_epsilon, gt=0, lt=0.5,
        description="Folga de tipicidade do decodificador"
    )
    trials: int = Field(..., ge=1)
    seed: int = Field(0, ge=0, lt=2**64)
    codebook_mode: CodebookMode = CodebookMode.EXPLICIT
    shared_codebook: bool = Field(False, description="Um único livro-código para todas as tentativas")
    max_table_bits: int = Field(default_factory=lambda: settings.max_table_bits, ge=1)

    @field_validator("q_u_given_s", mode="before")
    @classmethod
    def freeze_q(cls, v):
        return frozen_array(v)

    @field_validator("phi", mode="before")
    @classmethod
    def freeze_phi(cls, v):
        return frozen_array(v, dtype=np.int64)

    @model_validator(mode="after")
    def check_config(self):
        if self.r0 > self.rate_rh:
            raise ValueError("r0 must not exceed rate_rh")
        if self.q_u_given_s.ndim != 2 or not is_probability_vector(
                self.q_u_given_s, settings.prob_tolerance, axis=1):
            raise ValueError("q_u_given_s must be a (|S|, |U|) row-stochastic array")
        if self.phi.shape != (self.q_u_given_s.shape[1],):
            raise ValueError("phi must have one entry per auxiliary symbol")
        if self.shared_codebook and self.codebook_mode == CodebookMode.ENSEMBLE:
            raise ValueError("a shared codebook requires the explicit codebook mode")
        return self

    @property
    def message_bits(self) -> int:
        """⌈n·R⌉"""
        return _ceil_bits(self.n * self.rate_r)

    @property
    def helper_bits(self) -> int:
        """⌈n·(Rh − R0)⌉, bits de T1"""
        return _ceil_bits(self.n * (self.rate_rh - self.r0))

    @property
    def direct_bits(self) -> int:
        """⌈n·R0⌉, bits de M̃ entregues sem erro"""
        return _ceil_bits(self.n * self.r0)

    @property
    def table_bits(self) -> int:
        return self.message_bits + self.helper_bits


def _ceil_bits(x: float) -> int:
    # tolera o ruído de ponto flutuante de n*R
    return max(0, int(math.ceil(x - 1e-9)))


class PolicyFile(BaseSchema):
    """Política de um ramo lida de arquivo JSON (`simulate --policy`)"""

    q_u_given_s: List[List[float]] = Field(..., description="Q_{U|S}, linhas indexadas por s")
    phi: List[int] = Field(..., description="φ: U → X")


class Codebook(BaseSchema):
    """Livro-código u^n(m, t1)"""

    u_words: np.ndarray = Field(..., description="Array (2^⌈nR⌉, 2^⌈n(Rh−R0)⌉, n) sobre U")

    @field_validator("u_words", mode="before")
    @classmethod
    def freeze_words(cls, v):
        words = np.asarray(v)
        if words.size and words.min() < 0:
            raise ValueError("codeword symbols must be nonnegative")
        largest = int(words.max()) if words.size else 0
        return frozen_array(words, dtype=np.min_scalar_type(largest))

    @property
    def num_messages(self) -> int:
        return int(self.u_words.shape[0])

    @property
    def num_helps(self) -> int:
        return int(self.u_words.shape[1])

    @property
    def n(self) -> int:
        return int(self.u_words.shape[2])


class TrialRecord(BaseSchema):
    """Resultado de uma tentativa (para o log por tentativa)"""

    trial: int
    message: int
    t1: int
    helper_ok: bool
    decoded: Optional[int] = None
    outcome: str = Field(..., description="ok, helper_failure, decode_none, decode_ambiguous, decode_wrong")


class SimReport(BaseSchema):
    """Estatísticas empíricas de erro"""

    n: int
    rate_r: float
    rate_rh: float
    r0: float
    epsilon: float
    decoder_epsilon: float
    trials: int
    helper_failures: int = Field(..., ge=0)
    decode_errors: int = Field(..., ge=0)
    direct_bit_errors: int = Field(0, ge=0)
    error_rate: float = Field(..., ge=0, le=1)
    ci_lo: float = Field(..., ge=0, le=1)
    ci_hi: float = Field(..., ge=0, le=1)
    effective_rate: float = Field(..., description="(⌈nR⌉ + ⌈nR0⌉)/n")
    seed: int
    codebook_mode: CodebookMode

    @model_validator(mode="after")
    def check_counts(self):
        if self.helper_failures + self.decode_errors > self.trials:
            raise ValueError("error counts exceed the number of trials")
        return self
