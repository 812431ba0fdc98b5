"""
Schemas para os oráculos de forma fechada
"""

from enum import Enum
from typing import Dict, List, Optional

from pydantic import Field

from .base import BaseSchema


class OracleCase(str, Enum):
    USELESS = "useless"
    MOD_ADDITIVE = "mod_additive"
    LARGE_HELP_LB = "large_help_lb"
    OBLIVIOUS = "oblivious"


class OracleValue(BaseSchema):
    """Valor analítico de um caso especial"""

    value: float = Field(..., description="Valor em bits")
    case_name: OracleCase
    assumptions_checked: Dict[str, bool] = Field(
        default_factory=dict,
        description="Premissas estruturais verificadas"
    )
    is_bound: bool = Field(False, description="True quando o valor é apenas um limitante inferior")
    weaker_bound: Optional[float] = Field(
        None,
        description="Limitante mais fraco (linha de base oblívia + (Rh − H(S)))"
    )


class ModAdditiveDetection(BaseSchema):
    """Resultado da detecção Y = X ⊕ S com evidência"""

    detected: bool
    alphabet_size: int = 0
    output_map: Optional[List[List[int]]] = Field(
        None,
        description="Saída determinística y(x, s) quando todas as linhas são massas pontuais"
    )
    first_mismatch: Optional[List[int]] = Field(
        None,
        description="Primeiro par (x, s) em que W(·|x,s) não é a massa em (x+s) mod A"
    )
