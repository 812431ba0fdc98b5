"""
Schemas para canais discretos sem memória dependentes de estado
"""

from typing import List

import numpy as np
from pydantic import Field, field_validator

from .base import BaseSchema, frozen_array


class ChannelFile(BaseSchema):
    """Descrição bruta do canal, como lida do arquivo JSON"""

    x_size: int = Field(..., description="|X|, tamanho do alfabeto de entrada")
    s_size: int = Field(..., description="|S|, tamanho do alfabeto de estados")
    y_size: int = Field(..., description="|Y|, tamanho do alfabeto de saída")
    q_s: List[float] = Field(..., description="Distribuição dos estados Q_S")
    w: List[List[List[float]]] = Field(
        ...,
        description="Lei de transição W(y|x,s), indexada [x][s][y]"
    )


class Channel(BaseSchema):
    """Canal validado (construído apenas por validate_channel)"""

    x_size: int = Field(..., ge=1, description="|X|")
    s_size: int = Field(..., ge=1, description="|S|")
    y_size: int = Field(..., ge=1, description="|Y|")
    q_s: np.ndarray = Field(..., description="Q_S, vetor de probabilidade de comprimento |S|")
    w: np.ndarray = Field(..., description="W(y|x,s), array (|X|, |S|, |Y|)")
    name: str = Field("", description="Rótulo opcional (nome do arquivo)")

    @field_validator("q_s", "w", mode="before")
    @classmethod
    def freeze(cls, v):
        return frozen_array(v)

    @property
    def max_u_size(self) -> int:
        """Limite |X|·|S|+1 da cardinalidade de U"""
        return self.x_size * self.s_size + 1

    def averaged_channel(self) -> np.ndarray:
        """Canal médio sobre os estados, sum_s Q_S(s) W(y|x,s), array (|X|, |Y|)"""
        return np.einsum("s,xsy->xy", self.q_s, self.w)
