"""
Schema base para todos os schemas do HelpCap
"""

from typing import Any

import numpy as np
from pydantic import BaseModel, ConfigDict


class BaseSchema(BaseModel):
    """Schema base com configuração comum"""

    model_config = ConfigDict(
        from_attributes=True,
        arbitrary_types_allowed=True,
        frozen=True,
        protected_namespaces=(),
    )


def frozen_array(value: Any, dtype=float) -> np.ndarray:
    """Converter para ndarray somente-leitura (valores imutáveis após a construção)"""
    arr = np.array(value, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def is_probability_vector(p: np.ndarray, tol: float, axis: int = -1) -> bool:
    """Verificar não-negatividade e normalização ao longo de `axis`"""
    p = np.asarray(p, dtype=float)
    if p.size == 0 or not np.all(np.isfinite(p)):
        return False
    return bool(np.all(p >= -tol) and np.all(np.abs(p.sum(axis=axis) - 1.0) <= tol))
