"""
Schema do manifesto de execução
"""

from typing import Any, Dict

from pydantic import Field

from .base import BaseSchema


class RunManifest(BaseSchema):
    """Manifesto que acompanha cada arquivo de resultado"""

    command: str = Field(..., description="Subcomando executado")
    channel_path: str = Field(..., description="Arquivo do canal")
    parameters: Dict[str, Any] = Field(default_factory=dict)
    seed: int = 0
    tool_version: str
    wall_time: float = Field(0.0, ge=0, description="Tempo de execução (s)")
