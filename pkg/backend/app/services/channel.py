"""
Serviço de ingestão e validação de canais
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import structlog
from pydantic import ValidationError

from ..config import settings
from ..schemas import Channel, ChannelFile
from ..utils.errors import (
    ChannelParseError, NegativeEntryError, NonStochasticError, SizeOutOfRangeError
)

logger = structlog.get_logger(__name__)


def _parse(raw: Union[ChannelFile, Dict[str, Any]]) -> ChannelFile:
    if isinstance(raw, ChannelFile):
        return raw
    try:
        return ChannelFile.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or None
        raise ChannelParseError(first["msg"], field=field) from e


def validate_channel(raw: Union[ChannelFile, Dict[str, Any]], name: str = "") -> Channel:
    """
    Validar uma descrição de canal e construir o Channel

    Ordem das verificações: estrutura, tamanhos, formas, sinais,
    normalização. Linhas aceitas são renormalizadas exatamente.

    Args:
        raw: Dicionário lido do arquivo ou ChannelFile
        name: Rótulo opcional

    Returns:
        Channel validado

    Raises:
        ChannelParseError: Campo ausente, tipo inválido ou forma incompatível
        SizeOutOfRangeError: Tamanho fora de [1, max_alphabet_size]
        NegativeEntryError: Entrada negativa em q_s ou w
        NonStochasticError: Linha que não soma 1 dentro de prob_tolerance
    """
    parsed = _parse(raw)
    limit = settings.max_alphabet_size
    tol = settings.prob_tolerance

    for field in ("x_size", "s_size", "y_size"):
        value = getattr(parsed, field)
        if not 1 <= value <= limit:
            raise SizeOutOfRangeError(f"{value} not in [1, {limit}]", field=field)

    q_s = np.asarray(parsed.q_s, dtype=float)
    if q_s.shape != (parsed.s_size,):
        raise ChannelParseError(f"expected {parsed.s_size} entries, got {q_s.shape}", field="q_s")

    try:
        w = np.asarray(parsed.w, dtype=float)
    except ValueError as e:
        raise ChannelParseError("ragged transition array", field="w") from e
    expected = (parsed.x_size, parsed.s_size, parsed.y_size)
    if w.shape != expected:
        raise ChannelParseError(f"expected shape {expected}, got {w.shape}", field="w")

    for field, arr in (("q_s", q_s), ("w", w)):
        if not np.all(np.isfinite(arr)):
            raise ChannelParseError("non-finite entry", field=field)
        if np.any(arr < 0):
            idx = tuple(int(i) for i in np.argwhere(arr < 0)[0])
            raise NegativeEntryError(f"negative entry at {list(idx)}", field=field)

    if abs(float(q_s.sum()) - 1.0) > tol:
        raise NonStochasticError(f"sums to {q_s.sum():.17g}", field="q_s")
    row_sums = w.sum(axis=2)
    bad = np.argwhere(np.abs(row_sums - 1.0) > tol)
    if bad.size:
        x, s = (int(i) for i in bad[0])
        raise NonStochasticError(f"row (x={x}, s={s}) sums to {row_sums[x, s]:.17g}", field="w")

    channel = Channel(
        x_size=parsed.x_size,
        s_size=parsed.s_size,
        y_size=parsed.y_size,
        q_s=q_s / q_s.sum(),
        w=w / row_sums[:, :, None],
        name=name,
    )
    logger.debug("channel_validated", name=name, sizes=list(expected))
    return channel


def load_channel(path: Union[str, Path]) -> Channel:
    """
    Ler e validar um arquivo de canal JSON

    Raises:
        ChannelParseError: Arquivo inexistente ou JSON inválido
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except FileNotFoundError as e:
        raise ChannelParseError(f"file not found: {path}", field="path") from e
    except json.JSONDecodeError as e:
        raise ChannelParseError(f"invalid JSON at line {e.lineno}: {e.msg}", field="path") from e
    if not isinstance(raw, dict):
        raise ChannelParseError("top-level value must be an object", field="path")
    return validate_channel(raw, name=path.name)


def channel_summary(ch: Channel) -> Dict[str, Any]:
    """
    Resumo usado por `validate`: tamanhos, H(S) e casos especiais detectados
    """
    from .information import entropy
    from .oracles import detect_mod_additive, detect_useless

    cases: List[str] = []
    if detect_useless(ch):
        cases.append("useless")
    if detect_mod_additive(ch).detected:
        cases.append("mod_additive")

    return {
        "name": ch.name,
        "x_size": ch.x_size,
        "s_size": ch.s_size,
        "y_size": ch.y_size,
        "h_s": entropy(ch.q_s),
        "cases": cases,
    }
