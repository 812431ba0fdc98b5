"""
Oráculos de forma fechada para casos especiais

Usados como verdade de referência contra o otimizador.
"""

from typing import List, Optional, Tuple

import numpy as np
import structlog

from ..config import settings
from ..schemas import Channel, ModAdditiveDetection, OracleCase, OracleValue
from ..utils.errors import NotModAdditiveError, RhTooSmallError
from ..utils.parallel import task_rng
from .ascent import projected_gradient_ascent
from .information import (
    LN2, conditional_mutual_information, entropy, mutual_information, oblivious_policy
)

logger = structlog.get_logger(__name__)

LARGE_HELP_RESTARTS = 8


def detect_useless(ch: Channel) -> bool:
    """W(·|x,s) idêntico para todo x, em cada s (tolerância de detecção)"""
    tol = settings.detection_tolerance
    return bool(np.all(np.abs(ch.w - ch.w[:1]) <= tol))


def detect_mod_additive(ch: Channel) -> ModAdditiveDetection:
    """
    Verificar Y = X ⊕ S (soma módulo A) com |X| = |S| = |Y| = A

    Returns:
        ModAdditiveDetection com o mapa de saída (quando todas as linhas são
        massas pontuais) ou o primeiro par (x, s) discordante
    """
    tol = settings.detection_tolerance
    size = ch.x_size
    if not ch.x_size == ch.s_size == ch.y_size:
        return ModAdditiveDetection(detected=False)

    point_mass = np.all(
        (np.abs(ch.w - 1.0) <= tol) | (np.abs(ch.w) <= tol), axis=2
    ) & (np.sum(np.abs(ch.w - 1.0) <= tol, axis=2) == 1)
    output_map = None
    if np.all(point_mass):
        output_map = np.argmax(ch.w, axis=2).tolist()

    x_idx, s_idx = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    expected = np.eye(size)[(x_idx + s_idx) % size]
    mismatch = np.argwhere(np.any(np.abs(ch.w - expected) > tol, axis=2))
    if mismatch.size:
        return ModAdditiveDetection(
            detected=False,
            alphabet_size=size,
            output_map=output_map,
            first_mismatch=[int(i) for i in mismatch[0]],
        )
    return ModAdditiveDetection(detected=True, alphabet_size=size, output_map=output_map)


def useless_capacity(rh: float) -> OracleValue:
    """C(Rh) = Rh quando a saída não depende da entrada"""
    return OracleValue(
        value=rh,
        case_name=OracleCase.USELESS,
        assumptions_checked={"rh_nonnegative": rh >= 0},
    )


def mod_additive_capacity(ch: Channel, rh: float) -> OracleValue:
    """
    C(Rh) = log2 A − H(S) + Rh para o canal Y = X ⊕ S

    Raises:
        NotModAdditiveError: Se o canal não tiver a estrutura exata
    """
    detection = detect_mod_additive(ch)
    if not detection.detected:
        where = f" (first mismatch at x, s = {detection.first_mismatch})" if detection.first_mismatch else ""
        raise NotModAdditiveError(f"channel is not modulo-additive{where}")
    return OracleValue(
        value=float(np.log2(detection.alphabet_size)) - entropy(ch.q_s) + rh,
        case_name=OracleCase.MOD_ADDITIVE,
        assumptions_checked={"square_alphabets": True, "deterministic": True, "cyclic_shift": True},
    )


def oblivious_oracle(ch: Channel) -> OracleValue:
    """max_{Q_{X|S}} I(X;Y|S): estado conhecido nos dois lados, sem ajuda dependente da mensagem"""
    value, _ = oblivious_policy(ch)
    return OracleValue(
        value=value,
        case_name=OracleCase.OBLIVIOUS,
        assumptions_checked={"per_state_decomposition": True},
    )


def _xs_joint(ch: Channel, q_x_given_s: np.ndarray) -> np.ndarray:
    """p(s, x, y) = Q_S(s) Q_{X|S}(x|s) W(y|x,s)"""
    return np.einsum("s,sx,xsy->sxy", ch.q_s, q_x_given_s, ch.w)


def xs_y_split(ch: Channel, q_x_given_s: np.ndarray) -> Tuple[float, float]:
    """
    As duas decomposições de I(X,S;Y) para um Q_{X|S}

    Returns:
        (I(X,S;Y), I(X;Y|S) + I(S;Y)), em bits
    """
    p = _xs_joint(ch, np.asarray(q_x_given_s, dtype=float))
    joint = mutual_information(p.reshape(-1, ch.y_size))
    split = conditional_mutual_information(p) + mutual_information(p.sum(axis=1))
    return joint, split


def _xs_y_objective(ch: Channel):
    q = ch.q_s[None, :, None]
    w_sxy = np.transpose(ch.w, (1, 0, 2))[None]          # (1, |S|, |X|, |Y|)
    log_w = np.log(np.where(w_sxy > 0, w_sxy, 1.0))

    def fun(b, idx):
        p_sxy = q[..., None] * b[..., None] * w_sxy
        p_y = p_sxy.sum(axis=(1, 2))
        log_p_y = np.log(np.maximum(p_y, 1e-300))[:, None, None, :]
        value = (p_sxy * (log_w - log_p_y)).sum(axis=(1, 2, 3)) / LN2
        grad = q * ((w_sxy * (log_w - log_p_y)).sum(axis=-1) - 1.0) / LN2
        return value, grad

    return fun


def large_help_lower_bound(ch: Channel, rh: float, seed: int = 0,
                           restarts: int = LARGE_HELP_RESTARTS,
                           max_iters: Optional[int] = None) -> OracleValue:
    """
    Limitante max_{Q_{X|S}} I(X,S;Y) − H(S) + Rh, válido para Rh ≥ H(S)

    A maximização parte do ótimo por estado, da entrada uniforme e de
    sorteios de Dirichlet. Também informa o limitante mais fraco
    oblivious_baseline + (Rh − H(S)).

    Raises:
        RhTooSmallError: Se Rh < H(S)
    """
    h_s = entropy(ch.q_s)
    if rh < h_s - settings.detection_tolerance:
        raise RhTooSmallError(f"Rh={rh} is below H(S)={h_s}", field="rh")

    baseline, q_x_given_s = oblivious_policy(ch)
    rng = task_rng(seed, 2, 0)
    starts = [q_x_given_s, np.full((ch.s_size, ch.x_size), 1.0 / ch.x_size)]
    starts.extend(rng.dirichlet(np.ones(ch.x_size), size=(max(restarts - 2, 0), ch.s_size)))

    fun = _xs_y_objective(ch)
    _, values, _ = projected_gradient_ascent(
        fun, np.stack(starts), settings.step_init,
        max_iters or settings.max_iters, 1e-12,
    )
    best = float(values.max())
    logger.debug("large_help_bound", rh=rh, best_xs_y=best, baseline=baseline)

    return OracleValue(
        value=best - h_s + rh,
        case_name=OracleCase.LARGE_HELP_LB,
        assumptions_checked={"rh_at_least_h_s": True},
        is_bound=True,
        weaker_bound=baseline + rh - h_s,
    )


def detect_special_cases(ch: Channel, rh: float) -> List[OracleValue]:
    """Todos os oráculos aplicáveis ao canal, na ordem useless, mod_additive, large_help_lb, oblivious"""
    found: List[OracleValue] = []
    if detect_useless(ch):
        found.append(useless_capacity(rh))
    if detect_mod_additive(ch).detected:
        found.append(mod_additive_capacity(ch, rh))
    if rh >= entropy(ch.q_s) - settings.detection_tolerance:
        found.append(large_help_lower_bound(ch, rh))
    found.append(oblivious_oracle(ch))
    return found
