"""
Medidas de informação sobre a lei conjunta fatorada

Todas as quantidades em bits; convenção 0·log 0 = 0.
"""

from typing import Tuple

import numpy as np
import structlog
from scipy.special import entr, xlogy

from ..config import settings
from ..schemas import AuxiliaryPolicy, Channel, JointDistribution, MiPair
from ..utils.errors import (
    ConvergenceFailureError, DimensionMismatchError, NotADistributionError
)

logger = structlog.get_logger(__name__)

LN2 = np.log(2.0)


def _h(p: np.ndarray) -> float:
    """Entropia (bits) de um array de massas já validado, de qualquer forma"""
    return float(entr(np.clip(p, 0.0, None)).sum() / LN2)


def entropy(p) -> float:
    """
    Entropia de Shannon em bits

    Args:
        p: Vetor de probabilidade

    Returns:
        −Σ p_i log2 p_i, em [0, log2 len(p)]

    Raises:
        NotADistributionError: Se p não for um vetor de probabilidade
    """
    p = np.asarray(p, dtype=float)
    tol = settings.arithmetic_tolerance
    if p.ndim != 1 or p.size == 0 or not np.all(np.isfinite(p)):
        raise NotADistributionError("entropy expects a non-empty finite 1-D vector")
    if np.any(p < -tol) or abs(float(p.sum()) - 1.0) > tol:
        raise NotADistributionError(f"vector does not sum to 1 (sum={p.sum():.17g})")
    return min(max(_h(p), 0.0), float(np.log2(p.size)))


def mutual_information(p_xy: np.ndarray) -> float:
    """I(X;Y) em bits para uma lei conjunta 2-D"""
    p_xy = np.asarray(p_xy, dtype=float)
    value = _h(p_xy.sum(axis=1)) + _h(p_xy.sum(axis=0)) - _h(p_xy)
    return max(value, 0.0)


def conditional_mutual_information(p_zab: np.ndarray) -> float:
    """I(A;B|Z) em bits para uma lei conjunta 3-D indexada (z, a, b)"""
    p_zab = np.asarray(p_zab, dtype=float)
    value = (
        _h(p_zab.sum(axis=2)) + _h(p_zab.sum(axis=1))
        - _h(p_zab) - _h(p_zab.sum(axis=(1, 2)))
    )
    return max(value, 0.0)


def build_joint(ch: Channel, pol: AuxiliaryPolicy) -> JointDistribution:
    """
    Construir p(v,u,s,x,y) = Q_V(v) Q_S(s) Q_{U|S,V}(u|s,v) 1[x=φ(v,u)] W(y|x,s)

    Raises:
        DimensionMismatchError: Se a política não for compatível com o canal
    """
    if pol.s_size != ch.s_size:
        raise DimensionMismatchError(
            f"policy has |S|={pol.s_size}, channel has |S|={ch.s_size}", field="q_u_given_sv"
        )
    if pol.u_size > ch.max_u_size:
        raise DimensionMismatchError(
            f"|U|={pol.u_size} exceeds |X|·|S|+1={ch.max_u_size}", field="u_size"
        )
    if np.any(pol.phi >= ch.x_size):
        raise DimensionMismatchError("phi maps outside the input alphabet", field="phi")

    indicator = np.eye(ch.x_size)[pol.phi]  # (v, u, x)
    p = np.einsum(
        "v,s,vsu,vux,xsy->vusxy",
        pol.q_v, ch.q_s, pol.q_u_given_sv, indicator, ch.w
    )
    return JointDistribution(p=p, phi=pol.phi)


def mi_pair(j: JointDistribution) -> MiPair:
    """
    I(U;Y|V) e I(U;S|V) por marginalização exata da lei conjunta

    Cada termo é calculado como diferença de entropias condicionadas a V.
    """
    p = j.p
    p_vuy = p.sum(axis=(2, 3))
    p_vus = p.sum(axis=(3, 4))
    p_vu = p_vus.sum(axis=2)
    p_vy = p_vuy.sum(axis=1)
    p_vs = p_vus.sum(axis=1)
    p_v = p_vu.sum(axis=1)

    h_v = _h(p_v)
    h_vu = _h(p_vu)
    i_uy = h_vu + _h(p_vy) - _h(p_vuy) - h_v
    i_us = h_vu + _h(p_vs) - _h(p_vus) - h_v

    return MiPair(i_uy_given_v=max(i_uy, 0.0), i_us_given_v=max(i_us, 0.0))


def _ba_divergences(w_xy: np.ndarray, neg_entropy: np.ndarray, r: np.ndarray) -> Tuple[np.ndarray, float]:
    """D(W(·|x) || rW) em nats por x, e I(r; W) em nats"""
    q_y = r @ w_xy
    d = neg_entropy - xlogy(w_xy, np.where(q_y > 0, q_y, 1.0)[None, :]).sum(axis=1)
    return d, float(r @ d)


def blahut_arimoto(
    w_xy: np.ndarray,
    tol: float = None,
    max_iters: int = None,
    strict: bool = True,
) -> Tuple[float, np.ndarray]:
    """
    Capacidade de um DMC por maximização alternada acelerada

    Cada iteração compara o passo clássico r·exp(d) com o passo
    r·exp(μ·d) e fica com o de maior I(r; W); μ dobra quando o passo
    acelerado vence e cai pela metade (mínimo 1) quando perde.
    Para quando max_x D(W(·|x)||q) − I(r; W) < tol (bits), o que garante
    que I(r; W) está a menos de tol da capacidade.

    Args:
        w_xy: Matriz de transição (|X|, |Y|)
        tol: Tolerância em bits (padrão: settings.ba_tolerance)
        max_iters: Limite de iterações (padrão: settings.ba_max_iters)
        strict: Se False, devolve a melhor lei encontrada em vez de falhar

    Returns:
        (I(r; W) em bits, distribuição de entrada r)

    Raises:
        ConvergenceFailureError: Se o limite de iterações for excedido com strict
    """
    tol = settings.ba_tolerance if tol is None else tol
    max_iters = settings.ba_max_iters if max_iters is None else max_iters

    w_xy = np.asarray(w_xy, dtype=float)
    m = w_xy.shape[0]
    r = np.full(m, 1.0 / m)
    if m == 1:
        return 0.0, r

    neg_entropy = xlogy(w_xy, w_xy).sum(axis=1)
    mu = 1.0
    d, info = _ba_divergences(w_xy, neg_entropy, r)
    for _ in range(max_iters):
        if (d.max() - info) / LN2 < tol:
            return max(info / LN2, 0.0), r

        shifted = d - d.max()
        plain = r * np.exp(shifted)
        plain /= plain.sum()
        best = (plain, *_ba_divergences(w_xy, neg_entropy, plain))
        if mu > 1.0:
            fast = r * np.exp(np.maximum(mu * shifted, -30.0))
            fast /= fast.sum()
            candidate = (fast, *_ba_divergences(w_xy, neg_entropy, fast))
            if candidate[2] > best[2]:
                best = candidate
                mu = min(2.0 * mu, 1e12)
            else:
                mu = max(1.0, mu / 2.0)
        else:
            mu = 2.0
        r, d, info = best

    gap = float((d.max() - info) / LN2)
    if not strict:
        logger.warning("blahut_arimoto_not_converged", max_iters=max_iters, gap=gap)
        return max(info / LN2, 0.0), r
    logger.error("blahut_arimoto_failed", max_iters=max_iters, gap=gap)
    raise ConvergenceFailureError(f"Blahut-Arimoto did not converge within {max_iters} iterations")


def oblivious_policy(ch: Channel, strict: bool = True) -> Tuple[float, np.ndarray]:
    """
    Linha de base com estado conhecido em ambos os lados, por estado

    Args:
        ch: Canal validado
        strict: Repassado a blahut_arimoto

    Returns:
        (Σ_s Q_S(s) C_s em bits, Q_{X|S} ótimo com forma (|S|, |X|))
    """
    total = 0.0
    q_x_given_s = np.zeros((ch.s_size, ch.x_size))
    for s in range(ch.s_size):
        c_s, r_s = blahut_arimoto(ch.w[:, s, :], strict=strict)
        total += float(ch.q_s[s]) * c_s
        q_x_given_s[s] = r_s
    return total, q_x_given_s


def oblivious_baseline(ch: Channel) -> float:
    """max_{Q_{X|S}} I(X;Y|S) = Σ_s Q_S(s)·C_s (bits)"""
    value, _ = oblivious_policy(ch)
    return value
