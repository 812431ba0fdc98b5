"""
Objetivo de um ramo: I(U;Y) e I(U;S) como funções de Q_{U|S} com φ fixo

Vetorizado sobre um lote de candidatos (cada um com o seu φ). Para um
ramo, a lei é p(s,u,y) = Q_S(s) A[s,u] K[s,u,y] com K[s,u,y] = W(y|φ(u),s).
"""

from typing import Optional, Tuple

import numpy as np
from scipy.special import xlogy

from ..schemas import Channel

LN2 = np.log(2.0)
_TINY = 1e-300


class BranchObjective:
    """
    Termos de informação mútua de um lote de ramos

    Args:
        ch: Canal validado
        phis: Mapas φ, array inteiro (B, |U|), um por candidato do lote
    """

    def __init__(self, ch: Channel, phis: np.ndarray):
        self.q_s = np.asarray(ch.q_s, dtype=float)
        self.phis = np.atleast_2d(np.asarray(phis, dtype=np.int64))
        # (B, |U|, |S|, |Y|) -> (B, |S|, |U|, |Y|)
        self.kernel = np.transpose(ch.w[self.phis], (0, 2, 1, 3))
        self._q_safe = np.where(self.q_s > 0, self.q_s, 1.0)

    @property
    def batch_size(self) -> int:
        return self.phis.shape[0]

    def _kernel(self, idx: Optional[np.ndarray]) -> np.ndarray:
        return self.kernel if idx is None else self.kernel[idx]

    def _marginals(self, a: np.ndarray, kernel: np.ndarray):
        p_su = self.q_s[None, :, None] * a
        p_u = p_su.sum(axis=1)
        p_uy = (p_su[..., None] * kernel).sum(axis=1)
        p_y = p_uy.sum(axis=1)
        return p_su, p_u, p_uy, p_y

    def evaluate(
        self,
        a: np.ndarray,
        idx: Optional[np.ndarray] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Calcular (I(U;Y), I(U;S)) em bits

        Args:
            a: Q_{U|S} do lote, array (B, |S|, |U|)
            idx: Subconjunto do lote a que `a` corresponde (None = todo)

        Returns:
            Dois arrays (B,)
        """
        p_su, p_u, p_uy, p_y = self._marginals(a, self._kernel(idx))
        h_u = xlogy(p_u, p_u).sum(axis=1)
        i_us = (xlogy(p_su, a).sum(axis=(1, 2)) - h_u) / LN2
        i_uy = (
            xlogy(p_uy, p_uy).sum(axis=(1, 2)) - h_u - xlogy(p_y, p_y).sum(axis=1)
        ) / LN2
        return i_uy, i_us

    def gradients(
        self,
        a: np.ndarray,
        idx: Optional[np.ndarray] = None,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        Gradientes analíticos (bits) de I(U;Y) e I(U;S) em relação a Q_{U|S}

        As entradas são tratadas como livres (sem a restrição de soma), de
        modo que o resultado confere com diferenças finitas centrais.
        Quando p(u) = 0 usa-se o limite ao longo da direção da entrada.

        Returns:
            (∂I(U;Y)/∂A, ∂I(U;S)/∂A), arrays (B, |S|, |U|)
        """
        kernel = self._kernel(idx)
        _, p_u, p_uy, p_y = self._marginals(a, kernel)
        used = p_u > _TINY
        p_u_safe = np.maximum(p_u, _TINY)
        q = self.q_s[None, :, None]

        ratio_us = np.where(
            used[:, None, :],
            a / p_u_safe[:, None, :],
            1.0 / self._q_safe[None, :, None],
        )
        grad_us = q * np.log(np.maximum(ratio_us, _TINY)) / LN2

        cond = p_uy / p_u_safe[..., None]
        ratio_uy = np.where(used[:, None, :, None], cond[:, None, :, :], kernel)
        log_terms = (
            np.log(np.maximum(ratio_uy, _TINY))
            - np.log(np.maximum(p_y, _TINY))[:, None, None, :]
        )
        grad_uy = q * ((kernel * log_terms).sum(axis=-1) - 1.0) / LN2

        return grad_uy, grad_us

    def penalized(
        self,
        a: np.ndarray,
        idx: np.ndarray,
        budget: np.ndarray,
        us_weight: float,
        mu: float,
    ) -> Tuple[np.ndarray, np.ndarray]:
        """
        F = I(U;Y) − λ·I(U;S) − μ·max(0, I(U;S) − r)² e o seu gradiente

        Args:
            a: Q_{U|S} do subconjunto `idx`
            idx: Índices no lote
            budget: Orçamento r por elemento do subconjunto
            us_weight: λ (1 para g = I(U;Y) − I(U;S), 0 para I(U;Y))
            mu: Multiplicador da penalidade

        Returns:
            (F (B,), ∇F (B, |S|, |U|))
        """
        i_uy, i_us = self.evaluate(a, idx)
        g_uy, g_us = self.gradients(a, idx)
        excess = np.maximum(i_us - budget, 0.0)
        value = i_uy - us_weight * i_us - mu * excess ** 2
        grad = g_uy - (us_weight + 2.0 * mu * excess)[:, None, None] * g_us
        return value, grad
