"""
Tipicidade conjunta forte (robusta) e a lei multinomial restrita a uma caixa

Um par (a^n, b^n) é típico quando |N(a,b)/n − ref(a,b)| ≤ ε·ref(a,b) para
todo (a,b), o que exige N(a,b) = 0 onde ref(a,b) = 0.
"""

from typing import List, Tuple

import numpy as np
from scipy.special import gammaln, logsumexp, xlogy

from ..utils.errors import LengthMismatchError

# folga de arredondamento na conversão das frequências em contagens
_COUNT_SLACK = 1e-12


def count_box(ref: np.ndarray, n: int, epsilon: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Limites inteiros [lo, hi] das contagens conjuntas típicas

    Returns:
        (lo, hi), arrays inteiros com a forma de ref
    """
    ref = np.asarray(ref, dtype=float)
    expected = n * ref
    lo = np.ceil(expected * (1.0 - epsilon) - n * _COUNT_SLACK)
    hi = np.floor(expected * (1.0 + epsilon) + n * _COUNT_SLACK)
    lo = np.where(ref > 0, np.maximum(lo, 0), 0).astype(np.int64)
    hi = np.where(ref > 0, hi, 0).astype(np.int64)
    return lo, hi


def joint_counts(a: np.ndarray, b: np.ndarray, shape: Tuple[int, int]) -> np.ndarray:
    """Contagens N(a,b) de um lote de sequências a (k, n) contra uma sequência b (n,)"""
    a = np.atleast_2d(a).astype(np.int64)
    size = shape[0] * shape[1]
    flat = a * shape[1] + np.asarray(b, dtype=np.int64)[None, :]
    flat += (np.arange(a.shape[0]) * size)[:, None]
    return np.bincount(flat.ravel(), minlength=a.shape[0] * size).reshape(a.shape[0], *shape)


def typical_many(a: np.ndarray, b: np.ndarray, ref: np.ndarray, epsilon: float) -> np.ndarray:
    """
    Testar a tipicidade de cada linha de `a` com a mesma sequência `b`

    Raises:
        LengthMismatchError: Se os comprimentos diferirem
    """
    a = np.atleast_2d(a)
    b = np.asarray(b)
    if a.shape[1] != b.shape[0]:
        raise LengthMismatchError(f"sequence lengths differ: {a.shape[1]} != {b.shape[0]}")
    ref = np.asarray(ref, dtype=float)
    lo, hi = count_box(ref, b.shape[0], epsilon)
    counts = joint_counts(a, b, ref.shape)
    return np.all((counts >= lo) & (counts <= hi), axis=(1, 2))


def typical(a: np.ndarray, b: np.ndarray, ref: np.ndarray, epsilon: float) -> bool:
    """
    Tipicidade conjunta forte do par (a^n, b^n) em relação a ref

    Args:
        a: Sequência sobre A (índices 0..|A|-1)
        b: Sequência sobre B
        ref: Lei conjunta de referência, array (|A|, |B|)
        epsilon: Folga relativa

    Raises:
        LengthMismatchError: Se os comprimentos diferirem
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise LengthMismatchError(f"sequence lengths differ: {a.shape} != {b.shape}")
    return bool(typical_many(a[None, :], b, ref, epsilon)[0])


class BoxMultinomial:
    """
    Multinomial(total, q) condicionada a lo ≤ contagens ≤ hi

    Guarda as tabelas de programação dinâmica em log:
    f_j[t] = log Σ Π_{i≤j} q_i^{c_i}/c_i! sobre as contagens dos j primeiros
    símbolos que somam t e respeitam a caixa.
    """

    def __init__(self, total: int, q: np.ndarray, lo: np.ndarray, hi: np.ndarray):
        self.total = int(total)
        self.q = np.asarray(q, dtype=float)
        self.lo = np.asarray(lo, dtype=np.int64)
        self.hi = np.minimum(np.asarray(hi, dtype=np.int64), self.total)

        f = np.full(self.total + 1, -np.inf)
        f[0] = 0.0
        self._tables: List[np.ndarray] = [f]
        for j in range(len(self.q)):
            g = np.full(self.total + 1, -np.inf)
            for c in range(self.lo[j], self.hi[j] + 1):
                term = xlogy(c, self.q[j]) - gammaln(c + 1)
                g[c:] = np.logaddexp(g[c:], f[:self.total + 1 - c] + term)
            self._tables.append(g)
            f = g

        self.log_prob = float(gammaln(self.total + 1) + f[self.total])

    @property
    def prob(self) -> float:
        """Probabilidade de a multinomial cair na caixa"""
        return float(np.exp(self.log_prob))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        """Sortear contagens da lei condicionada (de trás para frente nas tabelas)"""
        if not np.isfinite(self.log_prob):
            raise ValueError("empty box")
        counts = np.zeros(len(self.q), dtype=np.int64)
        remaining = self.total
        for j in range(len(self.q) - 1, -1, -1):
            prev = self._tables[j]
            cs = np.arange(self.lo[j], min(self.hi[j], remaining) + 1)
            log_w = prev[remaining - cs] + xlogy(cs, self.q[j]) - gammaln(cs + 1)
            probs = np.exp(log_w - logsumexp(log_w))
            counts[j] = rng.choice(cs, p=probs / probs.sum())
            remaining -= counts[j]
        return counts
