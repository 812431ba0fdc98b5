"""
Envelope côncavo superior de uma função amostrada g(r)
"""

from typing import List, Sequence, Tuple

import numpy as np

from ..schemas import Envelope, EnvelopePoint
from ..utils.errors import QueryOutOfRangeError

_QUERY_SLACK = 1e-12


def upper_hull(points: Sequence[Tuple[float, float]]) -> List[int]:
    """
    Índices dos vértices do casco superior (cadeia monótona)

    Pontos com o mesmo r mantêm apenas o de maior g (o primeiro em caso de
    empate). Pontos colineares são removidos.

    Returns:
        Índices na lista de entrada, em ordem crescente de r
    """
    order = sorted(range(len(points)), key=lambda i: (points[i][0], -points[i][1], i))
    unique: List[int] = []
    for i in order:
        if unique and points[unique[-1]][0] == points[i][0]:
            continue
        unique.append(i)

    hull: List[int] = []
    for i in unique:
        rp, gp = points[i]
        while len(hull) >= 2:
            ra, ga = points[hull[-2]]
            rb, gb = points[hull[-1]]
            # b está sobre ou abaixo da corda a–p
            if (gb - ga) * (rp - ra) <= (gp - ga) * (rb - ra):
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def concave_envelope(points: Sequence[Tuple[float, float]], query: float) -> Envelope:
    """
    Avaliar o envelope côncavo superior dos pontos em `query`

    O suporte tem um ponto quando a consulta cai num vértice do casco e
    dois (a corda que a contém) caso contrário.

    Args:
        points: Pares (r, g)
        query: Orçamento consultado

    Returns:
        Envelope com valor, suporte e pesos da combinação convexa

    Raises:
        QueryOutOfRangeError: Se a consulta estiver fora de [min r, max r]
    """
    if not points:
        raise QueryOutOfRangeError("empty point set", field="points")

    rs = [p[0] for p in points]
    r_min, r_max = min(rs), max(rs)
    if query < r_min - _QUERY_SLACK or query > r_max + _QUERY_SLACK:
        raise QueryOutOfRangeError(f"query {query} outside [{r_min}, {r_max}]", field="query")
    query = min(max(query, r_min), r_max)

    hull = upper_hull(points)
    for i in hull:
        if abs(points[i][0] - query) <= _QUERY_SLACK:
            r, g = points[i]
            return Envelope(
                query=query,
                value_at=g,
                support=[EnvelopePoint(index=i, r=r, g=g, weight=1.0)],
            )

    for left, right in zip(hull, hull[1:]):
        r1, g1 = points[left]
        r2, g2 = points[right]
        if r1 < query < r2:
            w2 = (query - r1) / (r2 - r1)
            w1 = 1.0 - w2
            return Envelope(
                query=query,
                value_at=w1 * g1 + w2 * g2,
                support=[
                    EnvelopePoint(index=left, r=r1, g=g1, weight=w1),
                    EnvelopePoint(index=right, r=r2, g=g2, weight=w2),
                ],
            )

    raise QueryOutOfRangeError(f"query {query} not covered by the hull", field="query")


def staircase(
    rs: np.ndarray,
    scores: np.ndarray,
    budgets: Sequence[float] = (),
    slack: float = 0.0,
) -> List[Tuple[float, float, int]]:
    """
    Pontos da função monótona r ↦ max{score_j : r_j ≤ r}

    Avaliada nos próprios r_j e nos orçamentos extras; cada ponto leva o
    índice do candidato que o realiza (o primeiro em caso de empate). Um
    candidato é admitido num orçamento b quando r_j ≤ b + slack.

    Returns:
        Lista (r, score, índice) ordenada por r
    """
    rs = np.asarray(rs, dtype=float)
    scores = np.asarray(scores, dtype=float)

    order = np.lexsort((np.arange(len(rs)), rs))
    queries = sorted(
        [(float(rs[j]), 0.0, int(j)) for j in order]
        + [(float(b), slack, -1) for b in budgets],
        key=lambda t: (t[0] + t[1], t[2] < 0),
    )

    points: List[Tuple[float, float, int]] = []
    best = -1
    pos = 0
    for r, margin, _ in queries:
        while pos < len(order) and rs[order[pos]] <= r + margin:
            j = int(order[pos])
            if best < 0 or scores[j] > scores[best] or (scores[j] == scores[best] and j < best):
                best = j
            pos += 1
        if best >= 0:
            points.append((r, float(scores[best]), best))
    return points
