"""
Utilitários sobre o simplexo de probabilidade
"""

import itertools
from typing import Iterator, List

import numpy as np


def project_simplex(v: np.ndarray) -> np.ndarray:
    """
    Projeção euclidiana de cada linha (último eixo) no simplexo

    Args:
        v: Array de qualquer forma; cada vetor do último eixo é projetado

    Returns:
        Array da mesma forma, com linhas não-negativas somando 1
    """
    v = np.asarray(v, dtype=float)
    shape = v.shape
    rows = v.reshape(-1, shape[-1])
    n_features = rows.shape[1]

    u = np.sort(rows, axis=1)[:, ::-1]
    cssv = np.cumsum(u, axis=1) - 1.0
    ind = np.arange(n_features) + 1
    cond = u - cssv / ind > 0
    rho = np.count_nonzero(cond, axis=1)
    theta = cssv[np.arange(len(rows)), rho - 1] / rho
    return np.maximum(rows - theta[:, None], 0.0).reshape(shape)


def simplex_lattice(dim: int, levels: int) -> np.ndarray:
    """
    Todos os pontos do simplexo com coordenadas múltiplas de 1/(levels−1)

    Returns:
        Array (C(levels+dim−2, dim−1), dim) em ordem lexicográfica
    """
    steps = levels - 1
    points = [
        np.diff((-1,) + bars + (steps + dim - 1,)) - 1
        for bars in itertools.combinations(range(steps + dim - 1), dim - 1)
    ]
    return np.asarray(points, dtype=float) / steps


def canonical_maps(x_size: int, u_size: int) -> Iterator[tuple]:
    """
    Mapas φ: U → X não-decrescentes, em ordem lexicográfica

    Cada classe de mapas equivalentes por reetiquetagem de U tem
    exatamente um representante não-decrescente.
    """
    return itertools.combinations_with_replacement(range(x_size), u_size)


def all_maps(x_size: int, u_size: int) -> Iterator[tuple]:
    """Todos os |X|^|U| mapas, em ordem lexicográfica"""
    return itertools.product(range(x_size), repeat=u_size)


def balanced_map(x_size: int, u_size: int) -> tuple:
    """Mapa não-decrescente que distribui U o mais uniformemente possível sobre X"""
    return tuple(sorted(u * x_size // u_size for u in range(u_size)))


def sample_canonical_maps(
    x_size: int,
    u_size: int,
    count: int,
    rng: np.random.Generator,
) -> List[tuple]:
    """
    Amostrar mapas canônicos distintos, começando pelo mapa balanceado

    Returns:
        Lista ordenada lexicograficamente de no máximo `count` mapas
    """
    chosen = {balanced_map(x_size, u_size)}
    attempts = 0
    while len(chosen) < count and attempts < 50 * count:
        chosen.add(tuple(sorted(rng.integers(0, x_size, size=u_size).tolist())))
        attempts += 1
    return sorted(chosen)
