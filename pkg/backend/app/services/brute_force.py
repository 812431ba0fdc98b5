"""
Capacidade por busca exaustiva em reticulado (oráculo para instâncias pequenas)
"""

import itertools
from typing import Optional

import numpy as np
import structlog

from ..schemas import CapacityMethod, CapacityResult, Channel
from ..utils.errors import TooLargeError
from ..utils.logging import log_duration
from ..utils.simplex import all_maps, simplex_lattice
from .information import entropy
from .objective import BranchObjective
from .optimizer import GP_WEIGHT, Candidates, BudgetSearch, check_rh, capacity_from_search

logger = structlog.get_logger(__name__)

MAX_ALPHABET = 2
MAX_U_SIZE = 3
MAX_GRID_LEVELS = 9


def brute_force_capacity(
    ch: Channel,
    rh: float,
    grid_levels: int = 7,
    u_size: Optional[int] = None,
) -> CapacityResult:
    """
    Avaliar C(Rh) enumerando todos os φ e todo Q_{U|S} de um reticulado

    Cada linha Q_{U|S}(·|s) percorre o reticulado do simplexo com passo
    1/(grid_levels − 1); V é tratado pelo mesmo envelope côncavo. O
    resultado é um limitante inferior com resolução conhecida.

    Raises:
        TooLargeError: Alfabetos acima de 2, |U| acima de 3 ou mais de 9 níveis
    """
    check_rh(rh)
    u_size = u_size or min(MAX_U_SIZE, ch.max_u_size)
    for field in ("x_size", "s_size", "y_size"):
        if getattr(ch, field) > MAX_ALPHABET:
            raise TooLargeError(f"brute force supports alphabets of size ≤ {MAX_ALPHABET}", field=field)
    if not 1 <= u_size <= min(MAX_U_SIZE, ch.max_u_size):
        raise TooLargeError(f"brute force supports |U| ≤ {MAX_U_SIZE}", field="u_size")
    if not 2 <= grid_levels <= MAX_GRID_LEVELS:
        raise TooLargeError(f"grid_levels must be in [2, {MAX_GRID_LEVELS}]", field="grid_levels")

    lattice = simplex_lattice(u_size, grid_levels)
    rows = np.array(list(itertools.product(range(len(lattice)), repeat=ch.s_size)))
    conditionals = lattice[rows]                     # (N, |S|, |U|)
    maps = np.array(list(all_maps(ch.x_size, u_size)), dtype=np.int64)

    with log_duration(logger, "brute_force", maps=len(maps), lattice_points=len(conditionals)):
        blocks = []
        for rank, phi in enumerate(maps):
            i_uy, i_us = BranchObjective(ch, phi[None]).evaluate(conditionals)
            n = len(conditionals)
            blocks.append(Candidates(
                a=conditionals,
                phis=np.repeat(phi[None], n, axis=0),
                phi_rank=np.full(n, rank),
                restart=np.arange(n),
                i_uy=i_uy,
                i_us=i_us,
            ))
        candidates = Candidates(*(np.concatenate(arrays) for arrays in zip(*blocks)))

    search = BudgetSearch(
        budgets=[min(rh, entropy(ch.q_s))],
        candidates=candidates,
        us_weight=GP_WEIGHT,
        restarts_used=len(conditionals),
    )
    return capacity_from_search(
        ch, search, rh, method=CapacityMethod.BRUTE_FORCE,
        lattice_step=1.0 / (grid_levels - 1),
    )
