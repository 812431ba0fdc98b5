"""
Subida de gradiente projetada em lote sobre produtos de simplexos
"""

from typing import Callable, Tuple

import numpy as np
import structlog

from ..utils.errors import NumericalFailureError
from ..utils.simplex import project_simplex

logger = structlog.get_logger(__name__)

# fun(x_subset, idx) -> (valores (k,), gradientes com a forma de x_subset)
BatchFunction = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]

_MIN_STEP = 1e-12
_MAX_STEP = 1e3
_GROWTH = 2.0


def _check_finite(values: np.ndarray, grads: np.ndarray) -> None:
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(grads))):
        raise NumericalFailureError("objective or gradient became non-finite")


def projected_gradient_ascent(
    fun: BatchFunction,
    x0: np.ndarray,
    step_init: float,
    max_iters: int,
    tol: float,
) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Maximizar um lote de funções, cada linha do último eixo no simplexo

    Cada elemento do lote tem passo próprio: o passo é reduzido à metade
    até que o valor não diminua e dobrado após cada passo aceito. Um
    elemento para quando a melhoria aceita fica abaixo de `tol` ou o passo
    cai abaixo de 1e-12. Os elementos evoluem de forma independente.

    Args:
        fun: Valor e gradiente para um subconjunto do lote
        x0: Pontos iniciais, array (B, ..., d) com linhas no simplexo
        step_init: Passo inicial
        max_iters: Número máximo de iterações
        tol: Melhoria mínima para continuar

    Returns:
        (pontos finais, valores finais, iterações executadas)

    Raises:
        NumericalFailureError: Se valor ou gradiente deixar de ser finito
    """
    x = project_simplex(np.array(x0, dtype=float))
    batch = x.shape[0]
    all_idx = np.arange(batch)

    values, grads = fun(x, all_idx)
    _check_finite(values, grads)
    values = values.copy()
    grads = grads.copy()

    step = np.full(batch, float(step_init))
    active = np.ones(batch, dtype=bool)
    expand = (slice(None),) + (None,) * (x.ndim - 1)

    iterations = 0
    for iterations in range(1, max_iters + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            iterations -= 1
            break

        candidate = project_simplex(x[idx] + step[idx][expand] * grads[idx])
        new_values, new_grads = fun(candidate, idx)
        _check_finite(new_values, new_grads)

        accepted = new_values >= values[idx]
        acc = idx[accepted]
        rej = idx[~accepted]

        gain = new_values[accepted] - values[acc]
        x[acc] = candidate[accepted]
        values[acc] = new_values[accepted]
        grads[acc] = new_grads[accepted]
        step[acc] = np.minimum(step[acc] * _GROWTH, _MAX_STEP)
        active[acc[gain <= tol]] = False

        step[rej] *= 0.5
        active[rej[step[rej] < _MIN_STEP]] = False

    logger.debug(
        "ascent_finished",
        batch=batch,
        iterations=iterations,
        unconverged=int(active.sum()),
    )
    return x, values, iterations
