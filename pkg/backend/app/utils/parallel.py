"""
Execução paralela determinística

Cada tarefa recebe um sub-seed derivado de (seed, índice da tarefa), de
modo que o resultado não depende do escalonamento.
"""

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, Optional, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")


def task_rng(seed: int, *task_index: int) -> np.random.Generator:
    """Gerador independente para a tarefa identificada por (seed, índices)"""
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, *task_index]))


def parallel_map(
    fn: Callable[[T], R],
    tasks: Sequence[T],
    jobs: Optional[int] = 1,
    chunksize: int = 1,
) -> List[R]:
    """
    Aplicar `fn` a cada tarefa preservando a ordem

    Args:
        fn: Função de nível de módulo (precisa ser serializável)
        tasks: Tarefas
        jobs: Número máximo de processos; 1 (ou None) executa em série

    Returns:
        Resultados na ordem das tarefas
    """
    tasks = list(tasks)
    if not jobs or jobs <= 1 or len(tasks) <= 1:
        return [fn(task) for task in tasks]

    workers = min(jobs, len(tasks))
    with ProcessPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(fn, tasks, chunksize=chunksize))


def chunked(items: Iterable[T], size: int) -> List[List[T]]:
    """Dividir em blocos consecutivos de tamanho `size`"""
    items = list(items)
    return [items[i:i + size] for i in range(0, len(items), size)]
