"""
Otimizador de capacidade C(Rh)

C(Rh) = Rh + cav g(Rh), onde g(r) = max I(U;Y) − I(U;S) sujeito a
I(U;S) ≤ r (problema interno, sem V) e cav é o envelope côncavo superior
(a variável V de compartilhamento de tempo). O caminho alternativo
maximiza I(U;Y) sob I(U;S) ≤ Rh − R0 e soma R0.
"""

from typing import List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..config import settings
from ..schemas import (
    AuxiliaryPolicy, CapacityDiagnostics, CapacityMethod, CapacityResult, Channel,
    GPoint, MiPair, OptimOptions
)
from ..utils.errors import DimensionMismatchError, QueryOutOfRangeError
from ..utils.logging import log_duration
from ..utils.parallel import parallel_map, task_rng
from ..utils.simplex import canonical_maps, sample_canonical_maps
from .ascent import projected_gradient_ascent
from .envelope import concave_envelope, staircase, upper_hull
from .information import blahut_arimoto, build_joint, entropy, mi_pair, oblivious_policy
from .objective import BranchObjective

logger = structlog.get_logger(__name__)

# pesos de I(U;S) no objetivo
GP_WEIGHT = 1.0      # g = I(U;Y) − I(U;S)
RATE_SPLIT_WEIGHT = 0.0   # I(U;Y)

_GREEDY_PASSES = 3


class _BudgetTask(NamedTuple):
    channel: Channel
    budget: float
    budget_index: int
    phis: np.ndarray           # (P, |U|)
    independent: np.ndarray    # (P, |U|) linha inicial com U ⊥ S
    state_input: np.ndarray    # (P, |S|, |U|) início U = (X, S)
    has_state_input: np.ndarray
    enumerated: bool
    us_weight: float
    opts: OptimOptions


class Candidates(NamedTuple):
    a: np.ndarray          # (N, |S|, |U|)
    phis: np.ndarray       # (N, |U|)
    phi_rank: np.ndarray
    restart: np.ndarray
    i_uy: np.ndarray
    i_us: np.ndarray


class BudgetSearch(NamedTuple):
    budgets: List[float]
    candidates: Candidates
    us_weight: float
    restarts_used: int

    @property
    def scores(self) -> np.ndarray:
        return self.candidates.i_uy - self.us_weight * self.candidates.i_us


def resolve_u_size(ch: Channel, opts: OptimOptions) -> int:
    """|U| efetivo: opts.u_size ou o limite |X|·|S|+1"""
    u_size = opts.u_size or ch.max_u_size
    if u_size > ch.max_u_size:
        raise DimensionMismatchError(
            f"|U|={u_size} exceeds |X|·|S|+1={ch.max_u_size}", field="u_size"
        )
    return u_size


def phi_candidates(ch: Channel, u_size: int, opts: OptimOptions) -> Tuple[np.ndarray, bool]:
    """
    Mapas φ a explorar

    Returns:
        (array (P, |U|) em ordem lexicográfica, True se a enumeração é exaustiva)
    """
    if ch.x_size ** u_size <= opts.phi_enum_cap:
        return np.array(list(canonical_maps(ch.x_size, u_size)), dtype=np.int64), True
    sampled = sample_canonical_maps(ch.x_size, u_size, opts.phi_samples, task_rng(opts.seed, 1, 0))
    return np.array(sampled, dtype=np.int64), False


def structured_starts(ch: Channel, phis: np.ndarray):
    """
    Pontos iniciais estruturados por φ

    - independente: U ⊥ S com Q_X ótimo para o canal médio restrito à imagem de φ
    - estado-e-entrada: U = (X, S) com o Q_{X|S} ótimo por estado, quando
      cada x tem pelo menos |S| pré-imagens

    Os pontos iniciais não exigem convergência do Blahut-Arimoto; sem ela
    usa-se a melhor lei encontrada.
    """
    n_phi, u_size = phis.shape
    averaged = ch.averaged_channel()
    _, q_x_given_s = oblivious_policy(ch, strict=False)

    independent = np.zeros((n_phi, u_size))
    state_input = np.zeros((n_phi, ch.s_size, u_size))
    has_state_input = np.zeros(n_phi, dtype=bool)
    cache = {}

    for p, phi in enumerate(phis):
        image = tuple(sorted(set(phi.tolist())))
        if image not in cache:
            cache[image] = blahut_arimoto(averaged[list(image)], strict=False)[1]
        q_x = np.zeros(ch.x_size)
        q_x[list(image)] = cache[image]
        counts = np.bincount(phi, minlength=ch.x_size)
        independent[p] = q_x[phi] / counts[phi]

        if np.all(counts >= ch.s_size):
            for x in range(ch.x_size):
                slots = np.flatnonzero(phi == x)[:ch.s_size]
                state_input[p, np.arange(ch.s_size), slots] = q_x_given_s[:, x]
            has_state_input[p] = True

    return independent, state_input, has_state_input


def polish(
    obj: BranchObjective,
    a: np.ndarray,
    budget: np.ndarray,
    idx: Optional[np.ndarray] = None,
) -> np.ndarray:
    """
    Tornar cada candidato viável movendo Q_{U|S} em direção ao ponto independente

    A_t = (1−t)·A + t·Π, com Π de linhas iguais a Q_U; Q_U não muda e
    I(U;S) é convexa em t com I(U;S) = 0 em t = 1. Escolhe o menor t
    (por bisseção) com I(U;S) ≤ r.
    """
    idx = np.arange(len(a)) if idx is None else idx
    _, i_us = obj.evaluate(a, idx)
    bad = np.flatnonzero(i_us > budget)
    if bad.size == 0:
        return a

    a = a.copy()
    sub = a[bad]
    p_u = (obj.q_s[None, :, None] * sub).sum(axis=1)
    target = np.broadcast_to(p_u[:, None, :], sub.shape)
    lo = np.zeros(bad.size)
    hi = np.ones(bad.size)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        mixed = (1.0 - mid)[:, None, None] * sub + mid[:, None, None] * target
        _, val = obj.evaluate(mixed, idx[bad])
        ok = val <= budget[bad]
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    a[bad] = (1.0 - hi)[:, None, None] * sub + hi[:, None, None] * target
    return a


def _ascend(obj: BranchObjective, a0: np.ndarray, budget: np.ndarray,
            us_weight: float, opts: OptimOptions) -> np.ndarray:
    a = a0
    for mu in opts.penalty_schedule:
        def fun(x, idx, mu=mu):
            return obj.penalized(x, idx, budget[idx], us_weight, mu)
        a, _, _ = projected_gradient_ascent(fun, a, opts.step_init, opts.max_iters, opts.tol)
    return polish(obj, a, budget)


def _greedy_phi(task: _BudgetTask, phi: np.ndarray, a: np.ndarray, score: float):
    """Melhoria coordenada a coordenada de φ com Q_{U|S} fixo (I(U;S) não depende de φ)"""
    ch = task.channel
    phi = phi.copy()
    changed = False
    for _ in range(_GREEDY_PASSES):
        improved = False
        for u in range(phi.size):
            for x in range(ch.x_size):
                if x == phi[u]:
                    continue
                trial = phi.copy()
                trial[u] = x
                i_uy, i_us = BranchObjective(ch, trial[None]).evaluate(a[None])
                value = float(i_uy[0] - task.us_weight * i_us[0])
                if value > score + 1e-12:
                    phi, score = trial, value
                    improved = changed = True
        if not improved:
            break
    return phi, changed


def solve_budget(task: _BudgetTask) -> Candidates:
    """
    Todos os recomeços para um orçamento r, em lote

    Para cada φ: início independente, início estado-e-entrada (se houver)
    e sorteios de Dirichlet até completar `restarts`. Cada recomeço gera dois
    candidatos viáveis: a subida polida e o próprio início polido.
    """
    ch, opts = task.channel, task.opts
    n_phi, u_size = task.phis.shape
    rng = task_rng(opts.seed, 0, task.budget_index)

    starts, phi_idx, restart_idx = [], [], []
    for p in range(n_phi):
        block = [np.tile(task.independent[p], (ch.s_size, 1))]
        if task.has_state_input[p]:
            block.append(task.state_input[p])
        n_random = max(opts.restarts - len(block), 0)
        if n_random:
            block.extend(rng.dirichlet(np.ones(u_size), size=(n_random, ch.s_size)))
        starts.extend(block)
        phi_idx.extend([p] * len(block))
        restart_idx.extend(range(len(block)))

    a0 = np.stack(starts)
    phi_idx = np.asarray(phi_idx)
    obj = BranchObjective(ch, task.phis[phi_idx])
    budget = np.full(len(a0), task.budget)

    a_start = polish(obj, a0, budget)
    a_ascent = _ascend(obj, a0, budget, task.us_weight, opts)

    # ordem: (φ, recomeço, [subida, início])
    a = np.stack((a_ascent, a_start), axis=1).reshape((-1,) + a0.shape[1:])
    phis = np.repeat(task.phis[phi_idx], 2, axis=0)
    ranks = np.repeat(phi_idx, 2)
    restarts = np.repeat(np.asarray(restart_idx), 2)
    i_uy, i_us = BranchObjective(ch, phis).evaluate(a)

    if not task.enumerated:
        scores = i_uy - task.us_weight * i_us
        best = int(np.argmax(scores))
        phi, changed = _greedy_phi(task, phis[best], a[best], float(scores[best]))
        if changed:
            single = BranchObjective(ch, phi[None])
            refined = _ascend(single, a[best][None], np.array([task.budget]), task.us_weight, opts)
            r_uy, r_us = single.evaluate(refined)
            a = np.concatenate((a, refined))
            phis = np.concatenate((phis, phi[None]))
            ranks = np.append(ranks, n_phi)
            restarts = np.append(restarts, 0)
            i_uy = np.append(i_uy, r_uy)
            i_us = np.append(i_us, r_us)

    return Candidates(a=a, phis=phis, phi_rank=ranks, restart=restarts, i_uy=i_uy, i_us=i_us)


def budget_grid(h_s: float, rh_values: Sequence[float], grid_size: int) -> List[float]:
    """
    Grade de orçamentos: uniforme em [0, H(S)] mais cada Rh ≤ H(S)

    Se todos os Rh forem 0 (ou H(S) = 0) a grade é {0}.
    """
    if h_s <= 0 or all(rh == 0 for rh in rh_values):
        return [0.0]
    grid = set(np.linspace(0.0, h_s, max(grid_size, 2)).tolist())
    grid.update(float(rh) for rh in rh_values if rh <= h_s)
    return sorted(grid)


def search_budgets(ch: Channel, budgets: Sequence[float], opts: OptimOptions,
                   us_weight: float) -> BudgetSearch:
    """
    Resolver o problema interno em cada orçamento (tarefas independentes)

    Os candidatos de todas as tarefas são reunidos e ordenados por
    (φ, recomeço, orçamento) para o desempate determinístico.
    """
    u_size = resolve_u_size(ch, opts)
    phis, enumerated = phi_candidates(ch, u_size, opts)
    independent, state_input, has_state_input = structured_starts(ch, phis)

    tasks = [
        _BudgetTask(
            channel=ch, budget=float(r), budget_index=k, phis=phis,
            independent=independent, state_input=state_input,
            has_state_input=has_state_input, enumerated=enumerated,
            us_weight=us_weight, opts=opts,
        )
        for k, r in enumerate(budgets)
    ]

    with log_duration(
        logger, "budget_search",
        budgets=len(tasks), phi_maps=len(phis), u_size=u_size, enumerated=enumerated,
    ) as extra:
        results = parallel_map(solve_budget, tasks, jobs=opts.jobs)
        extra["candidates"] = sum(len(r.i_uy) for r in results)

    task_index = np.concatenate([np.full(len(r.i_uy), k) for k, r in enumerate(results)])
    variant = np.concatenate([np.arange(len(r.i_uy)) for r in results])
    merged = Candidates(*(np.concatenate(arrays) for arrays in zip(*results)))
    order = np.lexsort((variant, task_index, merged.restart, merged.phi_rank))
    merged = Candidates(*(arr[order] for arr in merged))

    per_budget = len(results[0].i_uy) // 2 if results else 0
    return BudgetSearch(
        budgets=list(budgets), candidates=merged, us_weight=us_weight,
        restarts_used=per_budget,
    )


def evaluate_policy(ch: Channel, pol: AuxiliaryPolicy, rh: float) -> Tuple[float, MiPair]:
    """
    Reavaliar exatamente I(U;Y|V) − I(U;S|V) + Rh para uma política

    Returns:
        (valor em bits, par de informações mútuas)
    """
    pair = mi_pair(build_joint(ch, pol))
    return rh + pair.objective, pair


def inner_g(ch: Channel, u_size: int, r: float, opts: Optional[OptimOptions] = None) -> GPoint:
    """
    max I(U;Y) − I(U;S) sujeito a I(U;S) ≤ r, sobre Q_{U|S} e φ determinístico

    Limitante inferior (problema não-convexo); em empates vence o menor φ
    e depois o menor recomeço.
    """
    if r < 0:
        raise QueryOutOfRangeError("budget must be nonnegative", field="r")
    opts = (opts or OptimOptions()).model_copy(update={"u_size": u_size})
    search = search_budgets(ch, [r], opts, GP_WEIGHT)
    cand = search.candidates
    feasible = cand.i_us <= r + 0.5 * settings.feasibility_tolerance
    scores = np.where(feasible, search.scores, -np.inf)
    j = int(np.argmax(scores))
    return _gpoint(cand, j, r, search.scores[j])


def _gpoint(cand: Candidates, j: int, r: float, g: float) -> GPoint:
    return GPoint(
        r=r, g=float(g), q_u_given_s=cand.a[j], phi=cand.phis[j],
        slack=r - float(cand.i_us[j]), i_uy=float(cand.i_uy[j]), i_us=float(cand.i_us[j]),
        phi_rank=int(cand.phi_rank[j]), restart=int(cand.restart[j]),
    )


def _points(search: BudgetSearch, scores: np.ndarray):
    return staircase(
        np.maximum(search.candidates.i_us, 0.0), scores, search.budgets,
        slack=0.5 * settings.feasibility_tolerance,
    )


def _policy_from_support(search: BudgetSearch, points, env) -> Tuple[AuxiliaryPolicy, List[GPoint]]:
    cand = search.candidates
    support = [(points[sp.index], sp) for sp in env.support]
    gpoints = [_gpoint(cand, j, r, g) for (r, g, j), _ in support]
    policy = AuxiliaryPolicy(
        v_size=len(gpoints),
        u_size=cand.a.shape[2],
        q_v=[sp.weight for _, sp in support],
        q_u_given_sv=np.stack([gp.q_u_given_s for gp in gpoints]),
        phi=np.stack([gp.phi for gp in gpoints]),
        help_rates=[gp.r for gp in gpoints],
    )
    return policy, gpoints


def _diagnostics(search, env, gpoints, slack, lattice_step=None) -> CapacityDiagnostics:
    return CapacityDiagnostics(
        restarts_used=search.restarts_used,
        slack=slack,
        support_rs=[gp.r for gp in gpoints],
        support_gs=[gp.g for gp in gpoints],
        support_ws=list(env.weights),
        grid_points=len(search.budgets),
        lattice_step=lattice_step,
    )


def capacity_from_search(ch: Channel, search: BudgetSearch, rh: float,
                         method: CapacityMethod = CapacityMethod.ENVELOPE,
                         lattice_step: Optional[float] = None) -> CapacityResult:
    """Montar C(Rh) = Rh + cav g(min(Rh, r_max)) e a política que o atinge"""
    points = _points(search, search.scores)
    top = max(p[0] for p in points)
    env = concave_envelope([(r, g) for r, g, _ in points], min(rh, top))
    policy, gpoints = _policy_from_support(search, points, env)

    c, pair = evaluate_policy(ch, policy, rh)
    slack = rh - pair.i_us_given_v
    return CapacityResult(
        rh=rh, c=c, policy=policy, r0=max(slack, 0.0), method=method,
        diagnostics=_diagnostics(search, env, gpoints, slack, lattice_step),
    )


def check_rh(rh: float) -> None:
    if rh < 0 or not np.isfinite(rh):
        raise QueryOutOfRangeError(f"Rh must be a finite nonnegative number, got {rh}", field="rh")


def capacity(ch: Channel, rh: float, opts: Optional[OptimOptions] = None) -> CapacityResult:
    """
    Calcular C(Rh) pela decomposição em problema interno + envelope côncavo

    Args:
        ch: Canal validado
        rh: Taxa de ajuda (bits)
        opts: Opções do otimizador

    Returns:
        CapacityResult com a política (|V| = número de pontos de suporte)
    """
    check_rh(rh)
    opts = opts or OptimOptions()
    budgets = budget_grid(entropy(ch.q_s), [rh], opts.r_grid_size)
    search = search_budgets(ch, budgets, opts, GP_WEIGHT)
    result = capacity_from_search(ch, search, rh)
    logger.info("capacity_computed", channel=ch.name, rh=rh, c=result.c,
                support=len(result.diagnostics.support_rs))
    return result


def sweep(ch: Channel, rh_values: Sequence[float],
          opts: Optional[OptimOptions] = None) -> List[CapacityResult]:
    """
    C(Rh) para uma lista crescente de Rh, reaproveitando uma única busca
    """
    rh_values = [float(rh) for rh in rh_values]
    for rh in rh_values:
        check_rh(rh)
    if any(b < a for a, b in zip(rh_values, rh_values[1:])):
        raise QueryOutOfRangeError("rh_values must be sorted ascending", field="rh_values")

    opts = opts or OptimOptions()
    budgets = budget_grid(entropy(ch.q_s), rh_values, opts.r_grid_size)
    search = search_budgets(ch, budgets, opts, GP_WEIGHT)
    return [capacity_from_search(ch, search, rh) for rh in rh_values]


def capacity_rate_split(ch: Channel, rh: float,
                        opts: Optional[OptimOptions] = None) -> CapacityResult:
    """
    Caminho independente: max sobre R0 de [cav h(Rh − R0) + R0]

    h(r) = max I(U;Y) sujeito a I(U;S) ≤ r. A grade de R0 é refinada com
    os vértices do casco; o R0 devolvido é o justo, Rh − I(U;S|V), de
    modo que a política se reavalia exatamente no valor devolvido.
    """
    check_rh(rh)
    opts = opts or OptimOptions()
    h_s = entropy(ch.q_s)

    r0_grid = [0.0] if rh == 0 else np.linspace(0.0, rh, opts.rate_split_grid_size).tolist()
    budgets = sorted({min(max(rh - r0, 0.0), h_s) for r0 in r0_grid})
    search = search_budgets(ch, budgets, opts, RATE_SPLIT_WEIGHT)

    points = _points(search, search.candidates.i_uy)
    pairs = [(r, g) for r, g, _ in points]
    top = max(r for r, _ in pairs)
    vertices = [pairs[i][0] for i in upper_hull(pairs)]
    r0_candidates = sorted(set(r0_grid) | {rh - r for r in vertices if 0.0 <= rh - r <= rh})

    best_env, best_value = None, -np.inf
    for r0 in r0_candidates:
        query = min(max(rh - r0, 0.0), top)
        try:
            env = concave_envelope(pairs, query)
        except QueryOutOfRangeError:
            continue
        value = env.value_at + r0
        if value > best_value:
            best_env, best_value = env, value

    policy, gpoints = _policy_from_support(search, points, best_env)
    _, pair = evaluate_policy(ch, policy, rh)
    r0 = max(rh - pair.i_us_given_v, 0.0)
    c = r0 + pair.i_uy_given_v

    logger.info("rate_split_computed", channel=ch.name, rh=rh, c=c, r0=r0)
    return CapacityResult(
        rh=rh, c=c, policy=policy, r0=r0, method=CapacityMethod.RATE_SPLIT,
        diagnostics=_diagnostics(search, best_env, gpoints, rh - pair.i_us_given_v),
    )
