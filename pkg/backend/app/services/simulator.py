"""
Simulador Monte-Carlo do esquema de codificação com auxiliar cognizante da mensagem

Livro-código aleatório u^n(m, t1) IID Q_U; o auxiliar procura o menor t1
com u^n(m, t1) típico com s^n; o codificador envia φ(u^n); o decodificador
procura o único m̂ com u^n(m̂, t1) típico com y^n. A parte R0 da ajuda
carrega bits da mensagem diretamente e chega sem erro.
"""

import csv
import math
from pathlib import Path
from typing import Dict, List, NamedTuple, Optional, Tuple, Union

import numpy as np
import structlog
from scipy.stats import norm

from ..config import settings
from ..schemas import Channel, Codebook, CodebookMode, SimConfig, SimReport, TrialRecord
from ..utils.errors import (
    ConfigTooLargeError, DecodeError, DimensionMismatchError, HelperFailure
)
from ..utils.logging import log_duration
from ..utils.parallel import chunked, parallel_map, task_rng
from .typicality import BoxMultinomial, count_box, typical, typical_many

logger = structlog.get_logger(__name__)

OUTCOMES = ("ok", "helper_failure", "decode_none", "decode_ambiguous", "decode_wrong")


def compact_branch(
    q_s: np.ndarray,
    q_u_given_s: np.ndarray,
    phi: np.ndarray,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Remover símbolos de U sem massa e fundir símbolos com o mesmo φ e a
    mesma lei condicional de S (as informações mútuas não mudam)

    Returns:
        (Q_{U|S} compactado (|S|, |U'|), φ compactado (|U'|,))
    """
    q_s = np.asarray(q_s, dtype=float)
    a = np.asarray(q_u_given_s, dtype=float)
    phi = np.asarray(phi, dtype=np.int64)
    p_su = q_s[:, None] * a
    p_u = p_su.sum(axis=0)

    columns: List[np.ndarray] = []
    conditionals: List[np.ndarray] = []
    symbols: List[int] = []
    for u in np.flatnonzero(p_u > 0):
        cond = p_su[:, u] / p_u[u]
        for k, (other, x) in enumerate(zip(conditionals, symbols)):
            if x == phi[u] and np.allclose(cond, other, rtol=0.0, atol=1e-12):
                columns[k] = columns[k] + a[:, u]
                break
        else:
            columns.append(a[:, u].copy())
            conditionals.append(cond)
            symbols.append(int(phi[u]))

    compact = np.stack(columns, axis=1)
    sums = compact.sum(axis=1, keepdims=True)
    # linhas de estados com Q_S(s) = 0 podem ter perdido massa
    empty = sums[:, 0] <= 0
    compact[empty, 0] = 1.0
    sums[empty] = 1.0
    return compact / sums, np.asarray(symbols, dtype=np.int64)


def reference_laws(ch: Channel, q_u_given_s: np.ndarray, phi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Leis de referência para a tipicidade

    Returns:
        (p(u, s) com forma (|U|, |S|), p(u, y) com forma (|U|, |Y|))
    """
    ref_us = (ch.q_s[:, None] * q_u_given_s).T
    kernel = np.transpose(ch.w[phi], (1, 0, 2))          # (|S|, |U|, |Y|)
    ref_uy = np.einsum("us,suy->uy", ref_us, kernel)
    return ref_us, ref_uy


def generate_codebook(
    q_u: np.ndarray,
    message_bits: int,
    helper_bits: int,
    n: int,
    rng: np.random.Generator,
) -> Codebook:
    """
    Sortear a tabela u^n(m, t1) com entradas IID Q_U

    Raises:
        ConfigTooLargeError: Se a tabela exceder os limites configurados
    """
    if message_bits + helper_bits > settings.max_table_bits:
        raise ConfigTooLargeError(
            f"codebook needs 2^{message_bits + helper_bits} words (limit 2^{settings.max_table_bits})",
            field="table_bits",
        )
    dtype = np.min_scalar_type(len(q_u) - 1)
    size = (1 << message_bits) * (1 << helper_bits) * n * dtype.itemsize
    if size > settings.max_codebook_bytes:
        raise ConfigTooLargeError(f"codebook needs {size} bytes", field="n")
    words = rng.choice(len(q_u), size=(1 << message_bits, 1 << helper_bits, n), p=q_u)
    return Codebook(u_words=words.astype(dtype))


def helper_encode(cb: Codebook, m: int, s_n: np.ndarray, ref_us: np.ndarray, epsilon: float) -> int:
    """
    Menor t1 com u^n(m, t1) tipicamente conjunto com s^n

    Raises:
        HelperFailure: Se nenhum índice for típico
    """
    hits = np.flatnonzero(typical_many(cb.u_words[m], s_n, ref_us, epsilon))
    if hits.size == 0:
        raise HelperFailure(f"no typical codeword among {cb.num_helps} helper indices")
    return int(hits[0])


def transmit(ch: Channel, phi: np.ndarray, u_n: np.ndarray, s_n: np.ndarray,
             rng: np.random.Generator) -> np.ndarray:
    """x_k = φ(u_k); y_k ~ W(·|x_k, s_k) independentes"""
    u_n = np.asarray(u_n, dtype=np.int64)
    s_n = np.asarray(s_n, dtype=np.int64)
    if u_n.shape != s_n.shape:
        raise DimensionMismatchError("u^n and s^n must have the same length")
    x_n = np.asarray(phi)[u_n]
    cdf = np.cumsum(ch.w[x_n, s_n], axis=1)
    y_n = (rng.random(len(u_n))[:, None] >= cdf).sum(axis=1)
    return np.minimum(y_n, ch.y_size - 1)


def decode(cb: Codebook, t1: int, y_n: np.ndarray, ref_uy: np.ndarray, epsilon: float) -> int:
    """
    Único m̂ com u^n(m̂, t1) típico com y^n

    Raises:
        DecodeError: Nenhum candidato (none) ou mais de um (ambiguous)
    """
    hits = np.flatnonzero(typical_many(cb.u_words[:, t1, :], y_n, ref_uy, epsilon))
    if hits.size == 0:
        raise DecodeError(DecodeError.NONE)
    if hits.size > 1:
        raise DecodeError(DecodeError.AMBIGUOUS, candidates=int(hits.size))
    return int(hits[0])


def wilson_interval(k: int, n: int, confidence: float = 0.95) -> Tuple[float, float]:
    """Intervalo de Wilson bilateral para uma proporção binomial"""
    if n <= 0:
        return 0.0, 1.0
    z = float(norm.ppf(0.5 + confidence / 2.0))
    z2 = z * z
    phat = k / n
    denom = 1.0 + z2 / n
    center = phat + z2 / (2.0 * n)
    margin = z * math.sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n))
    lo = 0.0 if k == 0 else max(0.0, (center - margin) / denom)
    hi = 1.0 if k == n else min(1.0, (center + margin) / denom)
    return lo, hi


def resolve_mode(cfg: SimConfig) -> CodebookMode:
    """`auto` vira `explicit` quando a tabela cabe nos limites"""
    if cfg.codebook_mode != CodebookMode.AUTO:
        return cfg.codebook_mode
    fits = (
        cfg.table_bits <= cfg.max_table_bits
        and (1 << cfg.table_bits) * cfg.n * np.min_scalar_type(len(cfg.phi) - 1).itemsize
        <= settings.max_codebook_bytes
    )
    return CodebookMode.EXPLICIT if fits else CodebookMode.ENSEMBLE


class _TrialContext(NamedTuple):
    channel: Channel
    cfg: SimConfig
    mode: CodebookMode
    phi: np.ndarray
    q_u: np.ndarray
    ref_us: np.ndarray
    ref_uy: np.ndarray
    codebook: Optional[Codebook]


def _record(trial: int, outcome: str, message: int = 0, t1: int = 0,
            decoded: Optional[int] = None) -> TrialRecord:
    return TrialRecord(
        trial=trial, message=message, t1=t1, helper_ok=outcome != "helper_failure",
        decoded=decoded, outcome=outcome,
    )


def _explicit_trial(ctx: _TrialContext, trial: int, rng: np.random.Generator) -> TrialRecord:
    cfg, ch = ctx.cfg, ctx.channel
    cb = ctx.codebook
    if cb is None:
        cb = generate_codebook(ctx.q_u, cfg.message_bits, cfg.helper_bits, cfg.n, rng)
    m = int(rng.integers(cb.num_messages))
    s_n = rng.choice(ch.s_size, size=cfg.n, p=ch.q_s)

    try:
        t1 = helper_encode(cb, m, s_n, ctx.ref_us, cfg.epsilon)
    except HelperFailure:
        return _record(trial, "helper_failure", message=m)

    y_n = transmit(ch, ctx.phi, cb.u_words[m, t1], s_n, rng)
    try:
        m_hat = decode(cb, t1, y_n, ctx.ref_uy, cfg.decoder_epsilon)
    except DecodeError as e:
        return _record(trial, f"decode_{e.reason}", message=m, t1=t1)
    return _record(trial, "ok" if m_hat == m else "decode_wrong", message=m, t1=t1, decoded=m_hat)


class _EnsembleBoxes:
    """Leis de caixa por classe de símbolo, memorizadas por (classe, tamanho)"""

    def __init__(self, ctx: _TrialContext):
        n = ctx.cfg.n
        self.q_u = ctx.q_u
        self._helper_box = count_box(ctx.ref_us, n, ctx.cfg.epsilon)
        self._decoder_box = count_box(ctx.ref_uy, n, ctx.cfg.decoder_epsilon)
        self._cache: Dict[Tuple[str, int, int], BoxMultinomial] = {}

    def _get(self, kind: str, column: int, total: int) -> BoxMultinomial:
        key = (kind, column, total)
        if key not in self._cache:
            lo, hi = self._helper_box if kind == "helper" else self._decoder_box
            self._cache[key] = BoxMultinomial(total, self.q_u, lo[:, column], hi[:, column])
        return self._cache[key]

    def helper(self, s: int, total: int) -> BoxMultinomial:
        return self._get("helper", s, total)

    def decoder(self, y: int, total: int) -> BoxMultinomial:
        return self._get("decoder", y, total)


def _pow2(bits: int) -> float:
    return math.inf if bits >= 1024 else 2.0 ** bits


def _first_success(log_p: float, count: float, rng: np.random.Generator) -> Optional[int]:
    """Índice do primeiro sucesso entre `count` tentativas independentes (None se nenhum)"""
    if not np.isfinite(log_p):
        return None
    p = math.exp(log_p)
    if p >= 1.0:
        return 0
    log_q = math.log1p(-p)
    log_fail = count * log_q
    if rng.random() < math.exp(log_fail):
        return None
    v = rng.random()
    x = math.log1p(-v * -math.expm1(log_fail))
    t = max(0, math.ceil(x / log_q - 1.0))
    return int(min(t, count - 1))


def _impostor_count(log_p: float, count: float, rng: np.random.Generator) -> int:
    """Binomial(count, p) truncada em 2 (0, 1 ou 'dois ou mais')"""
    if count <= 0 or not np.isfinite(log_p):
        return 0
    if math.isinf(count):
        return 2
    p = math.exp(log_p)
    if p >= 1.0:
        return min(int(count), 2)
    log_q = math.log1p(-p)
    p0 = math.exp(count * log_q)
    p1 = math.exp(math.log(count) + log_p + (count - 1.0) * log_q)
    v = rng.random()
    if v < p0:
        return 0
    if v < p0 + p1:
        return 1
    return 2


def _ensemble_trial(ctx: _TrialContext, boxes: _EnsembleBoxes, trial: int,
                    rng: np.random.Generator) -> TrialRecord:
    """
    Uma tentativa com as estatísticas exatas do ensemble aleatório

    Por simetria do ensemble, a mensagem enviada é m = 0. O índice t* é o
    primeiro sucesso entre 2^⌈n(Rh−R0)⌉ sorteios independentes; u^n(m, t*)
    segue a multinomial restrita à caixa em cada classe de estado; o número
    de palavras incorretas típicas com y^n segue a sua binomial exata.
    """
    cfg, ch = ctx.cfg, ctx.channel
    s_n = rng.choice(ch.s_size, size=cfg.n, p=ch.q_s)
    s_counts = np.bincount(s_n, minlength=ch.s_size)

    log_p_helper = sum(boxes.helper(s, int(c)).log_prob for s, c in enumerate(s_counts))
    t1 = _first_success(log_p_helper, _pow2(cfg.helper_bits), rng)
    if t1 is None:
        return _record(trial, "helper_failure")

    u_n = np.zeros(cfg.n, dtype=np.int64)
    for s, c in enumerate(s_counts):
        if c == 0:
            continue
        counts = boxes.helper(s, int(c)).sample(rng)
        symbols = np.repeat(np.arange(len(counts)), counts)
        rng.shuffle(symbols)
        u_n[s_n == s] = symbols

    y_n = transmit(ch, ctx.phi, u_n, s_n, rng)
    correct = typical(u_n, y_n, ctx.ref_uy, cfg.decoder_epsilon)

    y_counts = np.bincount(y_n, minlength=ch.y_size)
    log_p_decoder = sum(boxes.decoder(y, int(c)).log_prob for y, c in enumerate(y_counts))
    impostors = _impostor_count(log_p_decoder, _pow2(cfg.message_bits) - 1.0, rng)

    if correct and impostors == 0:
        return _record(trial, "ok", t1=t1, decoded=0)
    if impostors >= 2 or (correct and impostors == 1):
        return _record(trial, "decode_ambiguous", t1=t1)
    if impostors == 1:
        return _record(trial, "decode_wrong", t1=t1)
    return _record(trial, "decode_none", t1=t1)


def _run_chunk(task: Tuple[_TrialContext, List[int]]) -> List[TrialRecord]:
    ctx, trials = task
    boxes = _EnsembleBoxes(ctx) if ctx.mode == CodebookMode.ENSEMBLE else None
    records = []
    for trial in trials:
        rng = task_rng(ctx.cfg.seed, trial)
        if boxes is None:
            records.append(_explicit_trial(ctx, trial, rng))
        else:
            records.append(_ensemble_trial(ctx, boxes, trial, rng))
    return records


def write_trial_log(path: Union[str, Path], records: List[TrialRecord]) -> None:
    """Registro por tentativa em CSV"""
    fields = ["trial", "message", "t1", "helper_ok", "decoded", "outcome"]
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.DictWriter(f, fieldnames=fields)
        writer.writeheader()
        for record in records:
            row = record.model_dump()
            row["decoded"] = "" if row["decoded"] is None else row["decoded"]
            writer.writerow(row)


def run_trials(
    ch: Channel,
    cfg: SimConfig,
    jobs: int = 1,
    trial_log: Optional[Union[str, Path]] = None,
) -> SimReport:
    """
    Executar as tentativas e agregar as estatísticas de erro

    Cada tentativa usa o gerador derivado de (seed, índice da tentativa),
    de modo que o relatório não depende do paralelismo.

    Args:
        ch: Canal validado
        cfg: Ponto de operação e política
        jobs: Processos paralelos
        trial_log: Caminho opcional para o registro por tentativa

    Raises:
        ConfigTooLargeError: Tabela grande demais no modo explicit
        DimensionMismatchError: Política incompatível com o canal
    """
    if cfg.q_u_given_s.shape[0] != ch.s_size or np.any(cfg.phi >= ch.x_size):
        raise DimensionMismatchError("policy does not match the channel", field="policy")

    mode = resolve_mode(cfg)
    if mode == CodebookMode.EXPLICIT and cfg.table_bits > cfg.max_table_bits:
        raise ConfigTooLargeError(
            f"⌈nR⌉ + ⌈n(Rh−R0)⌉ = {cfg.table_bits} exceeds {cfg.max_table_bits}",
            field="table_bits",
        )

    q_u_given_s, phi = compact_branch(ch.q_s, cfg.q_u_given_s, cfg.phi)
    ref_us, ref_uy = reference_laws(ch, q_u_given_s, phi)
    q_u = ref_us.sum(axis=1)
    q_u = q_u / q_u.sum()

    codebook = None
    if cfg.shared_codebook and mode == CodebookMode.ENSEMBLE:
        raise ConfigTooLargeError("a shared codebook does not fit the explicit table limits", field="table_bits")
    if cfg.shared_codebook:
        codebook = generate_codebook(q_u, cfg.message_bits, cfg.helper_bits, cfg.n,
                                     task_rng(cfg.seed, 3, 0))

    ctx = _TrialContext(
        channel=ch, cfg=cfg, mode=mode, phi=phi, q_u=q_u,
        ref_us=ref_us, ref_uy=ref_uy, codebook=codebook,
    )
    chunk_size = max(1, math.ceil(cfg.trials / max(1, 4 * jobs)))
    tasks = [(ctx, chunk) for chunk in chunked(range(cfg.trials), chunk_size)]

    with log_duration(logger, "simulation", n=cfg.n, trials=cfg.trials, mode=mode.value) as extra:
        records = [r for chunk in parallel_map(_run_chunk, tasks, jobs=jobs) for r in chunk]
        extra["outcomes"] = {o: sum(r.outcome == o for r in records) for o in OUTCOMES}

    helper_failures = sum(r.outcome == "helper_failure" for r in records)
    decode_errors = sum(r.outcome.startswith("decode_") for r in records)
    errors = helper_failures + decode_errors
    ci_lo, ci_hi = wilson_interval(errors, cfg.trials)

    if trial_log is not None:
        write_trial_log(trial_log, records)

    return SimReport(
        n=cfg.n,
        rate_r=cfg.rate_r,
        rate_rh=cfg.rate_rh,
        r0=cfg.r0,
        epsilon=cfg.epsilon,
        decoder_epsilon=cfg.decoder_epsilon,
        trials=cfg.trials,
        helper_failures=helper_failures,
        decode_errors=decode_errors,
        # M̃ vai pelo enlace do auxiliar, sem ruído
        direct_bit_errors=0,
        error_rate=errors / cfg.trials,
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        effective_rate=(cfg.message_bits + cfg.direct_bits) / cfg.n,
        seed=cfg.seed,
        codebook_mode=mode,
    )
