"""
HelpCap CLI - Capacidade de canais com estado assistidos por um auxiliar
cognizante da mensagem

Subcomandos: validate, capacity, sweep, oracle, simulate
"""

import argparse
import csv
import io
import json
import logging
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from pydantic import ValidationError

from .config import settings
from .schemas import (
    CapacityMethod, CapacityResult, Channel, CodebookMode, OptimOptions,
    OracleCase, OracleValue, PolicyFile, RunManifest, SimConfig, SimReport
)
from .services.brute_force import brute_force_capacity
from .services.channel import channel_summary, load_channel
from .services.objective import BranchObjective
from .services.optimizer import capacity, capacity_rate_split, sweep
from .services.oracles import detect_special_cases
from .services.simulator import run_trials
from .utils.errors import HelpCapError, TooLargeError
from .utils.logging import configure_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

SWEEP_FIELDS = ["rh", "c", "r0", "method", "slack", "support_rs", "support_ws"]
SUPPORT_FIELDS = ["rh", "index", "r", "g", "weight"]
SIMULATE_FIELDS = [
    "n", "rate_r", "rate_rh", "r0", "epsilon", "trials",
    "helper_failures", "decode_errors", "error_rate", "ci_lo", "ci_hi", "seed",
]
TOLERANCE_KEYS = ("oracle", "path_agreement")


# Tipos de argumento

def _nonnegative_float(value: str) -> float:
    try:
        x = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {value!r}")
    if not np.isfinite(x) or x < 0:
        raise argparse.ArgumentTypeError(f"must be a finite nonnegative number, got {value}")
    return x


def _positive_int(value: str) -> int:
    try:
        x = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}")
    if x < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return x


def _seed(value: str) -> int:
    try:
        x = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {value!r}")
    if not 0 <= x < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return x


def _epsilon(value: str) -> float:
    x = _nonnegative_float(value)
    if not 0 < x < 0.5:
        raise argparse.ArgumentTypeError(f"epsilon must be in (0, 0.5), got {value}")
    return x


def parse_tolerance_overrides(value: str) -> Dict[str, float]:
    """
    Ler `chave=valor,...` para as tolerâncias oracle e path_agreement

    Raises:
        argparse.ArgumentTypeError: Chave desconhecida ou valor inválido
    """
    overrides: Dict[str, float] = {}
    for item in value.split(","):
        if not item.strip():
            continue
        key, sep, raw = item.partition("=")
        key = key.strip()
        if not sep or key not in TOLERANCE_KEYS:
            raise argparse.ArgumentTypeError(
                f"invalid tolerance override {item!r}; keys: {', '.join(TOLERANCE_KEYS)}"
            )
        tol = _nonnegative_float(raw.strip())
        overrides[key] = tol
    return overrides


# Formatação

def fmt(x: Any) -> str:
    """Números com settings.output_digits algarismos significativos"""
    if isinstance(x, (bool, np.bool_)):
        return "true" if x else "false"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.{settings.output_digits}g}"
    if isinstance(x, (list, tuple, np.ndarray)):
        return ";".join(fmt(v) for v in x)
    return str(x)


def format_record(fields: Dict[str, Any]) -> str:
    """Registro `chave = valor`, uma linha por campo"""
    return "".join(f"{key} = {fmt(value)}\n" for key, value in fields.items())


def capacity_record(result: CapacityResult) -> Dict[str, Any]:
    diag = result.diagnostics
    fields: Dict[str, Any] = {
        "method": result.method.value,
        "rh": result.rh,
        "c": result.c,
        "r0": result.r0,
        "slack": diag.slack,
        "v_size": result.policy.v_size,
        "u_size": result.policy.u_size,
        "support_rs": diag.support_rs,
        "support_ws": diag.support_ws,
        "restarts_used": diag.restarts_used,
        "grid_points": diag.grid_points,
    }
    if diag.lattice_step is not None:
        fields["lattice_step"] = diag.lattice_step
    return fields


def oracle_record(value: OracleValue) -> Dict[str, Any]:
    fields: Dict[str, Any] = {
        "case": value.case_name.value,
        "value": value.value,
        "is_bound": value.is_bound,
    }
    if value.weaker_bound is not None:
        fields["weaker_bound"] = value.weaker_bound
    for name, ok in value.assumptions_checked.items():
        fields[f"assumption.{name}"] = ok
    return fields


def simulate_row(report: SimReport) -> Dict[str, str]:
    return {field: fmt(getattr(report, field)) for field in SIMULATE_FIELDS}


# Saída

class Output:
    """Destino dos dados (stdout ou --out) e do manifesto"""

    def __init__(self, path: Optional[str]):
        self.path = Path(path) if path else None

    def write(self, text: str, append: bool = False) -> None:
        if self.path is None:
            sys.stdout.write(text)
            return
        mode = "a" if append else "w"
        with open(self.path, mode, encoding="utf-8", newline="") as f:
            f.write(text)

    def exists(self) -> bool:
        return self.path is not None and self.path.exists() and self.path.stat().st_size > 0

    def sibling(self, suffix: str) -> Optional[Path]:
        if self.path is None:
            return None
        return self.path.with_name(self.path.name + suffix)

    def write_manifest(self, manifest: RunManifest) -> None:
        text = manifest.model_dump_json(indent=2)
        target = self.sibling(".manifest.json")
        if target is None:
            sys.stderr.write(text + "\n")
        else:
            target.write_text(text + "\n", encoding="utf-8")


def _csv_text(fields: Sequence[str], rows: List[Dict[str, Any]], header: bool = True) -> str:
    buffer = io.StringIO()
    writer = csv.DictWriter(buffer, fieldnames=list(fields), lineterminator="\n")
    if header:
        writer.writeheader()
    writer.writerows(rows)
    return buffer.getvalue()


def _optim_options(args: argparse.Namespace) -> OptimOptions:
    overrides: Dict[str, Any] = {"seed": args.seed, "jobs": args.jobs}
    for name in ("r_grid_size", "restarts", "max_iters", "u_size"):
        value = getattr(args, name, None)
        if value is not None:
            overrides[name] = value
    return OptimOptions(**overrides)


def _tolerance(args: argparse.Namespace, key: str) -> float:
    defaults = {
        "oracle": settings.oracle_tolerance,
        "path_agreement": settings.path_agreement_tolerance,
    }
    return args.tolerance_overrides.get(key, defaults[key])


# Subcomandos

def cmd_validate(args: argparse.Namespace, out: Output) -> int:
    """Resumo do canal; o primeiro erro de validação sai com código 1"""
    ch = load_channel(args.channel)
    summary = channel_summary(ch)
    text = format_record({
        "channel": summary["name"],
        "x_size": summary["x_size"],
        "s_size": summary["s_size"],
        "y_size": summary["y_size"],
        "h_s": summary["h_s"],
        "cases": summary["cases"] or "none",
    })
    for case in summary["cases"]:
        text += f"{case} detected, H(S)={fmt(summary['h_s'])}\n"
    out.write(text)
    logger.info(f"✅ Canal válido: {summary['name']}")
    return EXIT_OK


def _check_against_oracles(ch: Channel, results: List[CapacityResult],
                           tol: float) -> List[str]:
    breaches: List[str] = []
    for result in results:
        for oracle in detect_special_cases(ch, result.rh):
            # a linha de base oblívia não limita C(Rh) abaixo de H(S)
            if oracle.case_name == OracleCase.OBLIVIOUS:
                continue
            if oracle.is_bound:
                ok = result.c >= oracle.value - tol
            else:
                ok = abs(result.c - oracle.value) <= tol
            if not ok:
                breaches.append(
                    f"{result.method.value}: c={fmt(result.c)} vs "
                    f"{oracle.case_name.value}={fmt(oracle.value)}"
                )
    return breaches


def cmd_capacity(args: argparse.Namespace, out: Output) -> int:
    """C(Rh) por um ou todos os caminhos, com verificação opcional contra os oráculos"""
    ch = load_channel(args.channel)
    opts = _optim_options(args)
    methods = (
        list(CapacityMethod) if args.method == "all" else [CapacityMethod(args.method)]
    )

    results: List[CapacityResult] = []
    for method in methods:
        logger.info(f"🔍 Calculando C(Rh={args.rh}) pelo caminho {method.value}")
        if method == CapacityMethod.ENVELOPE:
            results.append(capacity(ch, args.rh, opts))
        elif method == CapacityMethod.RATE_SPLIT:
            results.append(capacity_rate_split(ch, args.rh, opts))
        else:
            try:
                results.append(brute_force_capacity(ch, args.rh, grid_levels=args.grid_levels))
            except TooLargeError as e:
                if args.method != "all":
                    raise
                logger.warning(f"⚠️ Força bruta ignorada: {e}")

    out.write("\n".join(format_record(capacity_record(r)) for r in results))

    status = EXIT_OK
    if args.method == "all" and len(results) > 1:
        by_method = {r.method: r for r in results}
        envelope = by_method[CapacityMethod.ENVELOPE]
        split = by_method[CapacityMethod.RATE_SPLIT]
        agreement = abs(envelope.c - split.c)
        logger.info(f"📊 Diferença envelope/rate_split: {agreement:.3g}")
        if args.check_oracle and agreement > _tolerance(args, "path_agreement"):
            sys.stderr.write(f"paths disagree: |{fmt(envelope.c)} - {fmt(split.c)}| = {fmt(agreement)}\n")
            status = EXIT_FAILURE
        brute = by_method.get(CapacityMethod.BRUTE_FORCE)
        if args.check_oracle and brute is not None and envelope.c < brute.c - 1e-6:
            sys.stderr.write(f"envelope below brute force: {fmt(envelope.c)} < {fmt(brute.c)}\n")
            status = EXIT_FAILURE

    if args.check_oracle:
        breaches = _check_against_oracles(ch, results, _tolerance(args, "oracle"))
        for breach in breaches:
            sys.stderr.write(f"oracle breach: {breach}\n")
        if breaches:
            status = EXIT_FAILURE
        else:
            logger.info("✅ Resultado compatível com os oráculos")
    return status


def cmd_sweep(args: argparse.Namespace, out: Output) -> int:
    """Curva C(Rh) em uma grade uniforme de Rh, com arquivo de pontos de suporte"""
    ch = load_channel(args.channel)
    rh_values = np.linspace(args.rh_min, args.rh_max, args.steps).tolist()
    logger.info(f"📈 Varredura de {len(rh_values)} pontos em [{args.rh_min}, {args.rh_max}]")
    results = sweep(ch, rh_values, _optim_options(args))

    rows, support_rows = [], []
    for result in results:
        record = capacity_record(result)
        rows.append({field: fmt(record[field]) for field in SWEEP_FIELDS})
        diag = result.diagnostics
        for i, (r, g, w) in enumerate(zip(diag.support_rs, diag.support_gs, diag.support_ws)):
            support_rows.append({
                "rh": fmt(result.rh), "index": i, "r": fmt(r), "g": fmt(g), "weight": fmt(w),
            })
    out.write(_csv_text(SWEEP_FIELDS, rows))

    support_path = out.sibling(".support.csv")
    if support_path is not None:
        support_path.write_text(_csv_text(SUPPORT_FIELDS, support_rows), encoding="utf-8")
    else:
        logger.info("ℹ️ Pontos de suporte só são gravados com --out")
    return EXIT_OK


def cmd_oracle(args: argparse.Namespace, out: Output) -> int:
    """Todos os casos especiais aplicáveis ao canal em Rh"""
    ch = load_channel(args.channel)
    found = detect_special_cases(ch, args.rh)
    out.write("\n".join(format_record(oracle_record(v)) for v in found))
    return EXIT_OK


def _policy_branch(ch: Channel, args: argparse.Namespace):
    """
    (Q_{U|S}, φ, Rh padrão, I(U;S) do ramo) da fonte de política escolhida

    I(U;S) vem como None para políticas lidas de arquivo.
    """
    if args.policy is not None:
        path = Path(args.policy)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as e:
            raise HelpCapError(f"cannot read policy file {path}: {e}", field="policy") from e
        if not isinstance(raw, dict):
            raise HelpCapError("policy file must hold an object", field="policy")
        policy = PolicyFile(**raw)
        return np.asarray(policy.q_u_given_s, dtype=float), np.asarray(policy.phi), None, None

    result = capacity(ch, args.policy_from_capacity, _optim_options(args))
    pol = result.policy
    v = int(np.argmax(pol.q_v))
    logger.info(
        f"🧭 Política do ramo v={v} (peso {pol.q_v[v]:.3g}) de C({args.policy_from_capacity})={result.c:.6g}"
    )
    q_u_given_s, phi = pol.q_u_given_sv[v], pol.phi[v]
    _, i_us = BranchObjective(ch, phi[None]).evaluate(q_u_given_s[None])
    return q_u_given_s, phi, args.policy_from_capacity, float(i_us[0])


def cmd_simulate(args: argparse.Namespace, out: Output) -> int:
    """Executar as tentativas Monte-Carlo e acrescentar uma linha ao CSV"""
    ch = load_channel(args.channel)
    q_u_given_s, phi, default_rh, branch_i_us = _policy_branch(ch, args)

    rate_rh = args.rate_rh if args.rate_rh is not None else default_rh
    if rate_rh is None:
        raise HelpCapError("--rate-rh is required with --policy", field="rate_rh")
    if args.r0 is not None:
        r0 = args.r0
    elif branch_i_us is None:
        r0 = 0.0
    else:
        margin = settings.helper_rate_margin if args.helper_margin is None else args.helper_margin
        r0 = max(0.0, rate_rh - branch_i_us - margin)
        if rate_rh - r0 <= branch_i_us:
            logger.warning(
                f"⚠️ Rh − R0 = {rate_rh - r0:.4g} não excede I(U;S) = {branch_i_us:.4g} do ramo; "
                "o auxiliar pode falhar para qualquer n"
            )

    extra: Dict[str, Any] = {}
    if args.epsilon is not None:
        extra["epsilon"] = args.epsilon
    if args.decoder_epsilon is not None:
        extra["decoder_epsilon"] = args.decoder_epsilon

    cfg = SimConfig(
        n=args.n,
        rate_r=args.rate_r,
        rate_rh=rate_rh,
        r0=r0,
        q_u_given_s=q_u_given_s,
        phi=phi,
        trials=args.trials,
        seed=args.seed,
        codebook_mode=CodebookMode(args.codebook),
        shared_codebook=args.shared_codebook,
        **extra,
    )
    logger.info(f"🎲 Simulando {cfg.trials} tentativas com n={cfg.n}, R={cfg.rate_r}, Rh={cfg.rate_rh}")
    report = run_trials(ch, cfg, jobs=args.jobs, trial_log=args.trial_log)

    out.write(_csv_text(SIMULATE_FIELDS, [simulate_row(report)], header=not out.exists()), append=True)
    logger.info(f"📊 Taxa de erro {report.error_rate:.4g} [{report.ci_lo:.4g}, {report.ci_hi:.4g}]")
    return EXIT_OK


COMMANDS = {
    "validate": cmd_validate,
    "capacity": cmd_capacity,
    "sweep": cmd_sweep,
    "oracle": cmd_oracle,
    "simulate": cmd_simulate,
}


def build_parser() -> argparse.ArgumentParser:
    """Parser com os cinco subcomandos e as opções comuns"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_seed, default=0, help="Seed de 64 bits (padrão: 0)")
    common.add_argument("--jobs", type=_positive_int, default=settings.default_jobs,
                        help="Número máximo de processos")
    common.add_argument("--out", default=None, help="Arquivo de saída (padrão: stdout)")
    common.add_argument("--tolerance-overrides", type=parse_tolerance_overrides, default={},
                        help="Tolerâncias chave=valor (oracle, path_agreement)")
    common.add_argument("--log-level", default=None, help="Nível de log (padrão: settings)")

    optim = argparse.ArgumentParser(add_help=False)
    optim.add_argument("--r-grid-size", dest="r_grid_size", type=_positive_int, default=None)
    optim.add_argument("--restarts", type=_positive_int, default=None)
    optim.add_argument("--max-iters", dest="max_iters", type=_positive_int, default=None)
    optim.add_argument("--u-size", dest="u_size", type=_positive_int, default=None)

    parser = argparse.ArgumentParser(
        prog=settings.app_name.lower(),
        description="Capacidade de canais com estado assistidos por um auxiliar de taxa limitada",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {settings.app_version}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="Validar um arquivo de canal")
    p.add_argument("channel")

    p = sub.add_parser("capacity", parents=[common, optim], help="Calcular C(Rh)")
    p.add_argument("channel")
    p.add_argument("rh", type=_nonnegative_float)
    p.add_argument("--method", choices=[m.value for m in CapacityMethod] + ["all"],
                   default=CapacityMethod.ENVELOPE.value)
    p.add_argument("--check-oracle", action="store_true",
                   help="Comparar com os oráculos detectados; sai com 1 se a tolerância for violada")
    p.add_argument("--grid-levels", type=_positive_int, default=7,
                   help="Níveis do reticulado da força bruta")

    p = sub.add_parser("sweep", parents=[common, optim], help="Curva C(Rh) em CSV")
    p.add_argument("channel")
    p.add_argument("rh_min", type=_nonnegative_float)
    p.add_argument("rh_max", type=_nonnegative_float)
    p.add_argument("steps", type=_positive_int)

    p = sub.add_parser("oracle", parents=[common], help="Casos especiais e valores analíticos")
    p.add_argument("channel")
    p.add_argument("--rh", type=_nonnegative_float, required=True)

    p = sub.add_parser("simulate", parents=[common, optim], help="Simulação Monte-Carlo do esquema")
    p.add_argument("channel")
    source = p.add_mutually_exclusive_group(required=True)
    source.add_argument("--policy-from-capacity", type=_nonnegative_float, metavar="RH",
                        help="Usar o ramo de maior peso da política ótima em RH")
    source.add_argument("--policy", metavar="FILE", help="JSON com q_u_given_s e phi")
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--rate-r", dest="rate_r", type=_nonnegative_float, required=True)
    p.add_argument("--rate-rh", dest="rate_rh", type=_nonnegative_float, default=None)
    p.add_argument("--r0", type=_nonnegative_float, default=None)
    p.add_argument("--helper-margin", dest="helper_margin", type=_nonnegative_float, default=None,
                   help="Folga Rh − R0 − I(U;S) com --policy-from-capacity (padrão: settings)")
    p.add_argument("--epsilon", type=_epsilon, default=None, help="Folga do auxiliar")
    p.add_argument("--decoder-epsilon", dest="decoder_epsilon", type=_epsilon, default=None)
    p.add_argument("--trials", type=_positive_int, required=True)
    p.add_argument("--codebook", choices=[m.value for m in CodebookMode],
                   default=CodebookMode.AUTO.value)
    p.add_argument("--shared-codebook", action="store_true")
    p.add_argument("--trial-log", default=None, help="CSV com o registro por tentativa")

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Ponto de entrada da CLI

    Returns:
        0 em caso de sucesso, 1 para falhas de domínio ou validação,
        2 para erros de uso (argparse)
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK

    if args.command == "sweep" and (args.rh_min > args.rh_max or args.steps < 2):
        parser.print_usage(sys.stderr)
        sys.stderr.write("helpcap sweep: error: requires rh_min <= rh_max and steps >= 2\n")
        return EXIT_USAGE
    if args.command == "simulate" and args.r0 is not None and args.rate_rh is not None \
            and args.r0 > args.rate_rh:
        parser.print_usage(sys.stderr)
        sys.stderr.write("helpcap simulate: error: --r0 must not exceed --rate-rh\n")
        return EXIT_USAGE

    configure_logging(level=args.log_level)
    out = Output(args.out)
    parameters = {
        key: value for key, value in vars(args).items()
        if key not in ("command", "channel", "seed")
    }

    start_time = time.time()
    try:
        status = COMMANDS[args.command](args, out)
    except HelpCapError as e:
        logger.error(f"❌ {args.command} falhou")
        sys.stderr.write(f"{e}\n")
        return EXIT_FAILURE
    except ValidationError as e:
        logger.error(f"❌ Configuração inválida em {args.command}")
        sys.stderr.write(f"invalid configuration: {e}\n")
        return EXIT_FAILURE

    if args.command != "validate":
        out.write_manifest(RunManifest(
            command=args.command,
            channel_path=str(args.channel),
            parameters=parameters,
            seed=args.seed,
            tool_version=settings.app_version,
            wall_time=time.time() - start_time,
        ))
    return status


if __name__ == "__main__":
    sys.exit(main())
