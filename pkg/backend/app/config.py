"""
Configurações do HelpCap usando pydantic-settings
"""

from pydantic_settings import BaseSettings, SettingsConfigDict
from pydantic import field_validator
from typing import List, Union


class Settings(BaseSettings):
    """Configurações da aplicação HelpCap"""

    model_config = SettingsConfigDict(
        env_file=".env",
        env_file_encoding="utf-8",
        env_prefix="HELPCAP_",
        case_sensitive=False,
        extra="ignore"
    )

    # Configurações da aplicação
    app_name: str = "HelpCap"
    app_version: str = "1.0.0"
    debug: bool = False

    # Configurações de logging
    log_level: str = "WARNING"
    log_format: str = "console"

    # Limites dos canais
    max_alphabet_size: int = 16

    # Tolerâncias numéricas
    prob_tolerance: float = 1e-12         # validação de entrada
    arithmetic_tolerance: float = 1e-10   # após aritmética
    feasibility_tolerance: float = 1e-9   # restrição I(U;S) <= r
    detection_tolerance: float = 1e-12    # detecção de casos especiais
    ba_tolerance: float = 1e-9
    ba_max_iters: int = 10000

    # Padrões do otimizador
    r_grid_size: int = 33
    restarts: int = 64
    max_iters: int = 5000
    step_init: float = 0.1
    penalty_schedule: Union[str, List[float]] = "1,10,100,1000"
    phi_enum_cap: int = 4096
    phi_samples: int = 8
    rate_split_grid_size: int = 33

    # Padrões do simulador
    helper_epsilon: float = 0.05
    decoder_epsilon: float = 0.1
    helper_rate_margin: float = 0.05     # Rh − R0 − I(U;S) com --policy-from-capacity
    max_table_bits: int = 24
    max_codebook_bytes: int = 1 << 28   # limite de memória da tabela u^n(m, t1)

    # Configurações da CLI
    output_digits: int = 9
    oracle_tolerance: float = 1e-2
    path_agreement_tolerance: float = 2e-2
    default_jobs: int = 1

    @field_validator('penalty_schedule', mode='before')
    @classmethod
    def parse_penalty_schedule(cls, v):
        """Parse comma-separated penalty multipliers"""
        if isinstance(v, str):
            return [float(x.strip()) for x in v.split(',') if x.strip()]
        return v

    def model_post_init(self, __context) -> None:
        """Validação pós-inicialização"""
        tolerances = {
            "prob_tolerance": self.prob_tolerance,
            "arithmetic_tolerance": self.arithmetic_tolerance,
            "feasibility_tolerance": self.feasibility_tolerance,
            "detection_tolerance": self.detection_tolerance,
            "ba_tolerance": self.ba_tolerance,
        }
        for name, value in tolerances.items():
            if value <= 0:
                raise ValueError(f"{name.upper()} must be positive")

        if not self.penalty_schedule or any(m <= 0 for m in self.penalty_schedule):
            raise ValueError("PENALTY_SCHEDULE must be a non-empty list of positive multipliers")

        if any(b < a for a, b in zip(self.penalty_schedule, self.penalty_schedule[1:])):
            raise ValueError("PENALTY_SCHEDULE must be non-decreasing")

        if not 1 <= self.max_alphabet_size <= 64:
            raise ValueError("MAX_ALPHABET_SIZE must be between 1 and 64")

        if self.log_format not in ("json", "console"):
            raise ValueError("LOG_FORMAT must be 'json' or 'console'")


# Instância global das configurações
settings = Settings()
