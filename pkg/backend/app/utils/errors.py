"""
Hierarquia de exceções do HelpCap

Toda falha de domínio deriva de HelpCapError; a CLI converte essas
exceções em código de saída 1.
"""

from typing import Optional


class HelpCapError(Exception):
    """Erro base de domínio"""

    code = "helpcap_error"

    def __init__(self, message: str, *, field: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.field = field

    def __str__(self) -> str:
        prefix = f"{self.code}"
        if self.field:
            prefix += f" [{self.field}]"
        return f"{prefix}: {self.message}"


# Validação de canal
class ChannelValidationError(HelpCapError):
    code = "channel_invalid"


class NonStochasticError(ChannelValidationError):
    code = "non_stochastic"


class SizeOutOfRangeError(ChannelValidationError):
    code = "size_out_of_range"


class NegativeEntryError(ChannelValidationError):
    code = "negative_entry"


class ChannelParseError(ChannelValidationError):
    code = "parse_error"


# Medidas de informação
class NotADistributionError(HelpCapError):
    code = "not_a_distribution"


class DimensionMismatchError(HelpCapError):
    code = "dimension_mismatch"


class ConvergenceFailureError(HelpCapError):
    code = "convergence_failure"


class NumericalFailureError(HelpCapError):
    code = "numerical_failure"


# Otimizador
class QueryOutOfRangeError(HelpCapError):
    code = "query_out_of_range"


class TooLargeError(HelpCapError):
    code = "too_large"


# Oráculos
class NotModAdditiveError(HelpCapError):
    code = "not_mod_additive"


class RhTooSmallError(HelpCapError):
    code = "rh_too_small"


# Simulador
class LengthMismatchError(HelpCapError):
    code = "length_mismatch"


class ConfigTooLargeError(HelpCapError):
    code = "config_too_large"


class HelperFailure(HelpCapError):
    """Nenhuma palavra-código típica com a sequência de estados (contabilizada, não fatal)"""

    code = "helper_failure"


class DecodeError(HelpCapError):
    """Decodificação sem candidato típico ou ambígua (contabilizada, não fatal)"""

    code = "decode_error"

    NONE = "none"
    AMBIGUOUS = "ambiguous"

    def __init__(self, reason: str, *, candidates: int = 0):
        super().__init__(f"decoder found {candidates} typical candidates", field=reason)
        self.reason = reason
        self.candidates = candidates
