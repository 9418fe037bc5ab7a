"""
Excepciones del proyecto. Todas heredan de ValueError para que el código
que ya captura ValueError siga funcionando.
"""


class WPSError(ValueError):
    """Error base para entradas inválidas."""


class ExactDomainError(WPSError):
    """Factorización o logaritmo de un valor no positivo."""


class WeightsError(WPSError):
    """Pesos (q0,...,qn) inválidos."""


class ChartError(WPSError):
    """Índice de carta fuera de rango o punto fuera del politopo."""


class DegreeMismatchError(WPSError):
    """El vector K no cumple sum(q_j k_j) = |b - a|."""


class CompositionError(WPSError):
    """Generadores no componibles o potencial relativo con a >= b."""


class FlowError(WPSError):
    """Punto no interior o Newton sin convergencia."""


class PlotError(WPSError):
    """Dimensión no soportada por los gráficos."""
