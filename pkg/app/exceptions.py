"""
Jerarquía de excepciones del dominio.
Cada clase conoce su código de salida en la CLI y su estado HTTP en la API.
"""


class DeflectionError(Exception):
    """Error base de la librería."""

    exit_code: int = 1
    http_status: int = 400
    kind: str = "deflection"


class InvalidInputError(DeflectionError, ValueError):
    """Parámetros fuera de dominio (rangos, índices, muestras)."""

    exit_code = 1
    http_status = 422
    kind = "invalid-input"


class RegimeError(InvalidInputError):
    """El signo de φ₀ o el régimen geométrico no admite la operación."""

    kind = "regime"


class VerificationError(DeflectionError):
    """Un oráculo o una verificación cruzada no alcanzó la tolerancia."""

    exit_code = 2
    http_status = 500
    kind = "verification"


class QuadratureError(VerificationError):
    """La cuadratura adaptativa no convergió a la tolerancia pedida."""

    kind = "quadrature"


class OrbitingError(VerificationError):
    """La trayectoria no salió del potencial dentro de la longitud de arco permitida."""

    kind = "orbiting"


class ReproductionError(VerificationError):
    """Las predicciones recalculadas no reproducen los valores publicados."""

    kind = "reproduction"
