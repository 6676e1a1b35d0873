"""
Servicio de deflexión.
Evalúa en forma cerrada la función de deflexión del sistema de anillos:
términos por anillo (exacto, ángulos pequeños, reducido), suma del cristal,
ramas de un anillo, extremos y ángulos medios de reflexión.
"""

import logging
import math
from functools import partial
from typing import List, Sequence

import numpy as np
from scipy.integrate import quad

from app.config import settings
from app.exceptions import InvalidInputError, QuadratureError, RegimeError
from app.models import (
    AverageAngles,
    DeflectionCurve,
    DeflectionMode,
    DeflectionSample,
    Extrema,
    ScaledGeometry,
    Wall,
)
from app.services.crystal_model import breakpoints, orbiting_check
from utils import mapear_en_paralelo, radianes_a_microrad

logger = logging.getLogger(__name__)

MIN_A_HAT = 1e-15


def sqrt_clamped(x: float) -> float:
    """√x para x ≥ 0; 0 para radicandos negativos (raíces imaginarias descartadas)."""
    return math.sqrt(x) if x > 0 else 0.0


def _root_difference(upper: float, lower: float, delta: float) -> float:
    """
    √upper⁺ − √lower⁺ sabiendo que upper − lower = delta.
    Con ambos radicandos positivos se usa delta/(√upper + √lower), sin cancelación.
    """
    if upper > 0 and lower > 0:
        return delta / (math.sqrt(upper) + math.sqrt(lower))
    return sqrt_clamped(upper) - sqrt_clamped(lower)


def _radicands(wall: Wall, b_hat: float):
    """Radicandos 1−φ−(b̂/ρ)² a cada lado de la pared, calculados como ((ρ−b̂)(ρ+b̂) − φρ²)/ρ²."""
    rho = wall.radius
    rho2 = rho * rho
    gap = (rho - b_hat) * (rho + b_hat)
    return (gap - wall.phi_above * rho2) / rho2, (gap - wall.phi_below * rho2) / rho2


def _clip_unit(x: float) -> float:
    return max(-1.0, min(1.0, x))


def _scan_walls(walls: Sequence[Wall], b_hat: float, mode: DeflectionMode) -> List[float]:
    """
    Recorre las paredes de afuera hacia adentro y devuelve el término de cada una.

    Una pared se alcanza si el radicando de arriba es positivo y se atraviesa si
    además lo es el de abajo; la primera pared alcanzada pero no atravesada refleja
    la trayectoria y las paredes interiores aportan 0.
    """
    terms = [0.0] * len(walls)
    for k, wall in enumerate(walls):
        above, below = _radicands(wall, b_hat)
        if above <= 0:
            break
        crossed = below > 0
        beta = b_hat / wall.radius
        root_diff = _root_difference(above, below, wall.phi_below - wall.phi_above)

        if mode is DeflectionMode.exact:
            n_above = math.sqrt(1.0 - wall.phi_above)
            if crossed:
                n_below = math.sqrt(1.0 - wall.phi_below)
                terms[k] = math.asin(_clip_unit(beta * root_diff / (n_above * n_below)))
            else:
                terms[k] = math.asin(_clip_unit(math.sqrt(above) / n_above))
        elif mode is DeflectionMode.small_angle:
            terms[k] = beta * root_diff
        else:
            terms[k] = root_diff

        if not crossed:
            break
    return terms


def _ring_term(geom: ScaledGeometry, b_hat: float, ring_index_i: int, mode: DeflectionMode) -> float:
    if not 0 <= ring_index_i < geom.plane_count_N:
        raise InvalidInputError(
            f"Índice de anillo {ring_index_i} fuera de rango [0, {geom.plane_count_N})"
        )
    if b_hat < 0:
        raise InvalidInputError("b̂ debe ser no negativo")
    terms = _scan_walls(geom.walls(), b_hat, mode)
    return terms[2 * ring_index_i] + terms[2 * ring_index_i + 1]


def alpha_ring_exact(geom: ScaledGeometry, b_hat: float, ring_index_i: int) -> float:
    """
    Semi-deflexión del anillo i con la forma exacta en arcsin.
    Las paredes que la trayectoria no alcanza aportan 0.
    """
    return _ring_term(geom, b_hat, ring_index_i, DeflectionMode.exact)


def alpha_ring_small(geom: ScaledGeometry, b_hat: float, ring_index_i: int) -> float:
    """Semi-deflexión del anillo i en la aproximación de ángulos pequeños."""
    return _ring_term(geom, b_hat, ring_index_i, DeflectionMode.small_angle)


def alpha_ring_reduced(geom: ScaledGeometry, b_hat: float, ring_index_i: int) -> float:
    return _ring_term(geom, b_hat, ring_index_i, DeflectionMode.reduced)


def chi_crystal(
    geom: ScaledGeometry,
    b_hat: float,
    mode: DeflectionMode = DeflectionMode.small_angle,
) -> DeflectionSample:
    """
    Deflexión total χ = 2·Σᵢ αᵢ(b̂) sobre los N anillos.

    Raises:
        InvalidInputError: si b̂ < 0
    """
    if b_hat < 0:
        raise InvalidInputError("b̂ debe ser no negativo")
    alpha = math.fsum(_scan_walls(geom.walls(), b_hat, mode))
    return DeflectionSample.from_alpha(b_hat, alpha)


def alpha_disc(
    geom: ScaledGeometry,
    b_hat: float,
    mode: DeflectionMode = DeflectionMode.small_angle,
) -> float:
    """
    Semi-deflexión sobre un cilindro sólido del mismo potencial (núcleo lleno):
    solo sobrevive el término de la pared exterior.
    """
    if b_hat < 0:
        raise InvalidInputError("b̂ debe ser no negativo")
    return _scan_walls(geom.walls()[:1], b_hat, mode)[0]


# =============================================================================
# RAMAS DE UN ANILLO
# =============================================================================

def _one_ring(geom: ScaledGeometry) -> None:
    if geom.plane_count_N != 1:
        raise InvalidInputError("Las formas por ramas son para un solo anillo (N = 1)")


def _reduced_pair(radius_ratio_b: float, phi0: float) -> float:
    """√(1−β²) − √(Φ−β²) para β = b̂/ρ."""
    free = (1.0 - radius_ratio_b) * (1.0 + radius_ratio_b)
    return _root_difference(free, free - phi0, phi0)


def alpha_one_ring_piecewise_positive(geom: ScaledGeometry, b_hat: float) -> float:
    """
    Semi-deflexión de un anillo para cargas positivas, por ramas
    con puntos críticos √Φ(1−â) < √Φ < 1.

    Raises:
        RegimeError: si φ₀ ≤ 0
    """
    _one_ring(geom)
    if geom.phi0 <= 0:
        raise RegimeError("La forma para cargas positivas requiere φ₀ > 0")
    sqrt_phi = math.sqrt(geom.Phi)
    b_a = b_hat / (1.0 - geom.a_hat)

    if b_hat < sqrt_phi * (1.0 - geom.a_hat):
        return _reduced_pair(b_hat, geom.phi0) - _reduced_pair(b_a, geom.phi0)
    if b_hat < sqrt_phi:
        return _reduced_pair(b_hat, geom.phi0)
    if b_hat < 1.0:
        return sqrt_clamped((1.0 - b_hat) * (1.0 + b_hat))
    return 0.0


def alpha_one_ring_piecewise_negative(geom: ScaledGeometry, b_hat: float) -> float:
    """
    Semi-deflexión de un anillo para cargas negativas, por ramas
    con puntos críticos (1−â) < min((1−â)√Φ, 1) < 1.

    Si â < |φ₀|/2 la segunda rama llega hasta b̂ = 1 y la tercera queda vacía.

    Raises:
        RegimeError: si φ₀ ≥ 0
    """
    _one_ring(geom)
    if geom.phi0 >= 0:
        raise RegimeError("La forma para cargas negativas requiere φ₀ < 0")
    inner = 1.0 - geom.a_hat
    b_a = b_hat / inner

    if b_hat < inner:
        return _reduced_pair(b_hat, geom.phi0) - _reduced_pair(b_a, geom.phi0)
    if b_hat < min(inner * math.sqrt(geom.Phi), 1.0):
        turning = (1.0 - b_a) * (1.0 + b_a) - geom.phi0
        return _reduced_pair(b_hat, geom.phi0) + sqrt_clamped(turning)
    if b_hat < 1.0:
        return _reduced_pair(b_hat, geom.phi0)
    return 0.0


# =============================================================================
# EXTREMOS Y PROMEDIOS
# =============================================================================

def extrema(geom: ScaledGeometry) -> Extrema:
    """
    Ángulos máximo y mínimo de semi-deflexión para ambas cargas:
    α_max+ = √|φ₀|, α_min+ = |φ₀|/(2√(2â)) − √|φ₀|.
    """
    if geom.a_hat < MIN_A_HAT:
        raise InvalidInputError(f"â = {geom.a_hat!r} es demasiado pequeño para los extremos")
    strength = abs(geom.phi0)
    max_plus = math.sqrt(strength)
    min_plus = strength / (2.0 * math.sqrt(2.0 * geom.a_hat)) - max_plus
    return Extrema(
        alpha_max_plus=max_plus,
        alpha_min_plus=min_plus,
        alpha_max_minus=-min_plus,
        alpha_min_minus=-max_plus,
    )


def mean_reflection_rough(geom: ScaledGeometry) -> float:
    """χ₊ = 4√φ₀/3 (deflexión completa, no la mitad)."""
    if geom.phi0 <= 0:
        raise RegimeError("El promedio de reflexión requiere φ₀ > 0")
    return 4.0 * math.sqrt(geom.phi0) / 3.0


def _pow_three_halves(x: float) -> float:
    return x * math.sqrt(x) if x > 0 else 0.0


def _check_average_domain(geom: ScaledGeometry) -> None:
    if geom.phi0 < 0:
        raise RegimeError("El promedio de reflexión requiere φ₀ > 0")
    if not geom.d_hat > geom.a_hat > 0:
        raise InvalidInputError("El promedio de reflexión requiere d̂ > â > 0")


def mean_reflection_refined(geom: ScaledGeometry) -> float:
    """
    χ₊ = 2ᾱ₊ promediando la semi-deflexión sobre el período exterior.
    Las potencias 3/2 de argumentos negativos se anulan.
    """
    _check_average_domain(geom)
    phi0, a, d = geom.phi0, geom.a_hat, geom.d_hat
    total = (
        _pow_three_halves(phi0)
        + _pow_three_halves(2 * d + phi0)
        + _pow_three_halves(2 * d - 2 * a)
        - 2.0 * math.sqrt(2.0) * _pow_three_halves(d)
        - _pow_three_halves(2 * d - 2 * a + phi0)
        - _pow_three_halves(2 * a - 2 * d + phi0)
    )
    return 2.0 * total / (3.0 * d)


def _free_radicand(s: float, depth: float, phi: float) -> float:
    """1 − φ − (b̂/ρ)² con b̂ = 1 − s, ρ = 1 − depth."""
    rho = 1.0 - depth
    return ((s - depth) * (2.0 - depth - s) - phi * rho * rho) / (rho * rho)


def _pair_in_s(s: float, depth: float, phi0: float) -> float:
    free = _free_radicand(s, depth, 0.0)
    return _root_difference(free, free - phi0, phi0)


def _integrate_unit(integrand, lower: float, upper: float, scale_value: float) -> float:
    """∫ integrand(s) ds en [lower, upper] con variable normalizada a [0, 1] y valores divididos por scale_value."""
    width = upper - lower

    def normalized(x):
        return integrand(lower + x * width) / scale_value

    value, abserr = quad(normalized, 0.0, 1.0, epsabs=0.0, epsrel=1e-10, limit=200)
    if not math.isfinite(value) or abserr > 1e-8 * max(1.0, abs(value)):
        raise QuadratureError(f"La cuadratura no convergió (error estimado {abserr:.3e})")
    logger.debug("cuadratura en [%.6e, %.6e]: %.12e ± %.1e", lower, upper, value, abserr)
    return value * width * scale_value


def mean_reflection_numeric(geom: ScaledGeometry) -> float:
    """
    Misma media que `mean_reflection_refined`, integrando numéricamente las ramas
    del período exterior en lugar de usar la expresión cerrada.

    Raises:
        QuadratureError: si la cuadratura no alcanza la tolerancia
    """
    _check_average_domain(geom)
    phi0, a, d = geom.phi0, geom.a_hat, geom.d_hat
    if phi0 == 0:
        return 0.0

    sqrt_phi = math.sqrt(geom.Phi)
    # s = 1 − b̂; b̂ = √Φ corresponde a s = σ
    sigma = phi0 / (1.0 + sqrt_phi)
    scale_value = math.sqrt(phi0)

    def turning_in_ring(s):
        return _pair_in_s(s, 0.0, phi0)

    def crossing_ring(s):
        return (
            _pair_in_s(s, 0.0, phi0)
            - _pair_in_s(s, a, phi0)
            + sqrt_clamped(_free_radicand(s, d, 0.0))
        )

    i_two = _integrate_unit(turning_in_ring, sigma, sigma + a * sqrt_phi, scale_value)
    i_one = _integrate_unit(crossing_ring, sigma + a * sqrt_phi, sigma + d * sqrt_phi, scale_value)
    return 2.0 * (i_one + i_two) / (d * sqrt_phi)


def reflection_averages(geom: ScaledGeometry, numeric: bool = False) -> AverageAngles:
    """Promedios de reflexión en µrad y en unidades de θ_L = √|φ₀|."""
    rough = mean_reflection_rough(geom)
    refined = mean_reflection_refined(geom)
    theta_l = math.sqrt(abs(geom.phi0))
    return AverageAngles(
        chi_rough_urad=radianes_a_microrad(rough),
        chi_refined_urad=radianes_a_microrad(refined),
        chi_numeric_urad=radianes_a_microrad(mean_reflection_numeric(geom)) if numeric else None,
        theta_L_urad=radianes_a_microrad(theta_l),
        rough_in_theta_L=rough / theta_l,
        refined_in_theta_L=refined / theta_l,
    )


# =============================================================================
# BARRIDOS
# =============================================================================

def _alpha_for(b_hat: float, geom: ScaledGeometry, mode: DeflectionMode, disc: bool) -> float:
    if disc:
        return alpha_disc(geom, b_hat, mode)
    return math.fsum(_scan_walls(geom.walls(), b_hat, mode))


def sweep(
    geom: ScaledGeometry,
    b_min: float,
    b_max: float,
    count: int,
    mode: DeflectionMode = DeflectionMode.small_angle,
    refine: bool = False,
    disc: bool = False,
) -> DeflectionCurve:
    """
    Evalúa χ(b̂) en una malla uniforme de `count` puntos en [b_min, b_max].

    Con refine=True se agregan a la malla los puntos críticos del intervalo.
    Con disc=True se evalúa la curva de referencia del cilindro sólido.

    Raises:
        InvalidInputError: rango inválido o count < 2
    """
    if count < 2:
        raise InvalidInputError("El barrido requiere al menos 2 muestras")
    if not 0 <= b_min < b_max:
        raise InvalidInputError(f"Rango inválido: se requiere 0 ≤ b_min < b_max ({b_min}, {b_max})")
    if not orbiting_check(geom, 16):
        logger.warning("La geometría no cumple la condición de órbitas; la serie perturbativa puede no valer")

    grid = np.linspace(b_min, b_max, count)
    if refine:
        inside = [p for p in breakpoints(geom) if b_min < p < b_max]
        grid = np.union1d(grid, inside)

    logger.debug("barrido de %d muestras en modo %s", grid.size, mode.value)
    alphas = mapear_en_paralelo(
        partial(_alpha_for, geom=geom, mode=mode, disc=disc),
        grid.tolist(),
        settings.workers,
    )
    samples = [DeflectionSample.from_alpha(b, alpha) for b, alpha in zip(grid.tolist(), alphas)]
    return DeflectionCurve(geometry=geom, mode=mode, samples=samples)
