"""
Servicio del modelo de cristal.
Convierte la geometría física a parámetros adimensionales y evalúa el potencial
rectangular de anillos y las condiciones de validez (reflexión, órbitas).
"""

import logging
import math
from typing import Tuple

import numpy as np

from app.exceptions import InvalidInputError
from app.models import BeamSpec, Regime, RingPotentialSpec, ScaledGeometry
from utils import EV_EN_GEV

logger = logging.getLogger(__name__)


def phi0_from_beam(crystal: RingPotentialSpec, beam: BeamSpec) -> float:
    """
    φ₀ = 2·U₀·E/(p∞c)² con U₀ convertido a GeV y el signo de la carga.
    Si el haz trae φ₀ directo se usa tal cual.
    """
    if beam.direct_phi0 is not None:
        return beam.direct_phi0
    u0_gev = crystal.potential_height_U0 * EV_EN_GEV
    return beam.charge_sign * 2.0 * u0_gev * beam.total_energy_E / beam.momentum_pc ** 2


def scale(crystal: RingPotentialSpec, beam: BeamSpec) -> ScaledGeometry:
    """
    Construye la geometría adimensionada: â = a/R, d̂ = d/R, φ₀.

    N·d < R ya lo garantiza RingPotentialSpec (pydantic.ValidationError al construirlo).

    Raises:
        InvalidInputError: si |φ₀| ≥ 1
    """
    phi0 = phi0_from_beam(crystal, beam)
    if not abs(phi0) < 1:
        raise InvalidInputError(f"|φ₀| debe ser menor que 1 (φ₀ = {phi0!r})")

    return ScaledGeometry(
        a_hat=crystal.plane_thickness_a / crystal.bend_radius_R,
        d_hat=crystal.period_d / crystal.bend_radius_R,
        plane_count_N=crystal.plane_count_N,
        phi0=phi0,
    )


def scaled_impact(geom: ScaledGeometry, b_hat: float, ring_index_i: int) -> Tuple[float, float]:
    """
    Parámetros de impacto relativos al anillo i: (b̂/(1−i·d̂), b̂/(1−â−i·d̂)).
    """
    if not 0 <= ring_index_i < geom.plane_count_N:
        raise InvalidInputError(
            f"Índice de anillo {ring_index_i} fuera de rango [0, {geom.plane_count_N})"
        )
    if b_hat < 0:
        raise InvalidInputError("b̂ debe ser no negativo")
    outer = 1.0 - ring_index_i * geom.d_hat
    return b_hat / outer, b_hat / (outer - geom.a_hat)


def potential_at(geom: ScaledGeometry, r_hat: float) -> float:
    """
    φ(r̂): φ₀ dentro de algún anillo [1−i·d̂−â, 1−i·d̂), 0 en otro caso.
    """
    if r_hat >= 1.0:
        return 0.0
    for i in range(geom.plane_count_N):
        outer = 1.0 - i * geom.d_hat
        if outer - geom.a_hat <= r_hat < outer:
            return geom.phi0
    return 0.0


def potential_profile(geom: ScaledGeometry, r_hat: np.ndarray) -> np.ndarray:
    """Versión vectorizada de `potential_at` sobre un arreglo de radios."""
    r_hat = np.asarray(r_hat, dtype=float)
    inside = np.zeros(r_hat.shape, dtype=bool)
    for i in range(geom.plane_count_N):
        outer = 1.0 - i * geom.d_hat
        inside |= (r_hat >= outer - geom.a_hat) & (r_hat < outer)
    return np.where(inside, geom.phi0, 0.0)


def reflection_condition(geom: ScaledGeometry) -> bool:
    """Verdadero si φ₀ > 2·d̂: desaparecen las regiones de refracción para cargas positivas."""
    return geom.phi0 > 2.0 * geom.d_hat


def orbiting_check(geom: ScaledGeometry, samples: int) -> bool:
    """
    Verifica que u(r̂) = r̂·√(1−φ(r̂)) no admita puntos de retorno múltiples.

    En las paredes el potencial es discontinuo, así que se comparan los valores
    de u a ambos lados de cada anillo; dentro de cada capa se muestrea u con
    `samples` puntos y se exige que no decrezca.

    Raises:
        InvalidInputError: si samples < 2
    """
    if samples < 2:
        raise InvalidInputError("orbiting_check requiere al menos 2 muestras por capa")

    sqrt_phi = math.sqrt(geom.Phi)
    walls = geom.walls()

    for i in range(geom.plane_count_N):
        outer = 1.0 - i * geom.d_hat
        inner = outer - geom.a_hat
        if geom.phi0 > 0 and sqrt_phi * outer < inner:
            logger.debug("u decrece a través del anillo %d (carga positiva)", i)
            return False
        if geom.phi0 < 0 and i >= 1:
            gap_top = 1.0 - (i - 1) * geom.d_hat - geom.a_hat
            if gap_top < sqrt_phi * outer:
                logger.debug("u decrece a través del hueco sobre el anillo %d (carga negativa)", i)
                return False

    # capas entre paredes consecutivas y el núcleo
    radii = [w.radius for w in walls]
    bounds = list(zip(radii[1:], radii[:-1])) + [(0.0, radii[-1])]
    for low, high in bounds:
        r = np.linspace(low, high, samples, endpoint=False)
        u = r * np.sqrt(1.0 - potential_profile(geom, r))
        if np.any(np.diff(u) < 0):
            return False
    return True


def regime(geom: ScaledGeometry) -> Regime:
    """
    Clasifica la geometría según el orden de d̂, â y |φ₀|/2.
    """
    half = abs(geom.phi0) / 2.0
    if half > geom.d_hat:
        return Regime.reflection
    if half > geom.a_hat:
        return Regime.intermediate
    return Regime.wide_planes


def breakpoints(geom: ScaledGeometry) -> Tuple[float, ...]:
    """
    Valores de b̂ donde una pared empieza o deja de alcanzarse o atravesarse:
    ρ·n_arriba y ρ·n_abajo de cada pared, más 1.
    """
    points = {1.0}
    for wall in geom.walls():
        points.add(wall.radius * math.sqrt(1.0 - wall.phi_above))
        points.add(wall.radius * math.sqrt(1.0 - wall.phi_below))
    return tuple(sorted(p for p in points if p > 0))
