"""
Servicio de oráculos.
Motores independientes de verificación de la función de deflexión:
trazado geométrico de rayos, cuadratura directa de la integral de deflexión
para trayectorias que atraviesan el núcleo, e integración de órbitas sobre
un potencial suavizado.
"""

import logging
import math
from functools import partial
from typing import Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from app.config import settings
from app.exceptions import InvalidInputError, OrbitingError, QuadratureError
from app.models import Crossing, DeflectionMode, OracleSummary, ScaledGeometry, TraceResult
from app.services.crystal_model import breakpoints
from app.services.deflection_core import chi_crystal
from utils import mapear_en_paralelo

logger = logging.getLogger(__name__)

# sen ψ₂ a menos de 1e-14 de 1 cuenta como retorno
TANGENTIAL_COS2 = 2e-14
BAND_FRACTION = 0.5


# =============================================================================
# TRAZADO DE RAYOS
# =============================================================================

def ray_trace(geom: ScaledGeometry, b_hat: float) -> TraceResult:
    """
    Traza la trayectoria como rayo en un medio de índice n = √(1−φ) por capas:
    cuerdas rectas dentro de cada capa y ley de Snell en cada interfaz circular,
    con reflexión total cuando el seno transmitido supera 1.

    Cada cuerda se describe por el invariante n·r̂·sen ψ = b̂, que se conserva
    exactamente: en la capa k la recta pasa a distancia b̂/n_k del centro y el
    ángulo polar barrido hasta el radio r̂ es atan2(√(n_k²r̂² − b̂²), b̂).
    """
    if b_hat < 0:
        raise InvalidInputError("b̂ debe ser no negativo")
    if b_hat >= 1.0:
        return TraceResult(b_hat=b_hat, crossings=(), turning_radius=None, chi=0.0)

    walls = geom.walls()
    radii = [wall.radius for wall in walls]
    # φ de la capa k: 0 afuera, luego el lado interior de cada pared
    phis = [0.0] + [wall.phi_below for wall in walls]
    core = len(walls)

    def radicand(layer: int, r: float) -> float:
        """n²r̂² − b̂² sin cancelación."""
        return (r - b_hat) * (r + b_hat) - phis[layer] * r * r

    def polar(layer: int, r: float) -> float:
        return math.atan2(math.sqrt(max(radicand(layer, r), 0.0)), b_hat)

    def cos2(layer: int, r: float) -> float:
        """cos² del ángulo de incidencia en la capa sobre el círculo r̂."""
        return radicand(layer, r) / ((1.0 - phis[layer]) * r * r)

    # los dos tramos en vacío hasta r̂ = 1
    chi = 2.0 * polar(0, radii[0])
    region, inward, position = 0, True, radii[0]
    turning: Optional[float] = None
    crossings = []

    while True:
        if inward:
            if region == core:
                chi -= 2.0 * polar(region, position)
                inward = False
                continue
            inner = radii[region]
            if cos2(region, inner) < TANGENTIAL_COS2:
                turning = b_hat / math.sqrt(1.0 - phis[region])
                chi -= 2.0 * polar(region, position)
                inward = False
                continue
            chi -= polar(region, position) - polar(region, inner)
            position = inner
            wall_index, target = region, region + 1
        else:
            if region == 0:
                break
            outer = radii[region - 1]
            chi -= polar(region, outer) - polar(region, position)
            position = outer
            wall_index, target = region - 1, region - 1

        rho = position
        n2_here = 1.0 - phis[region]
        incidence = math.atan2(b_hat, math.sqrt(max(radicand(region, rho), 0.0)))
        cos2_out = cos2(target, rho)

        if cos2_out < TANGENTIAL_COS2:
            inward = not inward
            transmitted = None
            turning = rho
        else:
            transmitted = math.atan2(b_hat, math.sqrt(radicand(target, rho)))
            region = target

        crossings.append(
            Crossing(
                radius=rho,
                incidence=incidence,
                transmitted=transmitted,
                interface=wall_index,
                invariant=math.sqrt(n2_here) * rho * math.sin(incidence),
            )
        )

    return TraceResult(
        b_hat=b_hat,
        crossings=tuple(crossings),
        turning_radius=turning,
        chi=chi,
    )


# =============================================================================
# CUADRATURA DIRECTA
# =============================================================================

def _sech(t: float) -> float:
    return 1.0 / math.cosh(t)


def core_limit(geom: ScaledGeometry) -> float:
    """Cota de b̂ por debajo de la cual el punto de retorno está en el núcleo vacío."""
    return (1.0 - geom.plane_count_N * geom.d_hat) * min(1.0, math.sqrt(geom.Phi))


def quad_deflection(geom: ScaledGeometry, b_hat: float, tolerance: Optional[float] = None) -> float:
    """
    Deflexión χ para trayectorias que atraviesan el núcleo, integrando numéricamente
    la forma sustraída capa por capa.

    En cada capa se sustituye n·r̂ = b̂·cosh t, que convierte el integrando en sech t
    sin singularidad en el extremo.

    Raises:
        InvalidInputError: si b̂ no penetra el núcleo o la tolerancia no es positiva
        QuadratureError: si no se alcanza la tolerancia
    """
    if tolerance is None:
        tolerance = settings.quad_tolerance
    if tolerance <= 0:
        raise InvalidInputError("La tolerancia de la cuadratura debe ser positiva")
    limit = core_limit(geom)
    if not 0 <= b_hat < limit:
        raise InvalidInputError(f"quad_deflection requiere 0 ≤ b̂ < {limit!r}")
    if b_hat == 0:
        return 0.0

    sqrt_phi = math.sqrt(geom.Phi)
    per_integral = tolerance / (8 * geom.plane_count_N)
    alpha = 0.0
    for i in range(geom.plane_count_N):
        outer = 1.0 - i * geom.d_hat
        inner = outer - geom.a_hat
        for n, sign in ((1.0, 1.0), (sqrt_phi, -1.0)):
            lower = math.acosh(n * inner / b_hat)
            upper = math.acosh(n * outer / b_hat)
            value, abserr = quad(_sech, lower, upper, epsabs=per_integral, epsrel=0.0, limit=200)
            if abserr > per_integral:
                raise QuadratureError(
                    f"Cuadratura del anillo {i} sin converger (error estimado {abserr:.3e})"
                )
            alpha += sign * value
    return 2.0 * alpha


# =============================================================================
# INTEGRACIÓN DE ÓRBITAS
# =============================================================================

def _smoothstep_slope(t: float) -> float:
    """dS/dt de la rampa quíntica S(t) = ½ + (15t − 10t³ + 3t⁵)/16 en |t| < 1."""
    one_minus = 1.0 - t * t
    return 15.0 * one_minus * one_minus / 16.0


def smoothed_potential_slope(geom: ScaledGeometry, r_hat: float, smoothing_eps: float) -> float:
    """
    dφ/dr̂ del potencial con cada pared reemplazada por una rampa simétrica
    de ancho ε centrada en la pared.
    """
    slope = 0.0
    for wall in geom.walls():
        t = 2.0 * (wall.radius - r_hat) / smoothing_eps
        if -1.0 < t < 1.0:
            jump = wall.phi_below - wall.phi_above
            slope -= jump * _smoothstep_slope(t) * 2.0 / smoothing_eps
    return slope


def ode_deflection(geom: ScaledGeometry, b_hat: float, smoothing_eps: float) -> float:
    """
    Deflexión χ integrando la órbita de velocidad unitaria (v² = 1 − φ) sobre el
    potencial suavizado, con aceleración −½·φ′(r̂)·r̂/|r̂|.

    El tramo recto de r̂ = 2 a r̂ = 1 + ε se propaga en forma cerrada. La convergencia
    en ε es más lenta para trayectorias rasantes a una pared.

    Raises:
        InvalidInputError: si ε no está en (0, â/4] o b̂ < 0
        OrbitingError: si la trayectoria no sale dentro de la longitud de arco máxima
    """
    if not 0 < smoothing_eps <= geom.a_hat / 4:
        raise InvalidInputError("smoothing_eps debe estar en (0, â/4]")
    if b_hat < 0:
        raise InvalidInputError("b̂ debe ser no negativo")

    launch = 1.0 + smoothing_eps
    if b_hat >= launch:
        return 0.0

    def rhs(_t, state):
        x, y, vx, vy = state
        r = math.hypot(x, y)
        if r == 0.0:
            return [vx, vy, 0.0, 0.0]
        factor = -0.5 * smoothed_potential_slope(geom, r, smoothing_eps) / r
        return [vx, vy, factor * x, factor * y]

    def exit_event(_t, state):
        return math.hypot(state[0], state[1]) - launch

    exit_event.terminal = True
    exit_event.direction = 1

    start = [-math.sqrt((launch - b_hat) * (launch + b_hat)), b_hat, 1.0, 0.0]
    solution = solve_ivp(
        rhs,
        (0.0, settings.ode_max_arc),
        start,
        method="DOP853",
        max_step=smoothing_eps / 2,
        rtol=settings.ode_rtol,
        atol=settings.ode_atol,
        events=exit_event,
    )
    if solution.status != 1 or not len(solution.t_events[0]):
        raise OrbitingError(
            f"La trayectoria con b̂ = {b_hat!r} no salió en longitud de arco {settings.ode_max_arc}"
        )
    vx, vy = solution.y_events[0][0][2:]
    logger.debug("órbita b̂=%.6f: %d evaluaciones", b_hat, solution.nfev)
    return math.atan2(vy, vx)


# =============================================================================
# VERIFICACIÓN POR LOTES
# =============================================================================

def sample_impact_parameters(
    geom: ScaledGeometry,
    samples: int,
    seed: Optional[int] = None,
    b_max: float = 1.1,
) -> np.ndarray:
    """
    Muestras de b̂ ordenadas: la mitad uniforme en [0, b_max], la otra mitad en la
    banda de anillos, todas a más de `breakpoint_margin` de cualquier punto crítico.
    """
    if samples < 1:
        raise InvalidInputError("Se requiere al menos una muestra")
    rng = np.random.default_rng(settings.random_seed if seed is None else seed)
    critical = np.asarray(breakpoints(geom))
    margin = settings.breakpoint_margin
    band_low = core_limit(geom)

    band_count = int(samples * BAND_FRACTION)
    uniform_count = samples - band_count

    def draw(count, low, high):
        accepted = np.empty(0)
        while accepted.size < count:
            candidates = rng.uniform(low, high, count - accepted.size)
            index = np.clip(np.searchsorted(critical, candidates), 1, critical.size - 1)
            distance = np.minimum(
                np.abs(candidates - critical[index - 1]),
                np.abs(candidates - critical[index]),
            )
            accepted = np.concatenate([accepted, candidates[distance > margin]])
        return accepted

    values = np.concatenate([draw(uniform_count, 0.0, b_max), draw(band_count, band_low, 1.0)])
    return np.sort(values)


def _deviation_at(b_hat: float, geom: ScaledGeometry, mode: DeflectionMode) -> float:
    return abs(chi_crystal(geom, b_hat, mode).chi - ray_trace(geom, b_hat).chi)


def verify_against_trace(
    geom: ScaledGeometry,
    samples: int,
    mode: DeflectionMode = DeflectionMode.exact,
    tolerance: Optional[float] = None,
    seed: Optional[int] = None,
) -> OracleSummary:
    """
    Compara χ de la forma cerrada contra el trazado de rayos en `samples` valores de b̂.
    Los modos aproximados se reportan como informativos y nunca fallan.
    """
    if tolerance is None:
        tolerance = settings.oracle_tolerance
    b_values = sample_impact_parameters(geom, samples, seed).tolist()
    deviations = mapear_en_paralelo(
        partial(_deviation_at, geom=geom, mode=mode),
        b_values,
        settings.workers,
    )
    worst = int(np.argmax(deviations))
    logger.debug(
        "oráculo %s: %d muestras, desviación media %.3e, máxima %.3e en b̂=%.17g",
        mode.value, len(b_values), float(np.mean(deviations)), deviations[worst], b_values[worst],
    )
    return OracleSummary(
        mode=mode,
        samples=len(b_values),
        max_deviation=float(deviations[worst]),
        worst_b_hat=b_values[worst],
        tolerance=tolerance,
        informational=mode is not DeflectionMode.exact,
    )
