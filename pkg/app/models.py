"""
Modelos de datos del dominio usando Pydantic.
Define los tipos físicos (cristal, haz), los adimensionales (geometría escalada)
y los resultados (muestras de deflexión, extremos, trazados, casos experimentales).
Todos los modelos son inmutables una vez construidos.
"""

from dataclasses import dataclass
from enum import Enum
from typing import List, Literal, NamedTuple, Optional

from pydantic import BaseModel, ConfigDict, Field, computed_field, field_validator, model_validator


class DeflectionMode(str, Enum):
    """Cadena de fórmulas usada para evaluar cada pared."""

    exact = "exact"
    small_angle = "small_angle"
    reduced = "reduced"


class Regime(str, Enum):
    """Variantes de la curva de deflexión según el orden de d̂, â y |φ₀|/2."""

    wide_planes = "wide_planes"
    intermediate = "intermediate"
    reflection = "reflection"


# =============================================================================
# MODELOS FÍSICOS
# =============================================================================

class RingPotentialSpec(BaseModel):
    """
    Sistema periódico de anillos rectangulares.
    Longitudes en metros, altura del potencial en electronvoltios (con signo).
    """

    bend_radius_R: float = Field(gt=0, description="Radio de curvatura R (m)")
    plane_count_N: int = Field(ge=1, description="Número de planos N")
    period_d: float = Field(gt=0, description="Distancia interplanar d (m)")
    plane_thickness_a: float = Field(gt=0, description="Espesor del plano a (m)")
    potential_height_U0: float = Field(default=0.0, description="Altura U₀ (eV)")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_geometry(self):
        """Valida 0 < a < d y N·d < R"""
        if self.plane_thickness_a >= self.period_d:
            raise ValueError("El espesor a debe ser menor que el periodo d")
        if self.plane_count_N * self.period_d >= self.bend_radius_R:
            raise ValueError("El espesor del cristal N·d debe ser menor que R")
        return self


class BeamSpec(BaseModel):
    """
    Haz de partículas: energía total y momento en GeV, signo de la carga.
    `direct_phi0` sustituye el cálculo de φ₀ a partir de (E, pc, U₀).
    """

    total_energy_E: Optional[float] = Field(default=None, gt=0, description="Energía total E (GeV)")
    momentum_pc: Optional[float] = Field(default=None, gt=0, description="Momento p∞c (GeV)")
    charge_sign: Literal[1, -1] = Field(default=1, description="Signo de la carga")
    direct_phi0: Optional[float] = Field(default=None, description="φ₀ directo (con signo)")

    model_config = ConfigDict(frozen=True)

    @field_validator("direct_phi0")
    @classmethod
    def validate_direct_phi0(cls, phi0: Optional[float]):
        if phi0 is not None and abs(phi0) >= 1:
            raise ValueError("|φ₀| debe ser menor que 1")
        return phi0

    @model_validator(mode="after")
    def validate_kinematics(self):
        """Exige E ≥ pc > 0 cuando φ₀ se calcula a partir de la cinemática"""
        if self.direct_phi0 is None and (self.total_energy_E is None or self.momentum_pc is None):
            raise ValueError("Sin φ₀ directo se requieren total_energy_E y momentum_pc")
        if self.total_energy_E is not None and self.momentum_pc is not None:
            if self.total_energy_E < self.momentum_pc:
                raise ValueError("La energía total no puede ser menor que p∞c")
        return self


# =============================================================================
# GEOMETRÍA ESCALADA
# =============================================================================

class Wall(NamedTuple):
    """Pared de un anillo: radio escalado y φ a cada lado."""

    radius: float
    phi_above: float
    phi_below: float
    ring_index: int
    outer: bool


class ScaledGeometry(BaseModel):
    """
    Parámetros adimensionales â = a/R, d̂ = d/R, N y φ₀ (Φ = 1 − φ₀).
    Es lo único que consumen los módulos de cálculo.
    """

    a_hat: float = Field(gt=0, description="â = a/R")
    d_hat: float = Field(gt=0, description="d̂ = d/R")
    plane_count_N: int = Field(ge=1, description="Número de anillos")
    phi0: float = Field(description="φ₀ = 2U₀E/(p∞c)² con signo")

    model_config = ConfigDict(frozen=True)

    @computed_field
    @property
    def Phi(self) -> float:
        return 1.0 - self.phi0

    @field_validator("phi0")
    @classmethod
    def validate_phi0(cls, phi0: float):
        if abs(phi0) >= 1:
            raise ValueError("|φ₀| debe ser menor que 1")
        return phi0

    @model_validator(mode="after")
    def validate_ratios(self):
        """Valida â < d̂ y N·d̂ < 1"""
        if self.a_hat >= self.d_hat:
            raise ValueError("â debe ser menor que d̂")
        if self.plane_count_N * self.d_hat >= 1:
            raise ValueError("N·d̂ debe ser menor que 1")
        return self

    def walls(self) -> List[Wall]:
        """Paredes ordenadas de afuera hacia adentro (exterior e interior de cada anillo)."""
        result = []
        for i in range(self.plane_count_N):
            outer = 1.0 - i * self.d_hat
            result.append(Wall(outer, 0.0, self.phi0, i, True))
            result.append(Wall(outer - self.a_hat, self.phi0, 0.0, i, False))
        return result


# =============================================================================
# RESULTADOS DE DEFLEXIÓN
# =============================================================================

class DeflectionSample(BaseModel):
    """
    Muestra de la función de deflexión: χ = 2α.
    χ > 0 es reflexión (lejos de la curvatura), χ < 0 refracción.
    """

    b_hat: float = Field(ge=0, description="Parámetro de impacto escalado")
    alpha: float = Field(description="Semi-deflexión α (rad)")
    chi: float = Field(description="Deflexión total χ (rad)")

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_chi(self):
        if self.chi != 2.0 * self.alpha:
            raise ValueError("χ debe ser exactamente 2α")
        return self

    @classmethod
    def from_alpha(cls, b_hat: float, alpha: float) -> "DeflectionSample":
        return cls(b_hat=b_hat, alpha=alpha, chi=2.0 * alpha)


class DeflectionCurve(BaseModel):
    """Muestras ordenadas (b̂ estrictamente creciente) para reproducir las figuras."""

    geometry: ScaledGeometry
    mode: DeflectionMode = DeflectionMode.small_angle
    samples: List[DeflectionSample]

    model_config = ConfigDict(frozen=True)

    @field_validator("samples")
    @classmethod
    def validate_order(cls, samples: List[DeflectionSample]):
        for previous, current in zip(samples, samples[1:]):
            if current.b_hat <= previous.b_hat:
                raise ValueError("Las muestras deben tener b̂ estrictamente creciente")
        return samples


class Extrema(BaseModel):
    """Ángulos máximo y mínimo para cargas positivas (+) y negativas (−)."""

    alpha_max_plus: float
    alpha_min_plus: float
    alpha_max_minus: float
    alpha_min_minus: float

    model_config = ConfigDict(frozen=True)

    @model_validator(mode="after")
    def validate_symmetry(self):
        if self.alpha_max_plus != -self.alpha_min_minus or self.alpha_min_plus != -self.alpha_max_minus:
            raise ValueError("Los extremos deben ser antisimétricos entre cargas")
        return self


class AverageAngles(BaseModel):
    """Ángulos medios de reflexión χ₊ en µrad y en unidades de θ_L = √|φ₀|."""

    chi_rough_urad: float
    chi_refined_urad: float
    chi_numeric_urad: Optional[float] = None
    theta_L_urad: float
    rough_in_theta_L: float
    refined_in_theta_L: float


# =============================================================================
# ORÁCULOS
# =============================================================================

@dataclass(frozen=True, slots=True)
class Crossing:
    """
    Encuentro del rayo con una interfaz circular.
    `transmitted` es None cuando hubo reflexión total.
    """

    radius: float
    incidence: float
    transmitted: Optional[float]
    interface: int
    invariant: float


@dataclass(frozen=True, slots=True)
class TraceResult:
    """Trazado geométrico de una trayectoria; `turning_radius` es None si entra al núcleo vacío."""

    b_hat: float
    crossings: tuple
    turning_radius: Optional[float]
    chi: float


class OracleSummary(BaseModel):
    """Resumen de la comparación fórmula cerrada vs trazado de rayos."""

    mode: DeflectionMode
    samples: int = Field(ge=1)
    max_deviation: float = Field(ge=0)
    worst_b_hat: float
    tolerance: float
    informational: bool = False

    @computed_field
    @property
    def passed(self) -> bool:
        return self.informational or self.max_deviation <= self.tolerance


# =============================================================================
# EXPERIMENTOS
# =============================================================================

class ExperimentCase(BaseModel):
    """Configuración haz + cristal con el ángulo medido y las predicciones publicadas (µrad)."""

    name: str = Field(min_length=1)
    beam_energy_GeV: float = Field(gt=0)
    orientation: str
    crystal: RingPotentialSpec
    beam: BeamSpec
    measured_chi_urad: Optional[float] = None
    measured_sigma_urad: Optional[float] = Field(default=None, ge=0)
    quoted_refined_urad: float
    quoted_rough_urad: float

    model_config = ConfigDict(frozen=True)


class Prediction(BaseModel):
    """Promedios de reflexión recalculados (µrad)."""

    chi_rough_urad: float
    chi_refined_urad: float


class ComparisonRow(BaseModel):
    """Fila del reporte medido vs predicho."""

    name: str
    measured_urad: Optional[float]
    sigma_urad: Optional[float]
    rough_urad: float
    refined_urad: float
    rough_deviation: Optional[float] = Field(description="(estimado − medido)/medido")
    refined_deviation: Optional[float] = Field(description="(estimado − medido)/medido")
    quoted_rough_urad: float
    quoted_refined_urad: float
    reproduced: bool


class ComparisonReport(BaseModel):
    """Tabla completa de comparación, en el orden de los casos de entrada."""

    rows: List[ComparisonRow] = Field(default_factory=list)
    tolerance: float

    @computed_field
    @property
    def reproduced(self) -> bool:
        return all(row.reproduced for row in self.rows)
