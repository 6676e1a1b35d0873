"""
Esquemas Pydantic para validación y serialización de datos.
Estos esquemas se usan en la CLI y en los endpoints de la API para:
- Leer el documento de configuración (cristal + haz)
- Validar los parámetros de cada operación (request)
- Serializar los resultados (response)
"""

from pathlib import Path
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator

from app.config import settings
from app.exceptions import InvalidInputError
from app.models import BeamSpec, DeflectionMode, Regime, RingPotentialSpec, ScaledGeometry, TraceResult
from app.services.crystal_model import orbiting_check, reflection_condition, regime, scale
from utils import angstrom_a_metros

# =============================================================================
# DOCUMENTO DE CONFIGURACIÓN
# =============================================================================


class CrystalConfig(BaseModel):
    """
    Geometría del cristal. R en metros, d y a en angstroms.
    """
    R_m: float = Field(gt=0, description="Radio de curvatura (m)")
    N: int = Field(ge=1, description="Número de planos")
    d_angstrom: float = Field(gt=0, description="Distancia interplanar (Å)")
    a_angstrom: float = Field(gt=0, description="Espesor del plano (Å)")

    model_config = ConfigDict(extra="forbid")


class BeamConfig(BaseModel):
    """
    Haz: o bien {"phi0"} directo, o bien {"U0_eV", "E_GeV", "pc_GeV", "charge_sign"}.
    Con phi0 directo, un charge_sign explícito fija el signo: φ₀ ← signo·|φ₀|.
    """
    phi0: Optional[float] = Field(None, description="φ₀ directo con signo")
    U0_eV: Optional[float] = Field(None, description="Altura del potencial (eV)")
    E_GeV: Optional[float] = Field(None, gt=0, description="Energía total (GeV)")
    pc_GeV: Optional[float] = Field(None, gt=0, description="Momento p∞c (GeV)")
    charge_sign: Literal[1, -1] = 1

    model_config = ConfigDict(extra="forbid")

    @model_validator(mode="after")
    def validate_source(self):
        """Exige exactamente una fuente de φ₀"""
        kinematic = [self.U0_eV, self.E_GeV, self.pc_GeV]
        if self.phi0 is not None:
            if any(value is not None for value in kinematic):
                raise ValueError("Use phi0 o (U0_eV, E_GeV, pc_GeV), no ambos")
            if "charge_sign" in self.model_fields_set:
                self.phi0 = self.charge_sign * abs(self.phi0)
        elif any(value is None for value in kinematic):
            raise ValueError("Sin phi0 se requieren U0_eV, E_GeV y pc_GeV")
        return self


class ConfigDocument(BaseModel):
    """Documento JSON completo: {"crystal": {...}, "beam": {...}}."""
    crystal: CrystalConfig
    beam: BeamConfig

    model_config = ConfigDict(
        json_schema_extra={
            "example": {
                "crystal": {"R_m": 0.33, "N": 1, "d_angstrom": 3.136, "a_angstrom": 0.78},
                "beam": {"phi0": 0.289e-7},
            }
        }
    )

    def to_crystal(self) -> RingPotentialSpec:
        return RingPotentialSpec(
            bend_radius_R=self.crystal.R_m,
            plane_count_N=self.crystal.N,
            period_d=angstrom_a_metros(self.crystal.d_angstrom),
            plane_thickness_a=angstrom_a_metros(self.crystal.a_angstrom),
            potential_height_U0=self.beam.U0_eV or 0.0,
        )

    def to_beam(self) -> BeamSpec:
        return BeamSpec(
            total_energy_E=self.beam.E_GeV,
            momentum_pc=self.beam.pc_GeV,
            charge_sign=self.beam.charge_sign,
            direct_phi0=self.beam.phi0,
        )

    def geometry(self) -> ScaledGeometry:
        return scale(self.to_crystal(), self.to_beam())


def load_config(path: str) -> ConfigDocument:
    """
    Lee y valida el documento de configuración.

    Raises:
        OSError: si el archivo no se puede leer
        InvalidInputError: si el archivo no está en UTF-8
        pydantic.ValidationError: si el JSON o sus valores no son válidos
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise InvalidInputError(f"{path}: el archivo no está en UTF-8 ({exc.reason})") from exc
    return ConfigDocument.model_validate_json(text)


# =============================================================================
# ESQUEMAS DE PETICIÓN
# =============================================================================

class SweepRequest(ConfigDocument):
    """Barrido de la función de deflexión en b̂."""
    b_min: float = Field(default_factory=lambda: settings.default_b_min, ge=0)
    b_max: float = Field(default_factory=lambda: settings.default_b_max, gt=0)
    samples: int = Field(default_factory=lambda: settings.default_samples, ge=2, le=1_000_000)
    mode: DeflectionMode = DeflectionMode.small_angle
    refine: bool = False

    @model_validator(mode="after")
    def validate_range(self):
        if self.b_min >= self.b_max:
            raise ValueError("b_min debe ser menor que b_max")
        return self


class AverageRequest(ConfigDocument):
    numeric: bool = Field(False, description="Agregar la media por cuadratura")


class TraceRequest(ConfigDocument):
    b_hat: float = Field(ge=0, description="Parámetro de impacto escalado")


class VerificationRequest(ConfigDocument):
    samples: int = Field(default=1000, ge=1, le=100_000)
    mode: DeflectionMode = DeflectionMode.exact
    seed: Optional[int] = None


# =============================================================================
# ESQUEMAS DE RESPUESTA
# =============================================================================

class ConditionResponse(BaseModel):
    """Veredictos de validez de la geometría."""
    reflection_condition: bool
    orbiting_ok: bool
    regime: Regime
    phi0: float
    two_d_hat: float

    @classmethod
    def from_geometry(cls, geom: ScaledGeometry, samples: int = 16) -> "ConditionResponse":
        return cls(
            reflection_condition=reflection_condition(geom),
            orbiting_ok=orbiting_check(geom, samples),
            regime=regime(geom),
            phi0=geom.phi0,
            two_d_hat=2.0 * geom.d_hat,
        )


class CrossingRead(BaseModel):
    radius: float
    incidence: float
    transmitted: Optional[float]
    interface: int
    invariant: float

    model_config = ConfigDict(from_attributes=True)


class TraceResponse(BaseModel):
    b_hat: float
    chi: float
    turning_radius: Optional[float]
    crossings: List[CrossingRead]

    @classmethod
    def from_trace(cls, trace: TraceResult) -> "TraceResponse":
        return cls(
            b_hat=trace.b_hat,
            chi=trace.chi,
            turning_radius=trace.turning_radius,
            crossings=[CrossingRead.model_validate(c) for c in trace.crossings],
        )
