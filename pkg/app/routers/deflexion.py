"""
Router de Deflexión.
Endpoints para barridos de la función de deflexión, extremos, promedios y condiciones.
"""

from fastapi import APIRouter

from app.models import AverageAngles, DeflectionCurve, Extrema
from app.schemas import AverageRequest, ConditionResponse, ConfigDocument, SweepRequest
from app.services.deflection_core import extrema, reflection_averages, sweep

router = APIRouter(
    prefix="/api/deflexion",
    tags=["Deflexión"]
)


@router.post("/barrido", response_model=DeflectionCurve)
def barrer_deflexion(peticion: SweepRequest):
    """
    Evalúa χ(b̂) en una malla uniforme.

    - **b_min**, **b_max**: rango de b̂
    - **samples**: cantidad de puntos
    - **mode**: exact, small_angle o reduced
    - **refine**: agrega los puntos críticos a la malla
    """
    return sweep(
        peticion.geometry(),
        peticion.b_min,
        peticion.b_max,
        peticion.samples,
        peticion.mode,
        refine=peticion.refine,
    )


@router.post("/disco", response_model=DeflectionCurve)
def barrer_disco(peticion: SweepRequest):
    """Curva de referencia del cilindro sólido con el mismo potencial."""
    return sweep(
        peticion.geometry(),
        peticion.b_min,
        peticion.b_max,
        peticion.samples,
        peticion.mode,
        refine=peticion.refine,
        disc=True,
    )


@router.post("/extremos", response_model=Extrema)
def obtener_extremos(peticion: ConfigDocument):
    """Ángulos máximo y mínimo (rad) para cargas positivas y negativas."""
    return extrema(peticion.geometry())


@router.post("/promedios", response_model=AverageAngles)
def obtener_promedios(peticion: AverageRequest):
    """
    Ángulos medios de reflexión en µrad.
    Requiere φ₀ > 0; con **numeric** agrega la media por cuadratura.
    """
    return reflection_averages(peticion.geometry(), numeric=peticion.numeric)


@router.post("/condicion", response_model=ConditionResponse)
def evaluar_condicion(peticion: ConfigDocument):
    """Condición de reflexión pura, condición de órbitas y régimen geométrico."""
    return ConditionResponse.from_geometry(peticion.geometry())
