"""
Router de Oráculos.
Endpoints para trazar trayectorias y verificar la forma cerrada contra el trazado de rayos.
"""

from fastapi import APIRouter

from app.models import OracleSummary
from app.schemas import TraceRequest, TraceResponse, VerificationRequest
from app.services.oracle import ray_trace, verify_against_trace

router = APIRouter(
    prefix="/api/oraculo",
    tags=["Oráculos"]
)


@router.post("/trazado", response_model=TraceResponse)
def trazar_rayo(peticion: TraceRequest):
    """
    Traza la trayectoria con parámetro de impacto **b_hat** y devuelve
    la deflexión y cada cruce de interfaz.
    """
    return TraceResponse.from_trace(ray_trace(peticion.geometry(), peticion.b_hat))


@router.post("/verificacion", response_model=OracleSummary)
def verificar_oraculo(peticion: VerificationRequest):
    """
    Compara la forma cerrada contra el trazado en **samples** valores de b̂.
    El resultado indica si la desviación máxima queda dentro de la tolerancia.
    """
    return verify_against_trace(
        peticion.geometry(),
        peticion.samples,
        peticion.mode,
        seed=peticion.seed,
    )
