"""
Router de Experimentos.
Endpoints para consultar los casos experimentales y el reporte de comparación.
"""

from typing import List

from fastapi import APIRouter

from app.exceptions import ReproductionError
from app.models import ComparisonReport, ExperimentCase
from app.services.experiments import builtin_cases, compare_report

router = APIRouter(
    prefix="/api/experimentos",
    tags=["Experimentos"]
)


@router.get("/", response_model=List[ExperimentCase])
def listar_experimentos():
    """Lista los cuatro casos experimentales incorporados."""
    return builtin_cases()


@router.get("/reporte", response_model=ComparisonReport)
def obtener_reporte():
    """Tabla medido vs estimado con las desviaciones relativas."""
    return compare_report(builtin_cases())


@router.get("/reproduccion", response_model=ComparisonReport)
def verificar_reproduccion():
    """
    Igual que el reporte, pero responde 500 si alguna estimación se aleja
    de los valores publicados más que la tolerancia.
    """
    report = compare_report(builtin_cases())
    if not report.reproduced:
        failed = ", ".join(row.name for row in report.rows if not row.reproduced)
        raise ReproductionError(f"Estimaciones fuera de tolerancia: {failed}")
    return report
