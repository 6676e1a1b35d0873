"""
Paquete principal de la aplicación de deflexión en anillos de cristal curvado.
Este módulo inicializa el paquete y expone los componentes principales.
"""

from .config import settings, get_settings
from .models import (
    BeamSpec,
    DeflectionCurve,
    DeflectionMode,
    DeflectionSample,
    RingPotentialSpec,
    ScaledGeometry,
)

__version__ = "1.0.0"

__all__ = [
    "settings",
    "get_settings",
    "BeamSpec",
    "DeflectionCurve",
    "DeflectionMode",
    "DeflectionSample",
    "RingPotentialSpec",
    "ScaledGeometry",
]
