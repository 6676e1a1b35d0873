"""
Paquete de routers de la API.
Contiene los endpoints organizados por recurso.
"""

from . import deflexion, experimentos, oraculo

__all__ = [
    "deflexion",
    "experimentos",
    "oraculo"
]
