"""
Fixtures compartidas por las pruebas.
"""

import json
import os

os.environ.setdefault("ENVIRONMENT", "testing")

import pytest
from fastapi.testclient import TestClient

from app.models import ScaledGeometry


# =============================================================================
# GEOMETRÍAS
# =============================================================================

def make_geometry(phi0=1e-3, a_hat=1e-3, d_hat=4e-3, planes=1) -> ScaledGeometry:
    """Geometría escalada con valores exagerados para que los efectos sean visibles."""
    return ScaledGeometry(a_hat=a_hat, d_hat=d_hat, plane_count_N=planes, phi0=phi0)


@pytest.fixture(name="one_ring")
def one_ring_fixture():
    """Un anillo, φ₀ = 1e-3, â = 1e-3, d̂ = 4e-3 (régimen â > φ₀/2)."""
    return make_geometry()


@pytest.fixture(name="five_rings")
def five_rings_fixture():
    return make_geometry(planes=5)


@pytest.fixture(name="thick_ring")
def thick_ring_fixture():
    """Un anillo grueso con φ₀ = 0.02, â = 0.04, d̂ = 0.1."""
    return make_geometry(phi0=0.02, a_hat=0.04, d_hat=0.1)


# =============================================================================
# CONFIGURACIÓN Y CLIENTE
# =============================================================================

GEV_CONFIG = {
    "crystal": {"R_m": 0.33, "N": 1, "d_angstrom": 3.136, "a_angstrom": 0.78},
    "beam": {"phi0": 0.289e-7},
}

# R = 1 nm con d = 1 Å da d̂ = 0.1: un anillo "de juguete" con φ₀ grande
TOY_CONFIG = {
    "crystal": {"R_m": 1e-9, "N": 1, "d_angstrom": 1.0, "a_angstrom": 0.4},
    "beam": {"phi0": 0.02},
}


@pytest.fixture(name="gev_config")
def gev_config_fixture():
    return json.loads(json.dumps(GEV_CONFIG))


@pytest.fixture(name="write_config")
def write_config_fixture(tmp_path):
    """Escribe un documento de configuración y devuelve su ruta."""
    def _write(document, name="config.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document), encoding="utf-8")
        return str(path)
    return _write


@pytest.fixture(name="client")
def client_fixture():
    """
    Crea un cliente de pruebas de FastAPI.
    """
    from main import app

    with TestClient(app) as client:
        yield client
