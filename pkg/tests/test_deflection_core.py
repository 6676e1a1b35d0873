"""
Tests de la función de deflexión en forma cerrada.
"""

import math

import numpy as np
import pytest
from scipy.integrate import trapezoid

from app.config import settings
from app.exceptions import InvalidInputError, RegimeError
from app.models import DeflectionMode
from app.services.crystal_model import breakpoints, scale
from app.services.deflection_core import (
    alpha_disc,
    alpha_one_ring_piecewise_negative,
    alpha_one_ring_piecewise_positive,
    alpha_ring_exact,
    alpha_ring_reduced,
    alpha_ring_small,
    chi_crystal,
    extrema,
    mean_reflection_numeric,
    mean_reflection_refined,
    mean_reflection_rough,
    reflection_averages,
    sqrt_clamped,
    sweep,
)
from app.services.experiments import builtin_cases
from tests.conftest import make_geometry


def away_from_breakpoints(geom, b_values, margin=1e-9):
    critical = np.asarray(breakpoints(geom))
    return [b for b in b_values if np.min(np.abs(critical - b)) > margin]


# =============================================================================
# TÉRMINOS POR ANILLO
# =============================================================================

class TestRingTerms:
    """Tests para los términos por anillo y la suma del cristal."""

    def test_sqrt_clamped(self):
        assert sqrt_clamped(4.0) == 2.0
        assert sqrt_clamped(-1e-3) == 0.0

    @pytest.mark.parametrize("mode", list(DeflectionMode))
    def test_fuera_del_cristal_es_cero(self, five_rings, mode):
        for b_hat in (1.0, 1.05, 3.0):
            assert chi_crystal(five_rings, b_hat, mode).chi == 0.0

    @pytest.mark.parametrize("mode", list(DeflectionMode))
    def test_sin_potencial_es_cero(self, mode):
        geom = make_geometry(phi0=0.0, planes=5)
        for b_hat in np.linspace(0.0, 1.1, 57):
            assert chi_crystal(geom, float(b_hat), mode).chi == 0.0

    def test_impacto_central_es_cero(self, five_rings):
        assert chi_crystal(five_rings, 0.0, DeflectionMode.exact).chi == 0.0

    def test_chi_es_el_doble_de_alpha(self, five_rings):
        sample = chi_crystal(five_rings, 0.9971)
        assert sample.chi == 2 * sample.alpha

    def test_un_anillo_coincide_con_alpha_exacto(self, one_ring):
        for b_hat in np.linspace(0.0, 1.0, 41):
            expected = 2 * alpha_ring_exact(one_ring, float(b_hat), 0)
            assert chi_crystal(one_ring, float(b_hat), DeflectionMode.exact).chi == expected

    def test_suma_sobre_anillos(self, five_rings):
        b_hat = 0.9925
        for mode, term in (
            (DeflectionMode.exact, alpha_ring_exact),
            (DeflectionMode.small_angle, alpha_ring_small),
            (DeflectionMode.reduced, alpha_ring_reduced),
        ):
            total = sum(term(five_rings, b_hat, i) for i in range(5))
            assert chi_crystal(five_rings, b_hat, mode).alpha == pytest.approx(total, abs=1e-16)

    def test_pared_reflectante_es_arccos(self, one_ring):
        """Sobre la pared exterior sin atravesarla: α = arccos(b̂)"""
        for b_hat in (0.99955, 0.9998, 0.99999):
            assert alpha_ring_exact(one_ring, b_hat, 0) == pytest.approx(math.acos(b_hat), rel=1e-10)

    def test_angulos_pequenos_aproxima_al_exacto(self, one_ring):
        sqrt_phi = math.sqrt(one_ring.Phi)
        for b_hat in away_from_breakpoints(one_ring, np.linspace(sqrt_phi, 1.0, 201)):
            small = alpha_ring_small(one_ring, b_hat, 0)
            exact = alpha_ring_exact(one_ring, b_hat, 0)
            assert abs(exact - small) <= abs(small) ** 3

    def test_indice_fuera_de_rango(self, one_ring):
        with pytest.raises(InvalidInputError):
            alpha_ring_exact(one_ring, 0.5, 3)

    def test_impacto_negativo(self, one_ring):
        with pytest.raises(InvalidInputError):
            chi_crystal(one_ring, -0.1)


class TestDisc:

    def test_solo_la_pared_exterior(self, five_rings):
        b_hat = 0.5
        expected = math.sqrt(1 - b_hat**2) - math.sqrt(five_rings.Phi - b_hat**2)
        assert alpha_disc(five_rings, b_hat, DeflectionMode.reduced) == pytest.approx(expected, rel=1e-12)

    def test_disco_refleja_positivo(self, one_ring):
        assert alpha_disc(one_ring, 0.3) > 0


# =============================================================================
# RAMAS DE UN ANILLO
# =============================================================================

class TestPiecewise:
    """La suma por paredes en modo reducido reproduce las formas por ramas."""

    @pytest.mark.parametrize(
        "phi0, a_hat, d_hat",
        [(1e-3, 1e-3, 4e-3), (0.02, 0.004, 0.01)],
        ids=["planos_anchos", "reflexion"],
    )
    def test_positiva(self, phi0, a_hat, d_hat):
        geom = make_geometry(phi0=phi0, a_hat=a_hat, d_hat=d_hat)
        for b_hat in away_from_breakpoints(geom, np.linspace(0.0, 1.05, 2101), margin=1e-6):
            expected = alpha_one_ring_piecewise_positive(geom, b_hat)
            assert alpha_ring_reduced(geom, b_hat, 0) == pytest.approx(expected, rel=0, abs=1e-12)

    @pytest.mark.parametrize(
        "phi0, a_hat, d_hat",
        [(-1e-3, 1e-3, 4e-3), (-0.02, 0.004, 0.01)],
        ids=["planos_anchos", "reflexion"],
    )
    def test_negativa(self, phi0, a_hat, d_hat):
        geom = make_geometry(phi0=phi0, a_hat=a_hat, d_hat=d_hat)
        for b_hat in away_from_breakpoints(geom, np.linspace(0.0, 1.05, 2101), margin=1e-6):
            expected = alpha_one_ring_piecewise_negative(geom, b_hat)
            assert alpha_ring_reduced(geom, b_hat, 0) == pytest.approx(expected, rel=0, abs=1e-12)

    def test_negativa_sin_tercera_rama(self):
        """Con â < |φ₀|/2 la segunda rama se extiende hasta b̂ = 1"""
        geom = make_geometry(phi0=-0.02, a_hat=0.004, d_hat=0.01)
        b_hat = 0.9999
        b_a = b_hat / (1 - geom.a_hat)
        expected = (
            math.sqrt(1 - b_hat**2)
            - math.sqrt(1 - b_hat**2 - geom.phi0)
            + math.sqrt(1 - b_a**2 - geom.phi0)
        )
        assert alpha_one_ring_piecewise_negative(geom, b_hat) == pytest.approx(expected, rel=1e-9)

    def test_signo_equivocado(self):
        with pytest.raises(RegimeError):
            alpha_one_ring_piecewise_positive(make_geometry(phi0=-1e-3), 0.5)
        with pytest.raises(RegimeError):
            alpha_one_ring_piecewise_negative(make_geometry(phi0=1e-3), 0.5)

    def test_phi0_cero(self):
        geom = make_geometry(phi0=0.0)
        with pytest.raises(RegimeError):
            alpha_one_ring_piecewise_positive(geom, 0.5)
        with pytest.raises(RegimeError):
            alpha_one_ring_piecewise_negative(geom, 0.5)

    def test_requiere_un_anillo(self, five_rings):
        with pytest.raises(InvalidInputError):
            alpha_one_ring_piecewise_positive(five_rings, 0.5)


# =============================================================================
# DISCONTINUIDADES Y SIGNOS
# =============================================================================

class TestCurveShape:

    def test_salto_en_incidencia_rasante_positiva(self, one_ring):
        """Al dejar de alcanzar la pared interior χ salta 2·arccos(√Φ)"""
        glancing = math.sqrt(one_ring.Phi) * (1 - one_ring.a_hat)
        below = chi_crystal(one_ring, glancing - 1e-14, DeflectionMode.exact).chi
        above = chi_crystal(one_ring, glancing + 1e-14, DeflectionMode.exact).chi
        assert below - above == pytest.approx(-2 * math.acos(math.sqrt(one_ring.Phi)), rel=1e-4)

    def test_salto_en_incidencia_rasante_negativa(self):
        geom = make_geometry(phi0=-1e-3)
        below = chi_crystal(geom, 1 - 1e-14, DeflectionMode.exact).chi
        above = chi_crystal(geom, 1.0, DeflectionMode.exact).chi
        assert above == 0.0
        assert below == pytest.approx(-2 * math.acos(1 / math.sqrt(geom.Phi)), rel=1e-4)

    def test_continua_fuera_de_los_saltos(self, one_ring):
        glancing = math.sqrt(one_ring.Phi) * (1 - one_ring.a_hat)

        def max_step(count):
            curve = sweep(one_ring, 0.0, 1.1, count, DeflectionMode.exact)
            b_hat = np.array([s.b_hat for s in curve.samples])
            chi = np.array([s.chi for s in curve.samples])
            straddles = (b_hat[:-1] < glancing) & (b_hat[1:] > glancing)
            return np.max(np.abs(np.diff(chi))[~straddles])

        assert max_step(100_000) < 0.7 * max_step(10_000)

    def test_nucleo_vacio_refracta(self, five_rings):
        for b_hat in np.linspace(0.01, 0.979, 50):
            assert chi_crystal(five_rings, float(b_hat), DeflectionMode.exact).chi < 0

    @pytest.mark.parametrize("planes", [1, 5])
    @pytest.mark.parametrize("phi0", [1e-3, -1e-3])
    def test_signo_en_el_nucleo(self, planes, phi0):
        """Un potencial repulsivo atrae a las trayectorias que cruzan el núcleo, y viceversa"""
        geom = make_geometry(phi0=phi0, planes=planes)
        limit = (1 - planes * geom.d_hat) * min(1.0, math.sqrt(geom.Phi))
        for b_hat in np.linspace(0.0, limit, 1000, endpoint=False):
            chi = chi_crystal(geom, float(b_hat), DeflectionMode.exact).chi
            assert chi * phi0 <= 0

    def test_regiones_de_refraccion_por_periodo(self):
        geom = make_geometry(phi0=2e-3, planes=5)
        sqrt_phi = math.sqrt(geom.Phi)
        for i in range(4):
            low = 1 - (i + 1) * geom.d_hat
            high = sqrt_phi * (1 - i * geom.d_hat - geom.a_hat)
            assert low < high
            assert chi_crystal(geom, (low + high) / 2).chi < 0

    def test_desaparece_la_refraccion(self):
        """Con φ₀ > 2d̂ toda la banda de anillos refleja"""
        geom = make_geometry(phi0=0.016, planes=5)
        curve = sweep(geom, 0.98, 1.0, 2001)
        assert all(sample.chi > 0 for sample in curve.samples[:-1])
        assert curve.samples[-1].chi == 0.0


# =============================================================================
# EXTREMOS
# =============================================================================

class TestExtrema:

    def test_valores(self):
        result = extrema(make_geometry(phi0=1e-6))
        assert result.alpha_max_plus == pytest.approx(1e-3)
        assert result.alpha_min_plus == pytest.approx(1e-6 / (2 * math.sqrt(2e-3)) - 1e-3)

    def test_antisimetria(self):
        plus = extrema(make_geometry(phi0=1e-6))
        minus = extrema(make_geometry(phi0=-1e-6))
        assert plus == minus
        assert plus.alpha_max_minus == -plus.alpha_min_plus
        assert plus.alpha_min_minus == -plus.alpha_max_plus

    def test_maximo_alcanzado(self):
        geom = make_geometry(phi0=1e-6)
        center = math.sqrt(geom.Phi)
        curve = sweep(geom, center - 5e-12, center + 5e-12, 101, DeflectionMode.reduced)
        peak = max(curve.samples, key=lambda sample: sample.alpha)
        step = 1e-11 / 100
        assert peak.alpha == pytest.approx(extrema(geom).alpha_max_plus, rel=1e-6)
        assert abs(peak.b_hat - center) <= step * 1.01

    def test_minimo_alcanzado(self):
        geom = make_geometry(phi0=1e-6)
        glancing = math.sqrt(geom.Phi) * (1 - geom.a_hat)
        value = chi_crystal(geom, glancing - 1e-14, DeflectionMode.reduced).alpha
        assert value == pytest.approx(extrema(geom).alpha_min_plus, rel=1e-3)

    def test_extremos_negativos_alcanzados(self):
        geom = make_geometry(phi0=-1e-6)
        result = extrema(geom)
        at_inner = chi_crystal(geom, 1 - geom.a_hat, DeflectionMode.reduced).alpha
        near_edge = chi_crystal(geom, 1 - 1e-15, DeflectionMode.reduced).alpha
        assert at_inner == pytest.approx(result.alpha_max_minus, rel=1e-3)
        assert near_edge == pytest.approx(result.alpha_min_minus, rel=1e-3)

    def test_espesor_demasiado_chico(self):
        with pytest.raises(InvalidInputError):
            extrema(make_geometry(a_hat=1e-16, d_hat=1e-3))


# =============================================================================
# PROMEDIOS DE REFLEXIÓN
# =============================================================================

class TestAverages:

    @pytest.fixture(name="case_geometries")
    def case_geometries_fixture(self):
        return {case.name: scale(case.crystal, case.beam) for case in builtin_cases()}

    def test_grueso(self):
        geom = make_geometry(phi0=0.289e-7, a_hat=2.364e-10, d_hat=9.503e-10)
        assert mean_reflection_rough(geom) * 1e6 == pytest.approx(226.6, rel=1e-3)

    def test_refinado_1gev(self, case_geometries):
        assert mean_reflection_refined(case_geometries["1 GeV <111>"]) * 1e6 == pytest.approx(318.8, rel=1e-2)

    def test_numerico_coincide_con_refinado(self, case_geometries):
        for geom in case_geometries.values():
            refined = mean_reflection_refined(geom)
            assert mean_reflection_numeric(geom) == pytest.approx(refined, rel=1e-2)

    def test_grueso_es_el_promedio_de_la_rama_reflectante(self, one_ring):
        sqrt_phi = math.sqrt(one_ring.Phi)
        curve = sweep(one_ring, sqrt_phi, 1.0, 20_001, DeflectionMode.reduced)
        b_hat = [s.b_hat for s in curve.samples]
        alpha = [s.alpha for s in curve.samples]
        mean_alpha = trapezoid(alpha, b_hat) / (1 - sqrt_phi)
        assert 2 * mean_alpha == pytest.approx(mean_reflection_rough(one_ring), rel=5e-3)

    def test_carga_negativa(self):
        geom = make_geometry(phi0=-1e-3)
        with pytest.raises(RegimeError):
            mean_reflection_rough(geom)
        with pytest.raises(RegimeError):
            mean_reflection_refined(geom)
        with pytest.raises(RegimeError):
            mean_reflection_numeric(geom)

    def test_phi0_cero(self):
        geom = make_geometry(phi0=0.0)
        assert mean_reflection_refined(geom) == pytest.approx(0.0, abs=1e-15)
        assert mean_reflection_numeric(geom) == 0.0
        with pytest.raises(RegimeError):
            mean_reflection_rough(geom)

    def test_resumen_en_theta_l(self, case_geometries):
        result = reflection_averages(case_geometries["70 GeV <111>"], numeric=True)
        assert result.rough_in_theta_L == pytest.approx(4 / 3)
        assert result.chi_numeric_urad == pytest.approx(result.chi_refined_urad, rel=1e-2)
        assert result.theta_L_urad == pytest.approx(math.sqrt(0.58e-9) * 1e6)


# =============================================================================
# BARRIDOS
# =============================================================================

class TestSweep:

    def test_malla_uniforme(self, one_ring):
        curve = sweep(one_ring, 0.0, 1.1, 12)
        assert len(curve.samples) == 12
        assert curve.samples[0].b_hat == 0.0
        assert curve.samples[-1].b_hat == pytest.approx(1.1)

    def test_refinado_incluye_puntos_criticos(self, one_ring):
        curve = sweep(one_ring, 0.0, 1.1, 13, refine=True)
        b_values = {s.b_hat for s in curve.samples}
        assert set(breakpoints(one_ring)) <= b_values
        assert len(curve.samples) == 13 + len(breakpoints(one_ring))

    def test_muestras_insuficientes(self, one_ring):
        with pytest.raises(InvalidInputError):
            sweep(one_ring, 0.0, 1.1, 1)

    def test_rango_invertido(self, one_ring):
        with pytest.raises(InvalidInputError):
            sweep(one_ring, 1.0, 0.5, 10)

    def test_disco(self, five_rings):
        curve = sweep(five_rings, 0.0, 0.9, 10, DeflectionMode.reduced, disc=True)
        assert all(s.chi >= 0 for s in curve.samples)

    def test_advierte_si_falla_orbitas(self, caplog):
        geom = make_geometry(phi0=-0.02, planes=5)
        with caplog.at_level("WARNING", logger="app.services.deflection_core"):
            sweep(geom, 0.0, 1.1, 5)
        assert "órbitas" in caplog.text

    def test_procesos_en_paralelo_dan_la_misma_curva(self, five_rings, monkeypatch):
        serial = sweep(five_rings, 0.0, 1.1, 2001, DeflectionMode.exact, refine=True)
        monkeypatch.setattr(settings, "workers", 3)
        parallel = sweep(five_rings, 0.0, 1.1, 2001, DeflectionMode.exact, refine=True)
        assert [(s.b_hat, s.chi) for s in parallel.samples] == [(s.b_hat, s.chi) for s in serial.samples]
