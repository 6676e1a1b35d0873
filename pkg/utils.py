"""
Módulo de utilidades para la aplicación.
Contiene funciones auxiliares de conversión de unidades y de formato numérico
utilizadas por la CLI, los routers y los reportes.
"""

import math
from concurrent.futures import ProcessPoolExecutor

ANGSTROM_EN_METROS = 1e-10
MICRORADIANES_POR_RADIAN = 1e6
EV_EN_GEV = 1e-9


def angstrom_a_metros(valor):
    """
    Convierte una longitud en angstroms a metros.

    Args:
        valor (float): Longitud en Å

    Returns:
        float: Longitud en metros
    """
    return valor * ANGSTROM_EN_METROS


def radianes_a_microrad(angulo):
    """
    Convierte un ángulo en radianes a microradianes.

    Args:
        angulo (float): Ángulo en rad

    Returns:
        float: Ángulo en µrad
    """
    return angulo * MICRORADIANES_POR_RADIAN


def cifras_significativas(valor, cifras=4):
    """
    Redondea un número a una cantidad de cifras significativas.

    Args:
        valor (float): Número a redondear
        cifras (int): Cifras significativas a conservar

    Returns:
        float: Número redondeado (0 y no finitos se devuelven sin cambios)
    """
    if valor == 0 or not math.isfinite(valor):
        return valor
    exponente = math.floor(math.log10(abs(valor)))
    return round(valor, cifras - 1 - exponente)


def formatear_exacto(valor):
    """Representación decimal con 17 cifras significativas (ida y vuelta sin pérdida)."""
    return format(valor, ".17g")


def desviacion_relativa(estimado, medido):
    """
    Desviación relativa (estimado − medido)/medido.

    Returns:
        float | None: None si no hay medición o es cero
    """
    if medido is None or medido == 0:
        return None
    return (estimado - medido) / medido


def mapear_en_paralelo(funcion, elementos, procesos=1):
    """
    Aplica `funcion` a cada elemento conservando el orden de entrada.

    Args:
        funcion (callable): Función serializable (nivel de módulo o functools.partial)
        elementos (list): Valores de entrada
        procesos (int): Procesos a usar; 1 evalúa en el proceso actual

    Returns:
        list: Resultados en el mismo orden que `elementos`
    """
    if procesos <= 1 or len(elementos) < 2:
        return [funcion(elemento) for elemento in elementos]
    lote = max(1, len(elementos) // (4 * procesos))
    with ProcessPoolExecutor(max_workers=procesos) as executor:
        return list(executor.map(funcion, elementos, chunksize=lote))
