"""
Interfaz de línea de comandos.
Subcomandos: sweep | extrema | average | reproduce | oracle-check | condition.

Códigos de salida: 0 éxito, 1 entrada inválida, 2 falla de verificación o
reproducción, 3 error de E/S. Cada error imprime una sola línea
`error[<tipo>]: <mensaje>` en stderr.
"""

import argparse
import csv
import io
import json
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from app.config import configure_logging, settings
from app.exceptions import DeflectionError, InvalidInputError, ReproductionError, VerificationError
from app.models import DeflectionCurve, DeflectionMode
from app.schemas import BeamConfig, ConditionResponse, ConfigDocument, CrystalConfig, load_config
from app.services.deflection_core import extrema, reflection_averages, sweep
from app.services.experiments import RENDERERS, builtin_cases, compare_report
from app.services.oracle import verify_against_trace
from utils import formatear_exacto, radianes_a_microrad

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_IO = 3

CSV_HEADER = ["b_hat", "alpha_rad", "chi_rad", "chi_urad"]

MODES = {
    "exact": DeflectionMode.exact,
    "small": DeflectionMode.small_angle,
    "reduced": DeflectionMode.reduced,
}

INLINE_FLAGS = ["R_m", "N", "d_angstrom", "a_angstrom", "phi0", "U0_eV", "E_GeV", "pc_GeV"]


class _Parser(argparse.ArgumentParser):
    """ArgumentParser que reporta errores de uso con el código de entrada inválida."""

    def error(self, message):
        raise InvalidInputError(message)


# =============================================================================
# CONSTRUCCIÓN DEL PARSER
# =============================================================================

def _output_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--out", help="archivo de salida (stdout por defecto)")
    parent.add_argument("--format", choices=["text", "csv", "json"], default=None)
    parent.add_argument("--verbose", action="store_true", help="logging en nivel DEBUG")
    return parent


def _input_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="documento JSON con crystal y beam")
    inline = parent.add_argument_group("cristal y haz en línea")
    inline.add_argument("--R-m", dest="R_m", type=float, help="radio de curvatura (m)")
    inline.add_argument("--N", dest="N", type=int, help="número de planos")
    inline.add_argument("--d-angstrom", dest="d_angstrom", type=float, help="periodo d (Å)")
    inline.add_argument("--a-angstrom", dest="a_angstrom", type=float, help="espesor a (Å)")
    inline.add_argument("--phi0", type=float, help="φ₀ directo")
    inline.add_argument("--U0-eV", dest="U0_eV", type=float)
    inline.add_argument("--E-GeV", dest="E_GeV", type=float)
    inline.add_argument("--pc-GeV", dest="pc_GeV", type=float)
    parent.add_argument("--charge", choices=["+", "-"], default=None, help="signo de la carga")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="python -m app", description="Función de deflexión en anillos de cristal curvado")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    output, inputs = _output_options(), _input_options()

    p_sweep = subparsers.add_parser("sweep", parents=[inputs, output], help="barrido χ(b̂)")
    p_sweep.add_argument("--samples", type=int, default=settings.default_samples)
    p_sweep.add_argument("--bmin", type=float, default=settings.default_b_min)
    p_sweep.add_argument("--bmax", type=float, default=settings.default_b_max)
    p_sweep.add_argument("--mode", choices=list(MODES), default="small")
    p_sweep.add_argument("--refine", action="store_true", help="agregar puntos críticos a la malla")
    p_sweep.add_argument("--disc", action="store_true", help="curva del cilindro sólido")

    subparsers.add_parser("extrema", parents=[inputs, output], help="ángulos máximo y mínimo")

    p_average = subparsers.add_parser("average", parents=[inputs, output], help="ángulos medios de reflexión")
    p_average.add_argument("--numeric", action="store_true", help="agregar la media por cuadratura")

    subparsers.add_parser("condition", parents=[inputs, output], help="condiciones de reflexión y órbitas")
    subparsers.add_parser("reproduce", parents=[output], help="comparación con los experimentos")

    p_oracle = subparsers.add_parser("oracle-check", parents=[inputs, output], help="forma cerrada vs trazado")
    p_oracle.add_argument("--samples", type=int, default=settings.default_samples)
    p_oracle.add_argument("--mode", choices=list(MODES), default="exact")
    p_oracle.add_argument("--seed", type=int, default=None)
    return parser


# =============================================================================
# ENTRADA
# =============================================================================

def resolve_config(args: argparse.Namespace) -> ConfigDocument:
    """
    Construye el documento de configuración desde --config o desde las banderas
    en línea (exactamente una de las dos fuentes) y aplica --charge.
    """
    inline = {flag: getattr(args, flag) for flag in INLINE_FLAGS if getattr(args, flag) is not None}
    if args.config and inline:
        raise InvalidInputError("Use --config o las banderas en línea, no ambos")
    if args.config:
        document = load_config(args.config)
    elif inline:
        document = ConfigDocument(
            crystal=CrystalConfig(
                **{key: inline.get(key) for key in ("R_m", "N", "d_angstrom", "a_angstrom")}
            ),
            beam=BeamConfig(**{key: inline[key] for key in ("phi0", "U0_eV", "E_GeV", "pc_GeV") if key in inline}),
        )
    else:
        raise InvalidInputError("Se requiere --config o las banderas del cristal y del haz")

    if args.charge is not None:
        sign = 1 if args.charge == "+" else -1
        beam = document.beam
        if beam.phi0 is not None:
            beam = beam.model_copy(update={"phi0": sign * abs(beam.phi0)})
        else:
            beam = beam.model_copy(update={"charge_sign": sign})
        document = document.model_copy(update={"beam": beam})
    return document


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


# =============================================================================
# SUBCOMANDOS
# =============================================================================

def curve_to_csv(curve: DeflectionCurve) -> str:
    """CSV con 17 cifras significativas y la columna en µrad a 4 cifras."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for sample in curve.samples:
        writer.writerow(
            [
                formatear_exacto(sample.b_hat),
                formatear_exacto(sample.alpha),
                formatear_exacto(sample.chi),
                format(radianes_a_microrad(sample.chi), ".4g"),
            ]
        )
    return buffer.getvalue()


def cmd_sweep(args: argparse.Namespace) -> int:
    geom = resolve_config(args).geometry()
    curve = sweep(
        geom,
        args.bmin,
        args.bmax,
        args.samples,
        MODES[args.mode],
        refine=args.refine,
        disc=args.disc,
    )
    if args.format == "json":
        _emit(curve.model_dump_json() + "\n", args.out)
    else:
        _emit(curve_to_csv(curve), args.out)
    return EXIT_OK


def _render_values(values: dict, fmt: Optional[str]) -> str:
    if fmt == "json":
        return json.dumps(values, indent=2) + "\n"
    if fmt == "csv":
        return ",".join(values) + "\n" + ",".join(_plain(v) for v in values.values()) + "\n"
    return "".join(f"{key} = {_plain(value)}\n" for key, value in values.items())


def _plain(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format(value, ".4g")
    return str(value)


def cmd_extrema(args: argparse.Namespace) -> int:
    result = extrema(resolve_config(args).geometry())
    values = {f"{name}_urad": radianes_a_microrad(value) for name, value in result.model_dump().items()}
    _emit(_render_values(values, args.format), args.out)
    return EXIT_OK


def cmd_average(args: argparse.Namespace) -> int:
    averages = reflection_averages(resolve_config(args).geometry(), numeric=args.numeric)
    values = averages.model_dump(exclude_none=True)
    _emit(_render_values(values, args.format), args.out)
    return EXIT_OK


def cmd_condition(args: argparse.Namespace) -> int:
    verdict = ConditionResponse.from_geometry(resolve_config(args).geometry())
    _emit(_render_values(verdict.model_dump(mode="json"), args.format), args.out)
    return EXIT_OK


def cmd_reproduce(args: argparse.Namespace) -> int:
    report = compare_report(builtin_cases())
    _emit(RENDERERS[args.format or "text"](report), args.out)
    if not report.reproduced:
        failed = ", ".join(row.name for row in report.rows if not row.reproduced)
        raise ReproductionError(f"Estimaciones fuera de tolerancia: {failed}")
    return EXIT_OK


def cmd_oracle_check(args: argparse.Namespace) -> int:
    geom = resolve_config(args).geometry()
    summary = verify_against_trace(geom, args.samples, MODES[args.mode], seed=args.seed)
    _emit(_render_values(summary.model_dump(mode="json"), args.format), args.out)
    if not summary.passed:
        raise VerificationError(
            f"Desviación máxima {summary.max_deviation:.3e} rad en b̂ = {summary.worst_b_hat!r} "
            f"supera {summary.tolerance:.1e}"
        )
    return EXIT_OK


COMMANDS = {
    "sweep": cmd_sweep,
    "extrema": cmd_extrema,
    "average": cmd_average,
    "condition": cmd_condition,
    "reproduce": cmd_reproduce,
    "oracle-check": cmd_oracle_check,
}


def _report_error(kind: str, message: str) -> None:
    line = " ".join(str(message).split())
    print(f"error[{kind}]: {line}", file=sys.stderr)


def main(argv: Optional[List[str]] = None) -> int:
    """Punto de entrada; devuelve el código de salida."""
    try:
        args = build_parser().parse_args(argv)
        configure_logging(settings, "DEBUG" if args.verbose else "WARNING")
        return COMMANDS[args.command](args)
    except DeflectionError as exc:
        _report_error(exc.kind, exc)
        return exc.exit_code
    except ValidationError as exc:
        _report_error(InvalidInputError.kind, "; ".join(error["msg"] for error in exc.errors()))
        return InvalidInputError.exit_code
    except OSError as exc:
        _report_error("io", exc)
        return EXIT_IO
