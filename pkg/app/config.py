"""
Configuración de la aplicación.
Maneja diferentes entornos: desarrollo, pruebas y producción.
Incluye los valores numéricos por defecto (muestreo, tolerancias de los oráculos).
"""

import json
import logging
from functools import lru_cache
from typing import Literal, Optional

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings


class Settings(BaseSettings):
    """
    Configuración de la aplicación usando Pydantic Settings.
    Lee las variables de entorno desde el archivo .env
    """

    # Configuración básica de la aplicación
    app_name: str = "deflexion-anillos"
    app_version: str = "1.0.0"

    # Configuración del entorno
    environment: Literal["development", "testing", "production"] = Field(
        default="development",
        description="entorno de ejecucion"
    )

    # Configuración del servidor
    host: str = Field(default="localhost", description="host del servidor")
    port: int = Field(default=8000, ge=1, le=65535, description="puerto del servidor")
    debug: bool = Field(default=False, description="modo debug")

    # Configuración de CORS
    cors_origins: list[str] = Field(
        default=["*"],
        description="origenes permitidos para CORS"
    )

    # Configuración de logging
    LOG_LEVEL: str = Field(
        default="INFO",
        description="nivel de logging"
    )
    log_file: Optional[str] = Field(
        default=None,
        description="archivo de log (opcional)"
    )

    # Muestreo por defecto de los barridos en b̂
    default_samples: int = Field(default=10_000, ge=2, description="muestras del barrido")
    default_b_min: float = Field(default=0.0, ge=0.0, description="b̂ minimo del barrido")
    default_b_max: float = Field(default=1.1, gt=0.0, description="b̂ maximo del barrido")

    # Tolerancias (radianes salvo que se indique)
    oracle_tolerance: float = Field(default=1e-9, gt=0.0, description="desviacion maxima formula vs trazado")
    quad_tolerance: float = Field(default=1e-12, gt=0.0, description="tolerancia absoluta de la cuadratura")
    reproduction_tolerance: float = Field(default=0.01, gt=0.0, description="tolerancia relativa de reproduccion")
    breakpoint_margin: float = Field(default=1e-12, ge=0.0, description="distancia minima a puntos criticos")
    ode_rtol: float = Field(default=1e-10, gt=0.0, description="rtol del integrador de orbitas")
    ode_atol: float = Field(default=1e-12, gt=0.0, description="atol del integrador de orbitas")
    ode_max_arc: float = Field(default=20.0, gt=0.0, description="longitud de arco maxima antes de declarar orbita")

    # Paralelismo y reproducibilidad
    workers: int = Field(default=1, ge=1, description="procesos para barridos y lotes del oraculo")
    random_seed: int = Field(default=20071203, description="semilla del muestreo del oraculo")

    model_config = {
        "env_file": ".env",
        "env_file_encoding": "utf-8",
        "case_sensitive": False,
        "env_nested_delimiter": "__",
        "extra": "ignore",
    }

    @field_validator("cors_origins", mode="before")
    @classmethod
    def validate_cors_origins(cls, v):
        """convertir string JSON a lista si es necesario"""
        if isinstance(v, str):
            try:
                # si viene como string json desde env
                return json.loads(v)
            except json.JSONDecodeError:
                # viene como string simple para crear lista
                return [v.strip()]
        return v

    @field_validator("LOG_LEVEL")
    @classmethod
    def validate_log_level(cls, v):
        """Normaliza nivel de logging"""
        valid_levels = ["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"]
        v_upper = v.upper()
        if v_upper not in valid_levels:
            raise ValueError(f"LOG_LEVEL debe ser uno de: {', '.join(valid_levels)}")
        return v_upper

    @field_validator("default_b_max")
    @classmethod
    def validate_b_range(cls, v, info):
        """el rango por defecto del barrido debe ser creciente"""
        b_min = info.data.get("default_b_min", 0.0)
        if v <= b_min:
            raise ValueError("default_b_max debe ser mayor que default_b_min")
        return v


class DevelopmentSettings(Settings):
    """Configuración para el entorno de desarrollo."""
    debug: bool = True
    LOG_LEVEL: str = "DEBUG"


class TestingSettings(Settings):
    """Configuración para pruebas: sin archivo de log y un solo proceso."""
    LOG_LEVEL: str = "WARNING"
    log_file: Optional[str] = None
    workers: int = 1


class ProductionSettings(Settings):
    """Configuración para producción."""
    debug: bool = False
    LOG_LEVEL: str = "INFO"


_ENTORNOS = {
    "development": DevelopmentSettings,
    "testing": TestingSettings,
    "production": ProductionSettings,
}


@lru_cache
def get_settings() -> Settings:
    """
    Retorna la configuración apropiada según el entorno.
    """
    env = Settings().environment
    return _ENTORNOS[env]()


def configure_logging(settings: Settings, level: Optional[str] = None) -> None:
    """
    Configura el logging raíz con el nivel y el archivo de la configuración.
    `level` permite forzar otro nivel (la CLI usa WARNING salvo con --verbose).
    """
    handlers: list[logging.Handler] = [logging.StreamHandler()]
    if settings.log_file:
        handlers.append(logging.FileHandler(settings.log_file, encoding="utf-8"))

    logging.basicConfig(
        level=level or settings.LOG_LEVEL,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        handlers=handlers,
        force=True,
    )


settings = get_settings()
