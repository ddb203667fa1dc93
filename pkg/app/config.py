from typing import Literal

from dotenv import load_dotenv
from pydantic_settings import BaseSettings, SettingsConfigDict

# Explicitly load .env file so CLI runs outside the project root pick it up
load_dotenv()


class Settings(BaseSettings):
    model_config = SettingsConfigDict(
        # Use top level .env file (one level above ./app/)
        env_file=".env",
        env_ignore_empty=True,
        extra="ignore",
        frozen=True,
    )

    PROJECT_NAME: str = "Fentropy"

    # Tolerances
    STOCHASTIC_TOL: float = 1e-12
    CROSS_METHOD_TOL: float = 1e-9
    MONOTONE_SLACK: float = 1e-12
    PRUNE_THRESHOLD: float = 1e-14

    # Desk-scale bounds
    MAX_HULL_VERTICES: int = 10_000
    MAX_MARGINAL_CELLS: int = 10_000_000
    MAX_IMAGE_ORDER: int = 10_080

    # Ball radii used by f_limit when the caller gives none
    MARKOV_N_MAX: int = 1
    FINITE_N_MAX: int = 32

    DEFAULT_SEED: int = 0

    ENVIRONMENT: Literal["development", "production"] = "development"


settings = Settings()  # type: ignore
