"""
Global configuration settings for the IaaS workload partitioner.
"""
import os
from typing import List


class Settings:
    """Application settings configuration."""

    APP_NAME: str = "Heterogeneous IaaS Partitioner"
    VERSION: str = "1.0.0"
    DEBUG: bool = os.getenv("DEBUG", "false").lower() == "true"

    # Server settings
    HOST: str = os.getenv("HOST", "0.0.0.0")
    PORT: int = int(os.getenv("PORT", "8000"))

    # CORS settings
    CORS_ORIGINS: List[str] = os.getenv("CORS_ORIGINS", "*").split(",")

    # Log settings
    LOG_LEVEL: str = os.getenv("LOG_LEVEL", "INFO")
    MAX_LOGS: int = int(os.getenv("MAX_LOGS", "1000"))

    # File formats
    SCHEMA_VERSION: str = "1"

    # Allocation shares below this are treated as zero support
    SUPPORT_EPSILON: float = float(os.getenv("SUPPORT_EPSILON", "1e-6"))

    # Solver defaults
    INTEGRALITY_TOL: float = float(os.getenv("INTEGRALITY_TOL", "1e-6"))
    RELATIVE_GAP_TOL: float = float(os.getenv("RELATIVE_GAP_TOL", "1e-4"))
    TIME_LIMIT_S: float = float(os.getenv("TIME_LIMIT_S", "60"))
    NODE_LIMIT: int = int(os.getenv("NODE_LIMIT", "100000"))
    LP_FEASIBILITY_TOL: float = float(os.getenv("LP_FEASIBILITY_TOL", "1e-7"))
    LP_ITERATION_LIMIT: int = int(os.getenv("LP_ITERATION_LIMIT", "50000"))
    BLAND_DEGENERATE_STREAK: int = int(os.getenv("BLAND_DEGENERATE_STREAK", "50"))
    ROUNDING_HEURISTIC_FREQUENCY: int = int(os.getenv("ROUNDING_HEURISTIC_FREQUENCY", "20"))
    WARM_START_STATES: int = int(os.getenv("WARM_START_STATES", "2"))

    # Pareto sweep
    PARETO_POINTS: int = int(os.getenv("PARETO_POINTS", "10"))
    SWEEP_WORKERS: int = int(os.getenv("SWEEP_WORKERS", "4"))

    # Monte Carlo workload
    MC_BLOCK_PATHS: int = int(os.getenv("MC_BLOCK_PATHS", "65536"))


settings = Settings()
