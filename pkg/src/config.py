import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
from dotenv import load_dotenv

# 项目根目录
project_root = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
env_path = os.path.join(project_root, '.env')

_DTYPES = {"float64": np.float64, "float32": np.float32}


@dataclass(frozen=True)
class Settings:
    """Process-level settings read from the environment (and `.env`)."""
    log_dir: str
    log_level: str
    dtype: str

    @property
    def numpy_dtype(self):
        return _DTYPES[self.dtype]


def load_settings(override: bool = False) -> Settings:
    """Load settings, reading `.env` at the project root when it exists.

    Args:
        override: let values from `.env` replace variables already set

    Returns:
        Settings with defaults filled in
    """
    if os.path.exists(env_path):
        load_dotenv(env_path, override=override)

    dtype = os.getenv("CONQAR_DTYPE", "float64").lower()
    if dtype not in _DTYPES:
        raise ValueError(
            f"CONQAR_DTYPE must be one of {sorted(_DTYPES)}, got {dtype!r}")

    return Settings(
        log_dir=os.getenv("CONQAR_LOG_DIR", os.path.join(project_root, "logs")),
        log_level=os.getenv("CONQAR_LOG_LEVEL", "INFO").upper(),
        dtype=dtype,
    )


def resolve_dtype(name: Optional[str] = None):
    """Map a dtype name to numpy, falling back to the environment setting."""
    if name is None:
        name = load_settings().dtype
    try:
        return _DTYPES[name]
    except KeyError:
        raise ValueError(f"unsupported dtype {name!r}") from None
