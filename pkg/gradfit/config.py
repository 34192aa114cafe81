"""Configuration sources: .gradfit.json, .env and GRADFIT_* variables."""

import json
import os
from pathlib import Path
from typing import Any, Dict, Optional

from dotenv import load_dotenv

from gradfit.constants import CONFIG_FILENAME, ENV_CG_TOL, ENV_LOG_LEVEL, ENV_QUAD_MARGIN
from gradfit.exceptions import InvalidConfigError
from gradfit.logger import get_logger

logger = get_logger()

_ENV_KEYS = {
    ENV_CG_TOL: ("cg_tol", float),
    ENV_QUAD_MARGIN: ("quad_margin", int),
    ENV_LOG_LEVEL: ("log_level", str),
}


def load_config(project_root: str) -> Optional[Dict[str, Any]]:
    """
    Load configuration from the project root directory.

    Args:
        project_root: Directory that may hold a .gradfit.json file

    Returns:
        Configuration dictionary if found, None otherwise

    Raises:
        InvalidConfigError: if the file is not a JSON object
    """
    config_path = Path(project_root) / CONFIG_FILENAME
    if not config_path.exists():
        return None
    try:
        with open(config_path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except json.JSONDecodeError as e:
        raise InvalidConfigError(CONFIG_FILENAME, str(config_path), f"not valid JSON ({e.msg})")
    if not isinstance(data, dict):
        raise InvalidConfigError(CONFIG_FILENAME, str(config_path), "expected a JSON object")
    logger.debug(f"Loaded {config_path}")
    return data


def environment_overrides(project_root: Optional[str] = None) -> Dict[str, Any]:
    """
    Values from GRADFIT_* variables, after loading .env without overriding the process environment.

    Raises:
        InvalidConfigError: if a variable cannot be parsed
    """
    env_file = Path(project_root) / ".env" if project_root else None
    if env_file is not None and env_file.exists():
        load_dotenv(env_file, override=False)
    else:
        load_dotenv(override=False)

    overrides = {}
    for variable, (key, cast) in _ENV_KEYS.items():
        raw = os.getenv(variable)
        if raw is None or raw == "":
            continue
        try:
            overrides[key] = cast(raw)
        except ValueError:
            raise InvalidConfigError(variable, raw, f"expected {cast.__name__}")
    return overrides


def resolve_settings(project_root: str, **flags) -> Dict[str, Any]:
    """
    Merge settings: .gradfit.json, then environment, then explicit flags.

    Flags that are None are ignored, so CLI defaults never shadow file values.
    """
    settings: Dict[str, Any] = dict(load_config(project_root) or {})
    settings.update(environment_overrides(project_root))
    settings.update({key: value for key, value in flags.items() if value is not None})
    return settings
