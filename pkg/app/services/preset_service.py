"""
Preset Service

Loads the shipped experiment presets and user config files, and merges
per-run overrides on top of them.
"""
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from app.domain.exceptions import ConfigFileError
from app.domain.models import ExperimentConfig

logger = logging.getLogger(__name__)

# Cache for loaded presets
_presets_cache: Dict[str, Dict[str, Any]] = {}


def _get_presets_dir() -> Path:
    """Get the path to the presets directory."""
    return Path(__file__).parent.parent / "presets"


def available_presets() -> List[str]:
    return sorted(p.stem for p in _get_presets_dir().glob("*.json"))


def _read_json(path: Path) -> Dict[str, Any]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        raise ConfigFileError(path=str(path), message="Config file not found")
    except json.JSONDecodeError as e:
        raise ConfigFileError(path=str(path), message=f"Invalid JSON in config file: {e}")
    except OSError as e:
        raise ConfigFileError(path=str(path), message=f"Could not read config file: {e}")

    if not isinstance(data, dict):
        raise ConfigFileError(path=str(path), message="Config file must hold a JSON object")
    return data


def load_preset(name: str) -> Dict[str, Any]:
    """
    Raw key-value content of a shipped preset.

    Results are cached; callers get a copy.
    """
    if name not in _presets_cache:
        path = _get_presets_dir() / f"{name}.json"
        if not path.exists():
            raise ConfigFileError(
                path=str(path),
                message=f"Unknown preset '{name}', available: {', '.join(available_presets())}"
            )
        _presets_cache[name] = _read_json(path)
        logger.info(f"Loaded preset: {name}")
    return dict(_presets_cache[name])


def resolve_config(
    preset: Optional[str] = None,
    config_path: Optional[Path] = None,
    overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """
    Build an ExperimentConfig from preset < config file < overrides.

    Overrides whose value is None are ignored.

    Raises:
        pydantic.ValidationError: if the merged values violate the config invariants
        ConfigFileError: if the preset or config file cannot be read or parsed
    """
    values: Dict[str, Any] = {}
    if preset:
        values.update(load_preset(preset))
    if config_path:
        values.update(_read_json(Path(config_path)))
    if overrides:
        values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)
