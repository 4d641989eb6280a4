"""
Library-wide defaults, optionally overridden by a python module on disk.
"""
import importlib.util
import logging
import os
from os import getenv
from types import ModuleType
from typing import Any, Dict, Optional

log = logging.getLogger(__name__)

default_settings_dict: Dict[str, Any] = {
    'channel_count': 100000,
    'n_parts': 5,
    'k': 3,
    't_max': 1000000,
    'loss_probability': 0.0,
    'trials': 10000,
    'capture_tolerance': 0.01,
    'device_id': 1,
    'output_format': 'text',
    'skew_ppm': 50,
    'mc_chunk_size': 5000,
    'mc_max_workers': 4,
}

OVERRIDE_SETTINGS_PATH = getenv('HOPSHARE_CONFIG', '/etc/hopshare/global_default_settings.py')


def _load_module(name: str, path: str) -> ModuleType:
    # https://docs.python.org/3/library/importlib.html#importing-a-source-file-directly
    spec = importlib.util.spec_from_file_location(name, path)
    module = importlib.util.module_from_spec(spec)  # type: ignore
    spec.loader.exec_module(module)  # type: ignore
    return module


override_settings: Optional[ModuleType] = None
if os.path.isfile(OVERRIDE_SETTINGS_PATH):
    override_settings = _load_module('__hopshare_override_settings__', OVERRIDE_SETTINGS_PATH)
    unknown = sorted(
        name for name in vars(override_settings)
        if not name.startswith('_') and name not in default_settings_dict
    )
    if unknown:
        log.warning('Ignoring unknown hopshare settings in %s: %s', OVERRIDE_SETTINGS_PATH, ', '.join(unknown))
    log.info('Override settings for hopshare available %s', OVERRIDE_SETTINGS_PATH)
else:
    log.info('Override settings for hopshare not available %s', OVERRIDE_SETTINGS_PATH)
    log.info('Using Default settings value')


def get_settings_value(key: str) -> Any:
    """
    Fetches the value from the override file.
    If the value is not present, falls back to ``default_settings_dict``.
    """
    if override_settings is not None and hasattr(override_settings, key):
        return getattr(override_settings, key)

    if key in default_settings_dict:
        return default_settings_dict[key]

    return None


def effective_settings() -> Dict[str, Any]:
    """
    Every known setting with overrides applied; used as the lowest layer of a CLI scenario.
    """
    return {key: get_settings_value(key) for key in default_settings_dict}
