"""
Centralized i18n Configuration Management
Message catalogues are loaded through i18nice; keys are "<file>.<section>.<name>"
"""

import glob
import json
import os
from typing import Optional

import i18n

from utils.debug_utils import debug_log

SUPPORTED_LOCALES = ("en", "ja")
DEFAULT_LOCALE = "en"

_LOCALES_PATH = os.path.join(os.path.dirname(os.path.abspath(__file__)), "..", "locales")
_initialized = False


def setup_i18n(locale: Optional[str] = None) -> str:
    """Initialize i18n configuration; returns the locale in effect"""
    global _initialized
    i18n.set("file_format", "json")
    i18n.set("fallback", DEFAULT_LOCALE)
    i18n.set("enable_memoization", True)

    locale = locale or os.getenv("LANGUAGE", DEFAULT_LOCALE)
    if locale not in SUPPORTED_LOCALES:
        debug_log(f"[i18n] Unsupported locale: {locale}. Using default '{DEFAULT_LOCALE}'")
        locale = DEFAULT_LOCALE
    i18n.set("locale", locale)
    debug_log(f"[i18n] Initialized with locale: {locale}")

    _load_translations(locale)
    if locale != DEFAULT_LOCALE:
        _load_translations(DEFAULT_LOCALE)
    _initialized = True
    return locale


def t(key: str, **kwargs) -> str:
    """Translation helper function; unknown keys come back unchanged"""
    if not _initialized:
        setup_i18n()
    try:
        return i18n.t(key, **kwargs)
    except (KeyError, ValueError) as e:
        debug_log(f"[i18n] Translation error for key '{key}': {e}")
        return key


def _load_translations(locale: str):
    """Load every catalogue file of one locale"""
    locale_dir = os.path.join(_LOCALES_PATH, locale)
    json_files = sorted(glob.glob(os.path.join(locale_dir, "*.json")))
    for json_file in json_files:
        try:
            with open(json_file, "r", encoding="utf-8") as f:
                data = json.load(f)
        except (OSError, json.JSONDecodeError) as e:
            debug_log(f"[i18n] Error loading {json_file}: {e}")
            continue
        namespace = os.path.basename(json_file)[:-len(".json")]
        _add_nested_translations(data, namespace, locale=locale)
    debug_log(f"[i18n] Loaded {len(json_files)} translation files for locale '{locale}'")


def _add_nested_translations(data: dict, namespace: str, prefix: str = "", locale: str = DEFAULT_LOCALE):
    """Add nested translation data to i18n"""
    for key, value in data.items():
        path = f"{prefix}.{key}" if prefix else key
        if isinstance(value, dict):
            _add_nested_translations(value, namespace, path, locale)
        else:
            i18n.add_translation(f"{namespace}.{path}", value, locale=locale)
