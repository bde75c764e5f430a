import logging
import os

import yaml

_FIXTURE_REGISTRY_CACHE = None

FIXTURES_PATH = os.path.join(os.path.dirname(os.path.dirname(__file__)), "fixtures.yaml")


def load_fixture_registry():
    """Load fixtures.yaml and cache the parsed data."""
    global _FIXTURE_REGISTRY_CACHE
    if _FIXTURE_REGISTRY_CACHE is not None:
        return _FIXTURE_REGISTRY_CACHE

    try:
        with open(FIXTURES_PATH, "r", encoding="utf-8") as file:
            _FIXTURE_REGISTRY_CACHE = yaml.safe_load(file) or {}
            return _FIXTURE_REGISTRY_CACHE
    except Exception as exc:
        logging.warning(f"⚠️ Failed to load fixture registry from {FIXTURES_PATH}: {exc}")
        _FIXTURE_REGISTRY_CACHE = {}
        return _FIXTURE_REGISTRY_CACHE


def reset_registry_cache():
    """Forget the cached registry (tests swap FIXTURES_PATH)."""
    global _FIXTURE_REGISTRY_CACHE
    _FIXTURE_REGISTRY_CACHE = None


def _section(key):
    registry = load_fixture_registry()
    entries = registry.get(key, []) if isinstance(registry, dict) else []
    return [entry for entry in entries or [] if entry.get("enabled", True)]


def _named(key, name):
    for entry in _section(key):
        if entry.get("name") == name:
            return entry
    return None


def get_base_text(name):
    """Base file text of an enabled registry base, or None."""
    entry = _named("bases", name)
    return entry["text"] if entry else None


def get_universe_text(name):
    """Universe file text of an enabled registry universe, or None."""
    entry = _named("universes", name)
    return entry["text"] if entry else None


def get_base(name):
    """Parsed Base from the registry, or None when the name is unknown."""
    from app.logic.parser import parse_base

    text = get_base_text(name)
    return parse_base(text, source=f"fixtures:{name}") if text else None


def get_universe(name):
    """``(SupportUniverse, {name: Base})`` from the registry, or None."""
    from app.logic.parser import parse_universe

    text = get_universe_text(name)
    return parse_universe(text, source=f"fixtures:{name}") if text else None


def get_corpus(system=None):
    """
    Enabled corpus entries, optionally only those of one Hilbert system.

    Each entry has ``name``, ``system``, ``exercises`` and the proof script
    under ``proof``.
    """
    entries = _section("corpus")
    if system:
        entries = [e for e in entries if e.get("system") == system]
    return entries


def get_default(key, fallback=None):
    registry = load_fixture_registry()
    defaults = registry.get("defaults", {}) if isinstance(registry, dict) else {}
    return (defaults or {}).get(key, fallback)


def read_source(value, kind):
    """
    Text for a ``--base``/``--universe`` style option: a file path first, then a registry name.

    Returns:
        tuple: (text, source label)

    Raises:
        FileNotFoundError: if ``value`` is neither a readable file nor a registry entry.
    """
    if os.path.isfile(value):
        with open(value, "r", encoding="utf-8") as file:
            return file.read(), value
    lookup = {"base": get_base_text, "universe": get_universe_text}[kind]
    text = lookup(value)
    if text is None:
        raise FileNotFoundError(f"no {kind} file or registry entry named {value}")
    return text, f"fixtures:{value}"
