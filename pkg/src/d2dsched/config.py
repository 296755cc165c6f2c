"""Flat ``key = value`` configuration files.

Blank lines and ``#`` comments are ignored. List values are comma separated.
"""
from __future__ import annotations

from dataclasses import MISSING, fields


class ConfigError(ValueError):
    pass


def parse_config_text(text: str, source: str = "<string>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = value
    return out


def load_config(path) -> dict[str, str]:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from exc
    return parse_config_text(text, str(path))


def parse_override(item: str) -> tuple[str, str]:
    if "=" not in item:
        raise ConfigError(f"override {item!r} must look like KEY=VALUE")
    key, value = (part.strip() for part in item.split("=", 1))
    if not key:
        raise ConfigError(f"override {item!r} has an empty key")
    return key, value


def _coerce_scalar(key: str, text: str, like):
    try:
        if isinstance(like, bool):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if isinstance(like, int):
            return int(text, 0)
        if isinstance(like, float):
            return float(text)
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r} (expected {type(like).__name__})") from None
    return text


def coerce(key: str, text: str, default):
    """Convert ``text`` to the type of ``default``; tuples convert element-wise."""
    if isinstance(default, tuple):
        like = default[0] if default else ""
        items = [t.strip() for t in text.split(",") if t.strip()]
        return tuple(_coerce_scalar(key, t, like) for t in items)
    return _coerce_scalar(key, text, default)


def field_defaults(cls) -> dict[str, object]:
    out = {}
    for f in fields(cls):
        if f.default is not MISSING:
            out[f.name] = f.default
        elif f.default_factory is not MISSING:
            out[f.name] = f.default_factory()
    return out
