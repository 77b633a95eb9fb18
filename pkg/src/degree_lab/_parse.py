"""Helpers for the ``kind:key=value,...`` descriptor strings."""

from .errors import ConfigurationError


def split_descriptor(text):
    """Split ``"powlog:n=2,a=1"`` into ``("powlog", "n=2,a=1")``."""
    text = text.strip()
    if not text:
        raise ConfigurationError("empty descriptor")
    head, _, rest = text.partition(":")
    return head.strip().lower(), rest.strip()


def parse_params(text, allowed=None):
    params = {}
    if not text:
        return params
    for item in text.split(","):
        key, sep, value = item.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigurationError(f"malformed parameter {item!r}")
        if allowed is not None and key not in allowed:
            raise ConfigurationError(f"unknown parameter {key!r}")
        params[key] = value.strip()
    return params


def as_float(params, key, default=None):
    if key not in params:
        if default is None:
            raise ConfigurationError(f"missing parameter {key!r}")
        return default
    try:
        return float(params[key])
    except ValueError:
        raise ConfigurationError(f"{key}={params[key]!r} is not a number") from None


def as_int(params, key, default=None):
    if key not in params:
        if default is None:
            raise ConfigurationError(f"missing parameter {key!r}")
        return default
    try:
        return int(params[key])
    except ValueError:
        raise ConfigurationError(f"{key}={params[key]!r} is not an integer") from None
