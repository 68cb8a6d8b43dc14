"""Python access to the thin-film two-phase design solvers."""

import json
import os

from . import _core
from ._core import (
    ConfigError,
    DomainError,
    SolverError,
    laminate_upper,
    planar_surface,
    reduced_density,
    sweep_verdict,
    version,
)

__all__ = [
    "ConfigError",
    "DomainError",
    "SolverError",
    "config_text",
    "envelope",
    "laminate_upper",
    "planar_surface",
    "reduced_density",
    "solve_limit",
    "solve_slab",
    "sweep",
    "sweep_verdict",
    "validate",
    "version",
]


def config_text(config="", **overrides):
    """Config file path or text, with ``key=value`` overrides appended.

    Dotted keys are spelled with double underscores: ``mesh__nx=8``.
    """
    if config and "\n" not in config and "=" not in config and os.path.exists(config):
        with open(config, encoding="utf-8") as fh:
            config = fh.read()
    lines = [config]
    for key, value in overrides.items():
        if isinstance(value, (list, tuple)):
            value = ", ".join(str(v) for v in value)
        lines.append(f"{key.replace('__', '.')} = {value}")
    return "\n".join(lines) + "\n"


def sweep(config="", seed=None, convention=None, **overrides):
    return json.loads(_core.sweep_json(config_text(config, **overrides), seed, convention))


def validate(config="", seed=None, **overrides):
    return json.loads(_core.validate_json(config_text(config, **overrides), seed))


def envelope(config="", **overrides):
    return json.loads(_core.envelope_json(config_text(config, **overrides)))


def solve_limit(config="", seed=None, **overrides):
    out = _core.solve_limit(config_text(config, **overrides), seed)
    out["energy"] = json.loads(out["energy"])
    return out


def solve_slab(config="", eps=1.0, seed=None, **overrides):
    out = _core.solve_slab(config_text(config, **overrides), eps, seed)
    out["energy"] = json.loads(out["energy"])
    out["diagnostics"] = json.loads(out["diagnostics"])
    return out
