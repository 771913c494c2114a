"""Run configuration: plain-text key = value files with sections.

A config file has three optional sections, all keys shown with their
defaults in DEFAULTS below.  Unknown sections or keys are rejected so a
typo cannot silently fall back to a default.  Values in [tolerances]
other than `scale` override the per-identity defaults resolved in the
suite module; absent keys defer to those.

Example::

    [run]
    group = su2
    hbar0 = 1.0
    seed = 0
    s_grid = 0.25, 1.0, 3.0

    [quadrature]
    char_backend = cartan-reduced
    mc_samples = 1000000

    [tolerances]
    scale = 1.0
    unitarity = 1e-6
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields

IDENTITY_FAMILIES = (
    "wedge",
    "phi-flatness",
    "cst-unitarity",
    "pairing",
    "bks-factor",
    "unitarity",
    "factorization",
    "vertical-limit",
    "continuity",
    "delta",
    "prequantum",
)

GROUP_KINDS = ("torus", "su2", "su3")
NORMALIZATIONS = ("unit_volume", "reference")
CHAR_BACKENDS = ("cartan-reduced", "gauss-hermite-full", "monte-carlo")
FORMATS = ("json", "csv")


class ConfigError(ValueError):
    """Malformed config text, unknown key, or out-of-range value."""


@dataclass(frozen=True)
class RunConfig:
    """Validated run parameters with documented defaults."""

    # [run]
    group: str = "su2"
    torus_rank: int = 1
    normalization: str = "unit_volume"
    hbar0: float = 1.0
    seed: int = 0
    band_limit: float | None = None  # Casimir cutoff; None -> per-group default
    s_grid: tuple[float, ...] = (0.25, 1.0, 3.0)
    s_prime_grid: tuple[float, ...] = (0.0, 0.5, 3.0)
    pairs_per_cell: int = 2
    identities: tuple[str, ...] = IDENTITY_FAMILIES
    out_dir: str = "reports"
    format: str = "json"
    threads: int = 0  # 0 -> automatic; BKS_VERIFIER_THREADS overrides either way

    # [quadrature]
    char_backend: str = "cartan-reduced"
    points_per_panel: int = 14
    panels: int = 10
    hermite_points: int = 64
    mc_samples: int = 1_000_000
    hl2_points_torus: int = 300
    hl2_points_su2: int = 40
    delta_points_torus: int = 48
    delta_points_su2: int = 44

    # [tolerances]
    tolerance_scale: float = 1.0
    tolerance_overrides: dict = field(default_factory=dict)

    def echo(self) -> dict:
        """Flat, JSON-ready view of every field in declaration order."""
        out = {}
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = list(v)
            out[f.name] = v
        return out


def _floats(text: str) -> tuple[float, ...]:
    items = [p.strip() for p in text.split(",") if p.strip()]
    return tuple(float(p) for p in items)


def _names(text: str) -> tuple[str, ...]:
    if text.strip() == "all":
        return IDENTITY_FAMILIES
    items = tuple(p.strip() for p in text.split(",") if p.strip())
    for name in items:
        if name not in IDENTITY_FAMILIES:
            raise ConfigError(
                f"unknown identity {name!r}; choose from {', '.join(IDENTITY_FAMILIES)}"
            )
    return items


# section -> key -> (attribute, converter)
_SCHEMA = {
    "run": {
        "group": ("group", str),
        "torus_rank": ("torus_rank", int),
        "normalization": ("normalization", str),
        "hbar0": ("hbar0", float),
        "seed": ("seed", int),
        "band_limit": ("band_limit", float),
        "s_grid": ("s_grid", _floats),
        "s_prime_grid": ("s_prime_grid", _floats),
        "pairs_per_cell": ("pairs_per_cell", int),
        "identities": ("identities", _names),
        "out_dir": ("out_dir", str),
        "format": ("format", str),
        "threads": ("threads", int),
    },
    "quadrature": {
        "char_backend": ("char_backend", str),
        "points_per_panel": ("points_per_panel", int),
        "panels": ("panels", int),
        "hermite_points": ("hermite_points", int),
        "mc_samples": ("mc_samples", int),
        "hl2_points_torus": ("hl2_points_torus", int),
        "hl2_points_su2": ("hl2_points_su2", int),
        "delta_points_torus": ("delta_points_torus", int),
        "delta_points_su2": ("delta_points_su2", int),
    },
}

_CHOICE_FIELDS = {
    "group": GROUP_KINDS,
    "normalization": NORMALIZATIONS,
    "char_backend": CHAR_BACKENDS,
    "format": FORMATS,
}


def _validate(cfg: RunConfig) -> RunConfig:
    for name, choices in _CHOICE_FIELDS.items():
        value = getattr(cfg, name)
        if value not in choices:
            raise ConfigError(f"{name} must be one of {', '.join(choices)}, got {value!r}")
    if cfg.hbar0 <= 0.0:
        raise ConfigError("hbar0 must be positive")
    if cfg.torus_rank < 1:
        raise ConfigError("torus_rank must be at least 1")
    if any(s < 0.0 for s in cfg.s_grid + cfg.s_prime_grid):
        raise ConfigError("grid values must be nonnegative")
    if not cfg.s_grid:
        raise ConfigError("s_grid must not be empty")
    if cfg.tolerance_scale <= 0.0:
        raise ConfigError("tolerance scale must be positive")
    for key in cfg.tolerance_overrides:
        if key not in IDENTITY_FAMILIES:
            raise ConfigError(f"unknown key {key!r} in section [tolerances]")
    return cfg


def parse_config(text: str) -> RunConfig:
    """Parse config text; reject unknown sections, keys, and bad values."""
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(f"config parse error: {exc}") from exc

    values: dict = {}
    overrides: dict = {}
    for section in parser.sections():
        if section == "tolerances":
            for key, raw in parser.items(section):
                try:
                    value = float(raw)
                except ValueError as exc:
                    raise ConfigError(f"[tolerances] {key}: not a number: {raw!r}") from exc
                if key == "scale":
                    values["tolerance_scale"] = value
                else:
                    overrides[key] = value
            continue
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}]")
        table = _SCHEMA[section]
        for key, raw in parser.items(section):
            if key not in table:
                raise ConfigError(f"unknown key {key!r} in section [{section}]")
            attr, conv = table[key]
            try:
                values[attr] = conv(raw)
            except ConfigError:
                raise
            except ValueError as exc:
                raise ConfigError(f"[{section}] {key}: bad value {raw!r}") from exc
    values["tolerance_overrides"] = overrides
    return _validate(RunConfig(**values))


def load_config(path: str) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def default_config(**replacements) -> RunConfig:
    """Programmatic construction with the same validation as parsing."""
    return _validate(RunConfig(**replacements))
