"""Experiment configurations and their INI loader.

A config file has one section per subcommand (``[quad-fixed]``,
``[servo-sweep]``, ...) with flat ``key = value`` entries; list values are
comma-separated. Unknown keys are rejected.
"""

from __future__ import annotations

import configparser
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..signals import FAMILIES, SignalDomain

PRODUCT_PAIRS = ("periodic*periodic", "periodic*gaussian_mixture", "gaussian_mixture*gaussian_mixture")
DEFAULT_ALPHAS = tuple(2.0 ** -k for k in range(18, 5, -1))


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class QuadExperimentConfig:
    families: tuple[str, ...] = ("periodic", "gaussian_mixture")
    gammas: tuple[float, ...] = (0.5, 0.75, 0.875)
    ns: tuple[int, ...] = (5, 10, 25, 50, 100)
    partition: str = "uniform"
    trials: int = 10_000
    seed: int = 0
    start: float = 0.0
    end: float = 3.0

    def __post_init__(self):
        if self.partition not in ("uniform", "stochastic"):
            raise ConfigError(f"partition must be uniform or stochastic, got {self.partition!r}")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        if not self.ns or any(n < 1 for n in self.ns):
            raise ConfigError("every n must be a positive integer")
        if any(not 0.0 < g <= 1.0 for g in self.gammas):
            raise ConfigError("every gamma must lie in (0, 1]")
        for fam in self.families:
            parts = fam.split("*")
            if len(parts) > 2 or any(p not in FAMILIES for p in parts):
                raise ConfigError(f"unknown signal family {fam!r}")
        if not self.end > self.start:
            raise ConfigError("domain end must exceed start")

    @property
    def domain(self) -> SignalDomain:
        return SignalDomain(self.start, self.end)


@dataclass(frozen=True)
class ControlExperimentConfig:
    delta_mus: tuple[float, ...] = (0.040, 0.080, 0.120)
    gamma: float = 0.25
    alphas: tuple[float, ...] = DEFAULT_ALPHAS
    variants: tuple[str, ...] = ("dtr", "rp")
    runs: int = 20
    budget: float = 1500.0
    seed: int = 0
    hidden: tuple[int, ...] = (64, 64)
    interval_noise: bool = True
    catastrophe_prob: float = 0.01
    final_fraction: float = 0.2
    curve_bin: float = 60.0
    alpha_dtr: float | None = None
    alpha_rp: float | None = None

    def __post_init__(self):
        if any(d <= 0.0 for d in self.delta_mus):
            raise ConfigError("delta_mus must be positive")
        if any(a < 0.0 for a in self.alphas):
            raise ConfigError("alphas must be non-negative")
        if not 0.0 < self.gamma <= 1.0:
            raise ConfigError("gamma must lie in (0, 1]")
        if self.runs < 1:
            raise ConfigError("runs must be positive")
        if self.budget < 0.0:
            raise ConfigError("budget must be non-negative")
        if any(v not in ("dtr", "rp") for v in self.variants):
            raise ConfigError("variants must be drawn from dtr, rp")
        if len(self.hidden) != 2 or any(h < 1 for h in self.hidden):
            raise ConfigError("hidden must be two positive layer widths")
        if not 0.0 < self.final_fraction <= 1.0:
            raise ConfigError("final_fraction must lie in (0, 1]")
        if not self.curve_bin > 0.0:
            raise ConfigError("curve_bin must be positive")


QUAD_DEFAULTS = {
    "quad-fixed": QuadExperimentConfig(),
    "quad-stochastic": QuadExperimentConfig(gammas=(0.75,), partition="stochastic"),
    "quad-products": QuadExperimentConfig(families=PRODUCT_PAIRS, gammas=(1.0,)),
}


def _convert(kind, raw: str):
    kind = str(kind)
    raw = raw.strip()
    if kind.startswith("tuple"):
        items = [s.strip() for s in raw.split(",") if s.strip()]
        if "int" in kind:
            return tuple(int(s) for s in items)
        if "float" in kind:
            return tuple(float(s) for s in items)
        return tuple(items)
    if kind == "int":
        return int(raw)
    if kind == "bool":
        lowered = raw.lower()
        if lowered in ("1", "true", "yes", "on"):
            return True
        if lowered in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind.startswith("float"):
        return None if raw.lower() in ("", "none") else float(raw)
    return raw


def apply_overrides(base, values: dict[str, str]):
    kinds = {f.name: f.type for f in dataclasses.fields(base)}
    changes = {}
    for key, raw in values.items():
        if key not in kinds:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            changes[key] = _convert(kinds[key], raw)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key}: {exc}") from None
    return dataclasses.replace(base, **changes)


def load(path, section: str, base):
    """Overlay ``[section]`` of the INI file at ``path`` onto ``base``."""
    parser = configparser.ConfigParser()
    path = Path(path)
    try:
        with path.open() as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None
    if not parser.has_section(section):
        return base
    return apply_overrides(base, dict(parser.items(section)))
