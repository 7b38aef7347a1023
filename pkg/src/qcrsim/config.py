"""Strict flat key-value experiment configuration.

The config format is line-oriented text: ``section.key = value`` with
``#`` comments and blank lines.  Every key has a registered type and
default; unknown keys are rejected naming the nearest valid key, so a
typo can never silently fall back to a default.  An empty file is a
valid all-defaults config.

``echo_config`` serializes the fully resolved configuration (every
key, defaults included, sorted) in the same format using exact-decimal
float reprs, so load -> echo -> load round-trips bitwise.  Pipelines
write this echo next to their outputs as the reproducibility record.
"""

from __future__ import annotations

import difflib
from dataclasses import dataclass, field
from pathlib import Path

from .dynamics import BiasPulse
from .qcr import KAPPA_EFF_DEFAULT, CouplingSpec, JunctionSpec
from .readout import ReadoutModel, default_model
from .system import ResonatorSpec, SystemSpec, TransmonSpec

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "REGISTRY",
    "echo_config",
    "load_config",
    "parse_config",
    "write_echo",
]


class ConfigError(ValueError):
    """A config line failed to parse or validate; carries diagnostics."""


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    raise ValueError(f"expected true or false, got {text!r}")


#: key -> (type, default).  This is the complete config surface.
REGISTRY: dict[str, tuple[type, object]] = {
    "transmon.omega_ge": (float, 4.09),
    "transmon.alpha": (float, -0.273),
    "transmon.n_levels": (int, 6),
    "reset.omega": (float, 4.67),
    "reset.g": (float, 0.0596),
    "reset.n_levels": (int, 4),
    "readout.omega": (float, 7.44),
    "readout.g": (float, 0.0704),
    "readout.n_levels": (int, 4),
    "junction.delta": (float, 0.215),
    "junction.gamma_d": (float, 2.3e-3),
    "junction.r_t": (float, 13.8),
    "junction.t_n": (float, 0.1),
    "coupling.kappa_eff": (float, KAPPA_EFF_DEFAULT),
    "coupling.purcell_filter": (bool, True),
    "pulse.dc_offset": (float, 0.0),
    "pulse.amplitude": (float, 1.2),
    "pulse.duration": (float, 100.0),
    "pulse.period": (float, 10.0),
    "geometry.separation": (float, 3.0),
    "geometry.sigma": (float, 1.0),
    "geometry.h_scale": (float, 2.0),
    "run.seed": (int, 0),
    "run.outdir": (str, "out"),
}


def _coerce(key: str, text: str, line_no: int) -> object:
    kind, _ = REGISTRY[key]
    try:
        if kind is bool:
            return _parse_bool(text)
        if kind is int:
            return int(text)
        if kind is float:
            return float(text)
        return text
    except ValueError as exc:
        raise ConfigError(
            f"line {line_no}: bad value for {key}: {exc}"
        ) from None


def parse_config(text: str) -> dict[str, object]:
    """Parse config text into a {key: value} dict of the overridden keys.

    Raises ConfigError with a line number on malformed lines, unknown
    keys (naming the nearest registered key), duplicate keys, and
    uncoercible values.
    """
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(
                f"line {line_no}: expected 'section.key = value', got {raw!r}"
            )
        key, _, value_text = line.partition("=")
        key, value_text = key.strip(), value_text.strip()
        if key not in REGISTRY:
            nearest = difflib.get_close_matches(key, REGISTRY, n=1, cutoff=0.0)
            raise ConfigError(
                f"line {line_no}: unknown key {key!r}"
                + (f" (nearest valid key: {nearest[0]!r})" if nearest else "")
            )
        if key in values:
            raise ConfigError(f"line {line_no}: duplicate key {key!r}")
        values[key] = _coerce(key, value_text, line_no)
    return values


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment configuration.

    values holds every registered key (defaults merged in); the
    as_* accessors build validated module spec objects from the blocks,
    re-raising validation errors prefixed with the offending block.
    """

    values: dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        merged = {key: default for key, (_, default) in REGISTRY.items()}
        merged.update(self.values)
        object.__setattr__(self, "values", merged)

    def __getitem__(self, key: str) -> object:
        return self.values[key]

    @property
    def seed(self) -> int:
        return int(self.values["run.seed"])  # type: ignore[arg-type]

    @property
    def outdir(self) -> str:
        return str(self.values["run.outdir"])

    def _build(self, block: str, factory):
        try:
            return factory()
        except ValueError as exc:
            raise ConfigError(f"{block} block invalid: {exc}") from None

    def as_system(self) -> SystemSpec:
        v = self.values
        return self._build(
            "system",
            lambda: SystemSpec(
                transmon=TransmonSpec(
                    omega_ge=v["transmon.omega_ge"],
                    alpha=v["transmon.alpha"],
                    n_levels=v["transmon.n_levels"],
                ),
                reset_resonator=ResonatorSpec(
                    omega=v["reset.omega"],
                    g=v["reset.g"],
                    n_levels=v["reset.n_levels"],
                ),
                readout_resonator=ResonatorSpec(
                    omega=v["readout.omega"],
                    g=v["readout.g"],
                    n_levels=v["readout.n_levels"],
                ),
            ),
        )

    def as_junction(self) -> JunctionSpec:
        v = self.values
        return self._build(
            "junction",
            lambda: JunctionSpec(
                delta=v["junction.delta"],
                gamma_d=v["junction.gamma_d"],
                r_t=v["junction.r_t"],
                t_n=v["junction.t_n"],
            ),
        )

    def as_coupling(self) -> CouplingSpec:
        v = self.values
        return self._build(
            "coupling",
            lambda: CouplingSpec(
                kappa_eff=v["coupling.kappa_eff"],
                purcell_filter=v["coupling.purcell_filter"],
            ),
        )

    def as_pulse(self, **overrides) -> BiasPulse:
        v = self.values
        kwargs = {
            "dc_offset": v["pulse.dc_offset"],
            "amplitude": v["pulse.amplitude"],
            "duration": v["pulse.duration"],
            "period": v["pulse.period"],
        }
        kwargs.update(overrides)
        return self._build("pulse", lambda: BiasPulse(**kwargs))

    def as_readout_model(self) -> ReadoutModel:
        v = self.values
        return self._build(
            "geometry",
            lambda: default_model(
                separation=v["geometry.separation"],
                sigma=v["geometry.sigma"],
                h_scale=v["geometry.h_scale"],
            ),
        )

    def validate(self) -> "ExperimentConfig":
        """Build every block once so invariant violations surface now."""
        self.as_system()
        self.as_junction()
        self.as_coupling()
        self.as_pulse()
        self.as_readout_model()
        return self


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Load and validate a config file; None means all defaults."""
    if path is None:
        return ExperimentConfig().validate()
    text = Path(path).read_text(encoding="utf-8")
    return ExperimentConfig(parse_config(text)).validate()


def _format_value(value: object) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def echo_config(config: ExperimentConfig) -> str:
    """Serialize every resolved key, sorted, in loadable form."""
    lines = [
        f"{key} = {_format_value(config.values[key])}"
        for key in sorted(REGISTRY)
    ]
    return "\n".join(lines) + "\n"


def write_echo(config: ExperimentConfig, path: str | Path) -> Path:
    """Write the resolved-config echo file and return its path."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(echo_config(config), encoding="utf-8", newline="\n")
    return target
