"""Run configuration: flat ``key = value`` text with dotted keys.

Example::

    # protocol run
    params.mu = 0.01
    params.N = 10000
    initial.m0 = 10

Lines starting with ``#`` are comments.  ``--set key=value`` flags are
applied after the file.  Unknown keys and malformed values are errors.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .params import ModelParams

MODES = ("oracle", "rate", "displacement", "protocol", "sweep", "verify")


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _int(text: str) -> int:
    v = float(text)
    if v != int(v):
        raise ValueError(f"not an integer: {text!r}")
    return int(v)


def _float_list(text: str) -> tuple[float, ...]:
    """Comma-separated values, or ``start:stop:num`` for an inclusive linear grid."""
    text = text.strip()
    if ":" in text:
        start, stop, num = text.split(":")
        return tuple(float(v) for v in np.linspace(float(start), float(stop), _int(num)))
    return tuple(float(v) for v in text.split(",") if v.strip())


def _str(text: str) -> str:
    return text.strip()


# key -> (RunConfig attribute, parser)
KEYS = {f"params.{f.name}": (f.name, _int if f.name == "N" else float) for f in fields(ModelParams)}
KEYS.update({
    "layout.n_atoms": ("n_atoms", _int),
    "layout.n_b": ("n_b", _int),
    "layout.n_c": ("n_c", _int),
    "integ.dt": ("dt", float),
    "integ.t_final": ("t_final", float),
    "integ.stride": ("stride", _int),
    "initial.m0": ("m0", float),
    "initial.alpha": ("alpha", float),
    "initial.zeta0": ("zeta0", float),
    "oracle.exact_coupling": ("exact_coupling", _bool),
    "displacement.periods": ("periods", float),
    "protocol.max_cycles": ("max_cycles", _int),
    "protocol.stop_tol": ("stop_tol", float),
    "protocol.mode": ("protocol_mode", _str),
    "protocol.stage_duration": ("stage_duration", float),
    "protocol.N_list": ("N_list", _float_list),
    "sweep.axis1": ("axis1", _str),
    "sweep.values1": ("values1", _float_list),
    "sweep.axis2": ("axis2", _str),
    "sweep.values2": ("values2", _float_list),
    "verify.oracle": ("verify_oracle", _bool),
    "out": ("out", _str),
    "seed": ("seed", _int),
    "workers": ("workers", _int),
})


@dataclass
class RunConfig:
    mode: str
    params: ModelParams = field(default_factory=ModelParams)
    n_atoms: int = 2
    n_b: int | None = None
    n_c: int | None = None
    dt: float | None = None
    t_final: float | None = None
    stride: int = 20
    m0: float = 10.0
    alpha: float = 0.0
    zeta0: float | None = None
    exact_coupling: bool = False
    periods: float = 100.0
    max_cycles: int = 1000
    stop_tol: float = 1e-12
    protocol_mode: str = "closed"
    stage_duration: float | None = None
    N_list: tuple = (1e2, 1e3, 1e4, 1e5, 1e6)
    axis1: str | None = None
    values1: tuple = ()
    axis2: str | None = None
    values2: tuple = ()
    verify_oracle: bool = False
    out: str = "out"
    seed: int = 0
    workers: int = 1
    source: dict = field(default_factory=dict)

    def sweep_axes(self) -> list[tuple[str, tuple]]:
        axes = []
        for name, vals in ((self.axis1, self.values1), (self.axis2, self.values2)):
            if name is not None:
                axes.append((name, vals))
        return axes

    def to_text(self) -> str:
        """Serialise every explicitly set key; floats use 17 significant digits."""
        lines = []
        for key in sorted(self.source):
            lines.append(f"{key} = {format_value(self.source_value(key))}")
        return "\n".join(lines) + "\n"

    def source_value(self, key):
        attr = KEYS[key][0]
        if key.startswith("params."):
            return getattr(self.params, attr)
        return getattr(self, attr)


def format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.17g}"
    if isinstance(v, tuple):
        return ",".join(format_value(x) for x in v)
    return str(v)


def _parse_lines(text: str, origin: str) -> list[tuple[str, str, str]]:
    entries = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{origin}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        entries.append((key, value, f"{origin}:{lineno}"))
    return entries


def parse_config(mode: str, text: str | None = None, path: str | Path | None = None,
                 overrides=()) -> RunConfig:
    """Build and validate a RunConfig.

    Parameter-invariant violations (e.g. mu > 0.2 nu) surface as
    ParameterError; everything else as ConfigError.
    """
    if mode not in MODES:
        raise ConfigError(f"unknown mode {mode!r}; choose one of {', '.join(MODES)}")
    entries = []
    if path is not None:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        entries += _parse_lines(text, str(path))
    elif text is not None:
        entries += _parse_lines(text, "<config>")
    for k, item in enumerate(overrides, start=1):
        if "=" not in item:
            raise ConfigError(f"--set #{k}: expected key=value, got {item!r}")
        key, value = (s.strip() for s in item.split("=", 1))
        entries.append((key, value, f"--set {key}"))

    values, pvalues, source = {}, {}, {}
    for key, raw, where in entries:
        if key not in KEYS:
            raise ConfigError(f"{where}: unknown key {key!r}")
        attr, conv = KEYS[key]
        try:
            val = conv(raw)
        except ValueError as exc:
            raise ConfigError(f"{where}: bad value for {key!r}: {raw!r} ({exc})") from None
        (pvalues if key.startswith("params.") else values)[attr] = val
        source[key] = raw
    cfg = RunConfig(mode=mode, params=ModelParams(**pvalues), source=source, **values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    if cfg.mode == "oracle":
        missing = [k for k, v in (("layout.n_b", cfg.n_b), ("layout.n_c", cfg.n_c)) if v is None]
        if missing:
            raise ConfigError(f"oracle mode requires {', '.join(missing)}")
        if cfg.t_final is None:
            raise ConfigError("oracle mode requires integ.t_final")
    if cfg.mode == "sweep":
        axes = cfg.sweep_axes()
        if not 1 <= len(axes) <= 2:
            raise ConfigError("sweep mode requires one or two axes (sweep.axis1 [, sweep.axis2])")
        for name, vals in axes:
            if name not in KEYS or not name.startswith("params."):
                raise ConfigError(f"sweep axis {name!r} is not a params.* key")
            if not vals:
                raise ConfigError(f"sweep axis {name!r} has no values")
    if cfg.protocol_mode not in ("closed", "coupled"):
        raise ConfigError(f"protocol.mode must be 'closed' or 'coupled', got {cfg.protocol_mode!r}")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.stride < 1:
        raise ConfigError("integ.stride must be >= 1")
