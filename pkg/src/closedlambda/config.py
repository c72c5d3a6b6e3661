"""
Flat ``key = value`` run configuration.

``#`` starts a comment, complex numbers are written ``re+imj`` and booleans
as ``true``/``false``. Unknown or repeated keys are rejected.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from importlib import resources
from typing import Optional

from .errors import ConfigError, ValidationError
from .model import AtomParams, CellGeometry, DecayModel, FieldParams

__all__ = ["Grid", "RunConfig", "parse_config", "render_config", "load_config", "fig6_config_text", "REQUIRED_KEYS"]

POLARIZATIONS = ("right", "left", "both")


@dataclass(frozen=True)
class Grid:
    start: float
    stop: float
    count: int

    def __post_init__(self):
        if not self.start < self.stop:
            raise ValidationError("grid", f"start {self.start!r} must be below stop {self.stop!r}")
        if self.count < 2:
            raise ValidationError("grid", f"count must be >= 2, got {self.count!r}")

    def values(self):
        import numpy as np

        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class RunConfig:
    atom: AtomParams
    fields: FieldParams
    cell: CellGeometry
    detuning_grid: Optional[Grid] = None
    position_grid: Optional[Grid] = None
    polarization: str = "right"
    steps: int = 512
    spectrum_out: str = "spectrum.csv"
    phase_out: str = "phase_scan.csv"
    seed: Optional[int] = None
    noise_sigma: float = 0.0
    expect_weak_probe_fail: bool = False
    decay: DecayModel = field(default_factory=DecayModel)

    def __post_init__(self):
        if self.polarization not in POLARIZATIONS:
            raise ValidationError("polarization", f"must be one of {POLARIZATIONS}, got {self.polarization!r}")
        if self.steps < 1:
            raise ValidationError("steps", f"must be >= 1, got {self.steps!r}")
        for name in ("spectrum_out", "phase_out"):
            if not getattr(self, name):
                raise ValidationError(name, "path must be nonempty")
        if self.noise_sigma < 0:
            raise ValidationError("noise_sigma", "must be >= 0")
        if self.seed is not None and not 0 <= self.seed < 2**64:
            raise ValidationError("seed", "must be an unsigned 64-bit integer")

    @property
    def step(self):
        return self.cell.length / self.steps


def _bool(text):
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ValueError(f"expected true or false, got {text!r}")


def _complex(text):
    return complex(text.replace(" ", ""))


def _optional_int(text):
    return None if text.lower() == "none" else int(text)


def _optional_float(text):
    return None if text.lower() == "none" else float(text)


# key -> (parser, default); a default of REQUIRED marks mandatory keys
REQUIRED = object()
_KEYS = {
    "gamma_ab": (float, REQUIRED),
    "gamma_cb": (float, REQUIRED),
    "gamma_ac": (_optional_float, None),
    "eta": (float, REQUIRED),
    "omega1_in": (_complex, REQUIRED),
    "omega2": (_complex, REQUIRED),
    "omega_mu": (_complex, REQUIRED),
    "delta": (float, 0.0),
    "delta_k": (float, REQUIRED),
    "z0": (float, 0.0),
    "length": (float, REQUIRED),
    "detuning_min": (float, None),
    "detuning_max": (float, None),
    "detuning_count": (int, None),
    "z0_min": (float, None),
    "z0_max": (float, None),
    "z0_count": (int, None),
    "polarization": (str, "right"),
    "steps": (int, 512),
    "spectrum_out": (str, "spectrum.csv"),
    "phase_out": (str, "phase_scan.csv"),
    "seed": (_optional_int, None),
    "noise_sigma": (float, 0.0),
    "expect_weak_probe_fail": (_bool, False),
    "decay_rate_a": (_optional_float, None),
    "branching_b": (float, 0.5),
    "ground_exchange": (float, 0.0),
}
REQUIRED_KEYS = tuple(k for k, (_, d) in _KEYS.items() if d is REQUIRED)


def _grid(values, prefix, names):
    given = [values[n] is not None for n in names]
    if not any(given):
        return None
    if not all(given):
        missing = [n for n, g in zip(names, given) if not g]
        raise ConfigError(f"{prefix} grid is incomplete; missing {', '.join(missing)}")
    try:
        return Grid(*(values[n] for n in names))
    except ValidationError as exc:
        raise ValidationError(names[0], str(exc)) from exc


def parse_config(text: str) -> RunConfig:
    """Parse and validate a configuration document.

    Raises ``ConfigError`` (with a line number where one applies) for syntax,
    unknown keys, bad values or missing required keys, and ``ValidationError``
    naming the field for out-of-domain values.
    """
    raw = {}
    lines = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"expected 'key = value', got {body!r}", lineno)
        key, value = (part.strip() for part in body.split("=", 1))
        if key not in _KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno)
        if key in raw:
            raise ConfigError(f"duplicate key {key!r} (first on line {lines[key]})", lineno)
        if not value:
            raise ConfigError(f"empty value for {key!r}", lineno)
        parser = _KEYS[key][0]
        try:
            raw[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(f"bad value for {key!r}: {exc}", lineno) from exc
        lines[key] = lineno

    missing = [k for k in REQUIRED_KEYS if k not in raw]
    if missing:
        raise ConfigError("missing required keys: " + ", ".join(missing))

    v = {k: raw.get(k, default) for k, (_, default) in _KEYS.items()}
    atom = AtomParams(v["gamma_ab"], v["gamma_cb"], v["eta"], gamma_ac=v["gamma_ac"])
    fields = FieldParams(v["omega1_in"], v["omega2"], v["omega_mu"], v["delta"], v["delta_k"])
    cell = CellGeometry(v["z0"], v["length"])
    decay = DecayModel(v["decay_rate_a"], v["branching_b"], v["ground_exchange"])
    return RunConfig(
        atom=atom,
        fields=fields,
        cell=cell,
        detuning_grid=_grid(v, "detuning", ("detuning_min", "detuning_max", "detuning_count")),
        position_grid=_grid(v, "position", ("z0_min", "z0_max", "z0_count")),
        polarization=v["polarization"],
        steps=v["steps"],
        spectrum_out=v["spectrum_out"],
        phase_out=v["phase_out"],
        seed=v["seed"],
        noise_sigma=v["noise_sigma"],
        expect_weak_probe_fail=v["expect_weak_probe_fail"],
        decay=decay,
    )


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "none"
    if isinstance(value, complex):
        im = repr(value.imag)
        if not im.startswith("-"):
            im = "+" + im
        return f"{value.real!r}{im}j"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_config(cfg: RunConfig) -> str:
    """Inverse of :func:`parse_config`; every key is written explicitly."""
    a, f, c, d = cfg.atom, cfg.fields, cfg.cell, cfg.decay
    pairs = [
        ("gamma_ab", a.gamma_ab), ("gamma_ac", a.gamma_ac), ("gamma_cb", a.gamma_cb), ("eta", a.eta),
        ("omega1_in", f.omega1_in), ("omega2", f.omega2), ("omega_mu", f.omega_mu),
        ("delta", f.delta), ("delta_k", f.delta_k),
        ("z0", c.z0), ("length", c.length),
    ]
    for prefix, grid in (("detuning", cfg.detuning_grid), ("z0", cfg.position_grid)):
        if grid is not None:
            pairs += [(f"{prefix}_min", grid.start), (f"{prefix}_max", grid.stop), (f"{prefix}_count", grid.count)]
    pairs += [
        ("polarization", cfg.polarization), ("steps", cfg.steps),
        ("spectrum_out", cfg.spectrum_out), ("phase_out", cfg.phase_out),
        ("seed", cfg.seed), ("noise_sigma", cfg.noise_sigma),
        ("expect_weak_probe_fail", cfg.expect_weak_probe_fail),
        ("decay_rate_a", d.rate_a), ("branching_b", d.branching_b), ("ground_exchange", d.ground_exchange),
    ]
    return "".join(f"{k} = {_fmt(v)}\n" for k, v in pairs)


def load_config(path) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def fig6_config_text() -> str:
    """The bundled ``fig6.cfg`` document."""
    return resources.files("closedlambda").joinpath("data/fig6.cfg").read_text(encoding="utf-8")


def with_overrides(cfg: RunConfig, **changes) -> RunConfig:
    """``dataclasses.replace`` that skips ``None`` values."""
    return dataclasses.replace(cfg, **{k: v for k, v in changes.items() if v is not None})
