"""
Scan drivers: probe transmission versus detuning, EIT peak amplitude versus
cell position, the circular-polarization phase flip, and sinusoid fitting of
the position dependence.
"""
from __future__ import annotations

import dataclasses
import enum
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import least_squares

from .errors import ClosedLambdaError, InsufficientDataError, ValidationError
from .model import AtomParams, CellGeometry, FieldParams
from .propagation import propagate_closed_form

__all__ = [
    "Polarization",
    "Spectrum",
    "PhaseScan",
    "SinusoidFit",
    "parallel_map",
    "scan_detuning",
    "scan_position",
    "apply_polarization",
    "fit_sinusoid",
    "peak_amplitude",
    "sinusoid",
]


class Polarization(str, enum.Enum):
    RIGHT = "right"
    LEFT = "left"


def _as_array(name, values, min_len):
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size < min_len:
        raise ValidationError(name, f"need a 1-D array with at least {min_len} entries")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Transmission on an increasing detuning grid, with the inputs that made it."""

    detunings: np.ndarray
    transmissions: np.ndarray
    atom: Optional[AtomParams] = None
    fields: Optional[FieldParams] = None
    cell: Optional[CellGeometry] = None

    def __post_init__(self):
        d = _as_array("detunings", self.detunings, 1)
        t = _as_array("transmissions", self.transmissions, 1)
        if d.shape != t.shape:
            raise ValidationError("transmissions", "length differs from detunings")
        if np.any(np.diff(d) <= 0):
            raise ValidationError("detunings", "must be strictly increasing")
        object.__setattr__(self, "detunings", d)
        object.__setattr__(self, "transmissions", t)


@dataclass(frozen=True, eq=False)
class PhaseScan:
    """EIT peak amplitude (transmission at zero detuning) per cell entry position."""

    positions: np.ndarray
    peak_amplitudes: np.ndarray
    polarization: Polarization = Polarization.RIGHT

    def __post_init__(self):
        z = _as_array("positions", self.positions, 4)
        p = _as_array("peak_amplitudes", self.peak_amplitudes, 4)
        if z.shape != p.shape:
            raise ValidationError("peak_amplitudes", "length differs from positions")
        object.__setattr__(self, "positions", z)
        object.__setattr__(self, "peak_amplitudes", p)
        object.__setattr__(self, "polarization", Polarization(self.polarization))


@dataclass(frozen=True)
class SinusoidFit:
    """Least-squares fit of ``offset + amplitude * sin(2 pi z / period + phase)``."""

    offset: float
    amplitude: float
    period: float
    phase: float
    residual_rms: float
    converged: bool
    iterations: int
    degenerate: bool = False

    def __call__(self, z):
        return sinusoid(z, self.offset, self.amplitude, self.period, self.phase)


def sinusoid(z, offset, amplitude, period, phase):
    return offset + amplitude * np.sin(2.0 * np.pi * np.asarray(z) / period + phase)


def parallel_map(func, items, workers=None):
    """Ordered map; thread pool when ``workers > 1``."""
    items = list(items)
    if workers is None or workers <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))


def apply_polarization(fields: FieldParams, polarization) -> FieldParams:
    """Left circular polarization reverses the sign of the microwave coupling."""
    if Polarization(polarization) is Polarization.LEFT:
        return dataclasses.replace(fields, omega_mu=-fields.omega_mu)
    return fields


def scan_detuning(
    atom: AtomParams,
    fields: FieldParams,
    cell: CellGeometry,
    delta_min: float,
    delta_max: float,
    count: int,
    workers: int | None = None,
) -> Spectrum:
    """Closed-form transmission on ``count`` evenly spaced detunings.

    Errors from the propagator are re-raised with the offending detuning
    prepended to the message.
    """
    if count < 2:
        raise ValidationError("count", f"need at least 2 detunings, got {count}")
    if not delta_min < delta_max:
        raise ValidationError("delta_max", "must exceed delta_min")
    grid = np.linspace(delta_min, delta_max, count)

    def one(delta):
        try:
            return propagate_closed_form(atom, dataclasses.replace(fields, delta=delta), cell).transmission
        except ClosedLambdaError as exc:
            raise type(exc)(f"at delta={float(delta)!r}: {exc}") from exc

    return Spectrum(grid, parallel_map(one, grid, workers), atom, fields, cell)


def scan_position(
    atom: AtomParams,
    fields: FieldParams,
    cell: CellGeometry,
    positions: Sequence[float],
    polarization=Polarization.RIGHT,
    workers: int | None = None,
) -> PhaseScan:
    """Zero-detuning transmission for each cell entry position.

    ``cell.z0`` is ignored; only its length is used. Warns if the grid spans
    less than one beat period ``2 pi / delta_k``.
    """
    z = np.asarray(positions, dtype=float)
    if fields.delta_k != 0 and z.size and np.ptp(z) < 2 * np.pi / abs(fields.delta_k):
        warnings.warn(
            f"position grid spans {np.ptp(z):.3g} cm, less than one period "
            f"{2 * np.pi / abs(fields.delta_k):.3g} cm",
            stacklevel=2,
        )
    resonant = apply_polarization(dataclasses.replace(fields, delta=0.0), polarization)

    def one(z0):
        try:
            geom = dataclasses.replace(cell, z0=z0)
            return propagate_closed_form(atom, resonant, geom).transmission
        except ClosedLambdaError as exc:
            raise type(exc)(f"at z0={float(z0)!r}: {exc}") from exc

    return PhaseScan(z, parallel_map(one, z, workers), Polarization(polarization))


def peak_amplitude(spectrum: Spectrum) -> float:
    """Transmission at the grid point nearest zero detuning (ties: the lower one)."""
    idx = int(np.argmin(np.abs(spectrum.detunings)))
    return float(spectrum.transmissions[idx])


def _initial_guess(z, y, fix_period):
    offset = float(np.mean(y))
    amp = 0.5 * float(np.max(y) - np.min(y))
    yc = y - offset
    span = float(np.ptp(z))
    if fix_period is not None:
        freq = 1.0 / fix_period
    else:
        # direct DFT on a fine frequency grid (handles non-uniform sampling);
        # lowest frequency is one cycle per span
        gaps = np.diff(np.sort(z))
        dz = np.min(gaps[gaps > 0])
        freqs = np.linspace(1.0 / span, 0.5 / dz, 4096)
        power = np.abs(np.exp(-2j * np.pi * np.outer(freqs, z)) @ yc) ** 2
        freq = float(freqs[np.argmax(power)])
    arg = 2.0 * np.pi * freq * z
    s, c = float(yc @ np.sin(arg)), float(yc @ np.cos(arg))
    phase = math.atan2(c, s)
    return offset, amp, 1.0 / freq, phase


def _wrap(phase):
    return (phase + np.pi) % (2.0 * np.pi) - np.pi


def fit_sinusoid(scan: PhaseScan, fix_period: float | None = None, max_iterations: int = 200) -> SinusoidFit:
    """
    Levenberg-Marquardt fit of a sinusoid to a position scan.

    Initial values come from the data: mean, half the peak-to-peak range, the
    dominant Fourier component (unless ``fix_period`` is given) and the
    quadrature projection at that frequency.

    Parameters
    ----------
    scan : PhaseScan
    fix_period : float, optional
        Hold the period at this value and fit the other three parameters.
    max_iterations : int
        Iteration budget; ``converged`` is false if the parameter step is
        still above 1e-10 relative when it runs out.

    Returns
    -------
    SinusoidFit
        With ``amplitude >= 0`` and ``phase`` in [-pi, pi). A flat scan
        (peak-to-peak below 1e-12 of the mean) is returned unfitted with
        ``degenerate=True``.

    Raises
    ------
    InsufficientDataError
        Fewer than four points, or less than one period spanned when the
        period is free.
    """
    z = np.asarray(scan.positions, dtype=float)
    y = np.asarray(scan.peak_amplitudes, dtype=float)
    if z.size < 4:
        raise InsufficientDataError(f"need at least 4 points, got {z.size}")
    if np.unique(z).size < 4:
        raise InsufficientDataError("need at least 4 distinct positions")
    if fix_period is not None and not fix_period > 0:
        raise ValidationError("fix_period", "must be positive")

    offset0, amp0, period0, phase0 = _initial_guess(z, y, fix_period)
    if amp0 <= 1e-12 * abs(offset0) or amp0 == 0.0:
        rms = float(np.sqrt(np.mean((y - offset0) ** 2)))
        period = fix_period if fix_period is not None else float(np.ptp(z))
        return SinusoidFit(offset0, amp0, period, 0.0, rms, False, 0, degenerate=True)
    def unpack(p):
        if fix_period is None:
            return p
        return p[0], p[1], fix_period, p[2]

    def residual(p):
        return sinusoid(z, *unpack(p)) - y

    def jacobian(p):
        a0, a1, lam, phi = unpack(p)
        w = 2.0 * np.pi / lam
        arg = w * z + phi
        cos = np.cos(arg)
        cols = [np.ones_like(z), np.sin(arg)]
        if fix_period is None:
            cols.append(-a1 * cos * w * z / lam)
        cols.append(a1 * cos)
        return np.column_stack(cols)

    p0 = [offset0, amp0, phase0] if fix_period is not None else [offset0, amp0, period0, phase0]
    sol = least_squares(
        residual, p0, jac=jacobian, method="lm",
        xtol=1e-10, ftol=1e-15, gtol=1e-15, max_nfev=max_iterations,
    )
    a0, a1, lam, phi = unpack(sol.x)
    if fix_period is None and np.ptp(z) < abs(lam) * (1 - 1e-9):
        raise InsufficientDataError(
            f"scan spans {np.ptp(z):.4g}, less than the fitted period {abs(lam):.4g}"
        )
    if a1 < 0:
        a1, phi = -a1, phi + np.pi
    rms = float(np.sqrt(np.mean(residual(sol.x) ** 2)))
    return SinusoidFit(
        offset=float(a0),
        amplitude=float(a1),
        period=float(lam),
        phase=float(_wrap(phi)),
        residual_rms=rms,
        converged=bool(sol.status > 0),
        iterations=int(sol.nfev),
    )
