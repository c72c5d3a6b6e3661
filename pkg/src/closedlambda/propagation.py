"""
Probe envelope propagation through the cell.

The slowly varying probe amplitude obeys

    dO1/dz = -alpha O1 - i eta O_mu O2 exp(i dk z) / D,
    alpha  = eta Gamma_cb / D,   D = Gamma_cb Gamma_ab + |O2|^2,

with drive and microwave taken as undepleted. It is solved here in closed
form and by fixed-step RK4; :func:`propagate_general` integrates the same
equation with rho_ab supplied by an arbitrary coherence model.
"""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ResonantDenominatorError
from .model import (
    AtomParams,
    CellGeometry,
    DecayModel,
    FieldParams,
    full_steady_state,
    gamma_complex,
    weak_probe_denominator,
)

__all__ = [
    "PropagationResult",
    "CoherenceProvider",
    "absorption_coefficient",
    "microwave_source",
    "propagate_closed_form",
    "propagate_ode",
    "propagate_general",
    "full_coherence_source",
    "rk4",
]

RESONANT_TOL = 1e-12
MAX_STEP_FRACTION = 1.0 / 16.0

CoherenceProvider = Callable[[AtomParams, FieldParams], complex]


@dataclass(frozen=True)
class PropagationResult:
    """Probe amplitude at the cell exit.

    ``transmission`` is |out|^2 / |in|^2 when ``normalized`` is true, and the
    absolute output power |out|^2 when the input probe is zero. It is not
    clamped: a microwave source term can push it above one.
    """

    omega1_out: complex
    transmission: float
    alpha: complex
    method: str
    normalized: bool = True


def _result(omega_in, omega_out, alpha, method):
    power = abs(omega_out) ** 2
    power_in = abs(omega_in) ** 2
    if power_in > 0:
        return PropagationResult(omega_out, power / power_in, alpha, method, True)
    return PropagationResult(omega_out, power, alpha, method, False)


def absorption_coefficient(atom: AtomParams, fields: FieldParams) -> complex:
    """Complex EIT absorption coefficient ``eta Gamma_cb / D`` (cm^-1).

    The real part attenuates the envelope, the imaginary part is a phase.
    """
    den = weak_probe_denominator(atom, fields)
    _, g_cb, _ = gamma_complex(atom, fields)
    return atom.eta * g_cb / den


def microwave_source(atom: AtomParams, fields: FieldParams) -> complex:
    """Amplitude ``eta O_mu O2 / D`` multiplying -i exp(i dk z) in the envelope equation."""
    den = weak_probe_denominator(atom, fields)
    return atom.eta * fields.omega_mu * fields.omega2 / den


def propagate_closed_form(atom: AtomParams, fields: FieldParams, cell: CellGeometry) -> PropagationResult:
    """
    Exact solution of the envelope equation across ``[z0, z0 + L]``.

    out = O10 exp(-alpha L)
          - i S / (i dk + alpha) * [exp(i dk (z0 + L)) - exp(i dk z0 - alpha L)]

    with ``S = eta O_mu O2 / D``.

    Raises
    ------
    ResonantDenominatorError
        If ``|i dk + alpha| < 1e-12``. The limit is finite there but this
        form is indeterminate; use :func:`propagate_ode`.
    """
    alpha = absorption_coefficient(atom, fields)
    z0, length, dk = cell.z0, cell.length, fields.delta_k
    out = fields.omega1_in * np.exp(-alpha * length)
    if fields.omega_mu != 0 and atom.eta != 0:
        pole = 1j * dk + alpha
        if abs(pole) < RESONANT_TOL:
            raise ResonantDenominatorError(
                f"|i*delta_k + alpha| = {abs(pole):.3e} < {RESONANT_TOL:g} cm^-1; "
                "use propagate_ode instead"
            )
        src = microwave_source(atom, fields)
        out = out - 1j * src / pole * (
            np.exp(1j * dk * (z0 + length)) - np.exp(1j * dk * z0 - alpha * length)
        )
    return _result(fields.omega1_in, complex(out), alpha, "closed-form")


def _n_steps(cell, step):
    if not (step > 0 and math.isfinite(step)):
        raise ValueError(f"step must be positive, got {step!r}")
    if step > cell.length * MAX_STEP_FRACTION * (1 + 1e-12):
        raise ValueError(
            f"step {step!r} cm exceeds L/16 = {cell.length * MAX_STEP_FRACTION!r} cm"
        )
    # round to the nearest whole number of steps; spacing is L / n
    return max(1, int(round(cell.length / step)))


def rk4(rhs, z0, y0, length, n):
    """Classical fixed-step fourth-order Runge-Kutta for a complex scalar."""
    h = length / n
    y = complex(y0)
    for i in range(n):
        z = z0 + i * h
        k1 = rhs(z, y)
        k2 = rhs(z + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(z + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(z + h, y + h * k3)
        y += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return y


def propagate_ode(atom: AtomParams, fields: FieldParams, cell: CellGeometry, step: float) -> PropagationResult:
    """RK4 integration of the envelope equation from z0 to z0 + L.

    ``step`` must be positive and at most L/16; the actual spacing is
    ``L / round(L / step)``.
    """
    n = _n_steps(cell, step)
    alpha = absorption_coefficient(atom, fields)
    src = microwave_source(atom, fields)
    dk = fields.delta_k

    def rhs(z, y):
        return -alpha * y - 1j * src * np.exp(1j * dk * z)

    out = rk4(rhs, cell.z0, fields.omega1_in, cell.length, n)
    return _result(fields.omega1_in, out, alpha, "ode")


def propagate_general(
    atom: AtomParams,
    fields: FieldParams,
    cell: CellGeometry,
    coherence_source: CoherenceProvider,
    step: float,
) -> PropagationResult:
    """
    RK4 propagation with rho_ab taken from ``coherence_source``.

    At each evaluation point the source sees the local probe envelope as
    ``omega1_in`` and the drive phase-shifted to ``omega2 * exp(i dk z)``, so
    the returned coherence is already referred to the probe carrier. The
    envelope then grows as ``i eta rho_ab``; with
    :func:`~closedlambda.model.weak_probe_coherence` this is identical to
    :func:`propagate_ode`.

    Parameters
    ----------
    coherence_source : callable
        Pure function ``(AtomParams, FieldParams) -> complex``.
    step : float
        As for :func:`propagate_ode`.
    """
    n = _n_steps(cell, step)
    dk, eta = fields.delta_k, atom.eta

    def rhs(z, y):
        local = dataclasses.replace(fields, omega1_in=y, omega2=fields.omega2 * np.exp(1j * dk * z))
        return 1j * eta * coherence_source(atom, local)

    out = rk4(rhs, cell.z0, fields.omega1_in, cell.length, n)
    return _result(fields.omega1_in, out, absorption_coefficient(atom, fields), "ode")


def full_coherence_source(decay_model: DecayModel | None = None) -> CoherenceProvider:
    """Coherence provider backed by the exact three-level steady state."""

    def source(atom, fields):
        return full_steady_state(atom, fields, decay_model).rho_ab

    return source
