"""Numerical cross-checks behind the ``oracle-check`` command."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .errors import ClosedLambdaError
from .model import full_steady_state, weak_probe_coherence
from .propagation import full_coherence_source, propagate_closed_form, propagate_general, propagate_ode

__all__ = ["CheckResult", "run_checks", "weak_probe_error", "WEAK_PROBE_LIMIT", "CONFIGURED_PROBE_TOL"]

WEAK_PROBE_LIMIT = 1e-4
TREND_RATIO = 3.5
CONFIGURED_PROBE_TOL = 0.05
DENSITY_TOL = 1e-12
ODE_TOL = 1e-8
GENERAL_TOL = 1e-3


@dataclass(frozen=True)
class CheckResult:
    name: str
    measured: float
    tolerance: float
    passed: bool
    expected_fail: bool = False
    note: str = ""
    # comparison direction for the report: measured < tol, or measured >= tol
    at_least: bool = False

    @property
    def status(self):
        if self.expected_fail:
            return "XPASS" if self.passed else "XFAIL"
        return "PASS" if self.passed else "FAIL"

    @property
    def ok(self):
        return self.passed or self.expected_fail

    def line(self):
        op = ">=" if self.at_least else "<"
        text = f"{self.status:5s} {self.name}: measured={self.measured:.3e} required {op} {self.tolerance:.3e}"
        return text + (f" ({self.note})" if self.note else "")


def weak_probe_error(atom, fields, decay_model=None):
    """Relative distance between the full steady state rho_ab and the weak-probe formula."""
    exact = full_steady_state(atom, fields, decay_model).rho_ab
    approx = weak_probe_coherence(atom, fields)
    return abs(exact - approx) / abs(approx)


def _probe(fields, magnitude):
    phase = np.exp(1j * np.angle(fields.omega1_in)) if fields.omega1_in else 1.0
    return dataclasses.replace(fields, omega1_in=magnitude * phase, omega_mu=0j)


def _guard(name, tol, fn, **kw):
    try:
        return fn()
    except (ClosedLambdaError, ValueError) as exc:
        return CheckResult(name, float("nan"), tol, False, note=str(exc), **kw)


def run_checks(cfg: RunConfig):
    """Return the list of :class:`CheckResult` for a configuration."""
    atom, fields, cell, decay = cfg.atom, cfg.fields, cfg.cell, cfg.decay
    drive = abs(fields.omega2)
    results = []

    def limit():
        err = weak_probe_error(atom, _probe(fields, 1e-4 * drive), decay)
        return CheckResult("weak_probe_limit", err, WEAK_PROBE_LIMIT, err < WEAK_PROBE_LIMIT,
                           note="probe 1e-4*|omega2|, microwave off")

    def trend():
        errs = [weak_probe_error(atom, _probe(fields, 0.1 * drive / 2**k), decay) for k in range(4)]
        ratio = min(errs[k] / errs[k + 1] for k in range(3))
        return CheckResult("weak_probe_trend", ratio, TREND_RATIO, ratio >= TREND_RATIO,
                           note="error ratio per probe halving from 0.1*|omega2|", at_least=True)

    def configured():
        err = weak_probe_error(atom, _probe(fields, abs(fields.omega1_in)), decay)
        return CheckResult("weak_probe_configured", err, CONFIGURED_PROBE_TOL, err < CONFIGURED_PROBE_TOL,
                           expected_fail=cfg.expect_weak_probe_fail, note="configured probe, microwave off")

    def density():
        m = full_steady_state(atom, fields, decay).matrix
        dev = max(np.max(np.abs(m - m.conj().T)), abs(np.trace(m) - 1.0),
                  max(0.0, -m.diagonal().real.min()), max(0.0, m.diagonal().real.max() - 1.0))
        return CheckResult("density_matrix", float(dev), DENSITY_TOL, dev < DENSITY_TOL)

    def ode():
        points = [(fields.delta, cell.z0)]
        if cfg.detuning_grid is not None:
            points += [(d, cell.z0) for d in cfg.detuning_grid.values()]
        if cfg.position_grid is not None:
            points += [(0.0, z) for z in cfg.position_grid.values()]
        worst = 0.0
        for delta, z0 in points:
            f = dataclasses.replace(fields, delta=float(delta))
            c = dataclasses.replace(cell, z0=float(z0))
            exact = propagate_closed_form(atom, f, c).omega1_out
            approx = propagate_ode(atom, f, c, cfg.step).omega1_out
            worst = max(worst, abs(exact - approx) / max(abs(exact), 1e-300))
        return CheckResult("closed_form_vs_ode", worst, ODE_TOL, worst < ODE_TOL,
                           note=f"{len(points)} points, {cfg.steps} steps")

    def general():
        f = _probe(fields, 1e-3 * drive)
        exact = propagate_closed_form(atom, f, cell).omega1_out
        approx = propagate_general(atom, f, cell, full_coherence_source(decay), cfg.step).omega1_out
        err = abs(exact - approx) / abs(exact)
        return CheckResult("full_propagation", err, GENERAL_TOL, err < GENERAL_TOL,
                           note="full steady state along the cell, probe 1e-3*|omega2|, microwave off")

    results.append(_guard("weak_probe_limit", WEAK_PROBE_LIMIT, limit))
    results.append(_guard("weak_probe_trend", TREND_RATIO, trend, at_least=True))
    results.append(_guard("weak_probe_configured", CONFIGURED_PROBE_TOL, configured,
                          expected_fail=cfg.expect_weak_probe_fail))
    results.append(_guard("density_matrix", DENSITY_TOL, density))
    results.append(_guard("closed_form_vs_ode", ODE_TOL, ode))
    results.append(_guard("full_propagation", GENERAL_TOL, general))
    return results
