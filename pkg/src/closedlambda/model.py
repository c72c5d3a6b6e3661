"""
Closed-loop three-level (Lambda + microwave) medium: parameter types, the
weak-probe analytic coherence and the full Liouvillian steady state.

Basis ordering is (|a>, |b>, |c>) = (0, 1, 2): |a> is the excited state,
|b> the ground state holding the population, |c> the second ground level
coupled to |a> by the drive and to |b> by the microwave.

Units are normalized so that rates and Rabi amplitudes are multiples of the
drive strength; lengths are in cm and ``eta`` is in cm^-1 times that
frequency unit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.constants as const

from .errors import (
    DegenerateDenominatorError,
    SingularLiouvillianError,
    ValidationError,
)

__all__ = [
    "AtomParams",
    "FieldParams",
    "CellGeometry",
    "CoherenceSet",
    "DensityMatrix",
    "DecayModel",
    "gamma_complex",
    "weak_probe_denominator",
    "weak_probe_coherence",
    "weak_probe_coherences",
    "hamiltonian",
    "liouvillian",
    "full_steady_state",
    "compute_coupling_constant",
]

A, B, C = 0, 1, 2
DENOMINATOR_TOL = 1e-15
NULL_SPACE_RTOL = 1e-12


def _positive(name, value):
    if not (math.isfinite(value) and value > 0):
        raise ValidationError(name, f"must be finite and > 0, got {value!r}")


def _finite(name, value):
    if not np.isfinite(complex(value)):
        raise ValidationError(name, f"must be finite, got {value!r}")


@dataclass(frozen=True)
class AtomParams:
    """Decoherence rates and propagation coupling of the medium."""

    gamma_ab: float
    gamma_cb: float
    eta: float
    gamma_ac: Optional[float] = None

    def __post_init__(self):
        # gamma_ac is never quoted alongside gamma_ab; default to the same rate
        if self.gamma_ac is None:
            object.__setattr__(self, "gamma_ac", self.gamma_ab)
        for name in ("gamma_ab", "gamma_ac", "gamma_cb", "eta"):
            object.__setattr__(self, name, float(getattr(self, name)))
        _positive("gamma_ab", self.gamma_ab)
        _positive("gamma_ac", self.gamma_ac)
        _positive("gamma_cb", self.gamma_cb)
        if not (math.isfinite(self.eta) and self.eta >= 0):
            raise ValidationError("eta", f"must be finite and >= 0, got {self.eta!r}")


@dataclass(frozen=True)
class FieldParams:
    """Complex Rabi amplitudes, common detuning and optical wave-number mismatch.

    Only one detuning exists: the drive is resonant and probe and microwave
    share ``delta``, so the three-photon resonance holds by construction.
    """

    omega1_in: complex
    omega2: complex
    omega_mu: complex
    delta: float = 0.0
    delta_k: float = 0.0

    def __post_init__(self):
        for name in ("omega1_in", "omega2", "omega_mu"):
            value = complex(getattr(self, name))
            _finite(name, value)
            object.__setattr__(self, name, value)
        for name in ("delta", "delta_k"):
            value = float(getattr(self, name))
            _finite(name, value)
            object.__setattr__(self, name, value)


@dataclass(frozen=True)
class CellGeometry:
    """Cell entry coordinate ``z0`` and length, both in cm."""

    z0: float
    length: float

    def __post_init__(self):
        object.__setattr__(self, "z0", float(self.z0))
        object.__setattr__(self, "length", float(self.length))
        _finite("z0", self.z0)
        _positive("length", self.length)


@dataclass(frozen=True)
class CoherenceSet:
    """Off-diagonal elements rho_ab, rho_ac, rho_cb.

    Not validated on construction: the weak-probe values can leave the
    physical range when the approximation is abused. Use :meth:`is_physical`.
    """

    rho_ab: complex
    rho_ac: complex
    rho_cb: complex

    def is_physical(self):
        return all(abs(v) <= 1.0 for v in (self.rho_ab, self.rho_ac, self.rho_cb))


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Read-only 3x3 density matrix over (|a>, |b>, |c>)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex, copy=True)
        if m.shape != (3, 3):
            raise ValidationError("matrix", f"expected shape (3, 3), got {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    def __eq__(self, other):
        if not isinstance(other, DensityMatrix):
            return NotImplemented
        return bool(np.array_equal(self.matrix, other.matrix))

    __hash__ = None

    @property
    def populations(self):
        return self.matrix.diagonal().real.copy()

    @property
    def rho_ab(self):
        return complex(self.matrix[A, B])

    def coherences(self):
        m = self.matrix
        return CoherenceSet(complex(m[A, B]), complex(m[A, C]), complex(m[C, B]))

    def check(self, tol=1e-12, pop_tol=1e-10):
        """Raise ``ValidationError`` unless Hermitian, unit trace and sane populations."""
        m = self.matrix
        herm = np.max(np.abs(m - m.conj().T))
        if herm > tol:
            raise ValidationError("matrix", f"not Hermitian (max deviation {herm:.3e})")
        tr = abs(np.trace(m) - 1.0)
        if tr > tol:
            raise ValidationError("matrix", f"trace deviates from 1 by {tr:.3e}")
        pops = self.populations
        if np.any(pops < -pop_tol) or np.any(pops > 1 + pop_tol):
            raise ValidationError("matrix", f"populations out of [0, 1]: {pops}")


@dataclass(frozen=True)
class DecayModel:
    """Population relaxation structure underlying the coherence decay rates.

    The excited state |a> decays at total rate ``rate_a`` with a fraction
    ``branching_b`` going to |b> and the rest to |c>. The ground levels
    exchange population symmetrically at ``ground_exchange``. Whatever part of
    each coherence decay rate in :class:`AtomParams` is not produced by these
    population processes is supplied as pure dephasing, so the Liouvillian
    always reproduces gamma_ab, gamma_ac and gamma_cb exactly.

    ``rate_a=None`` picks the largest excited-state decay compatible with the
    given rates, ``2*min(gamma_ab, gamma_ac) - ground_exchange``.

    The default ``ground_exchange=0`` leaves |b> dark under the drive alone,
    which is the regime where the weak-probe coherence is the exact small-probe
    limit. Any nonzero exchange refills |c> and adds a probe-independent error.
    With exchange zero and all fields off, the steady state is not unique.
    """

    rate_a: Optional[float] = None
    branching_b: float = 0.5
    ground_exchange: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.branching_b <= 1.0:
            raise ValidationError("branching_b", f"must lie in [0, 1], got {self.branching_b!r}")
        if not (math.isfinite(self.ground_exchange) and self.ground_exchange >= 0):
            raise ValidationError("ground_exchange", f"must be >= 0, got {self.ground_exchange!r}")
        if self.rate_a is not None and not (math.isfinite(self.rate_a) and self.rate_a >= 0):
            raise ValidationError("rate_a", f"must be >= 0, got {self.rate_a!r}")

    def excited_decay(self, atom: AtomParams) -> float:
        if self.rate_a is not None:
            return float(self.rate_a)
        # largest decay leaving a completely positive dephasing remainder;
        # feasibility is monotone in the decay rate, so bisect on it
        r = self.ground_exchange
        lo, hi = 0.0, 2.0 * min(atom.gamma_ab, atom.gamma_ac) - r
        if hi <= 0 or not _realizable(*self._residual(atom, lo)):
            raise ValidationError(
                "gamma_ab", "coherence decay rates cannot come from a completely "
                f"positive relaxation with ground_exchange={r!r}",
            )
        if _realizable(*self._residual(atom, hi)):
            return hi
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if _realizable(*self._residual(atom, mid)):
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15 * hi:
                break
        return lo

    def _residual(self, atom, rate_a):
        r = self.ground_exchange
        s = 0.5 * (rate_a + r)
        return atom.gamma_ab - s, atom.gamma_ac - s, atom.gamma_cb - r

    def transfer_rates(self, atom: AtomParams) -> np.ndarray:
        """Matrix ``W`` with ``W[i, j]`` the population transfer rate i -> j."""
        g = self.excited_decay(atom)
        w = np.zeros((3, 3))
        w[A, B] = g * self.branching_b
        w[A, C] = g * (1.0 - self.branching_b)
        w[B, C] = w[C, B] = self.ground_exchange
        return w

    def dephasing(self, atom: AtomParams) -> np.ndarray:
        """Pure-dephasing rates completing the coherence decay.

        Raises ``ValidationError`` when the remainder is negative or not of the
        form |v_i - v_j|^2 / 2, i.e. when no completely positive dephasing can
        supply it and the steady state could have negative populations.
        """
        d_ab, d_ac, d_cb = self._residual(atom, self.excited_decay(atom))
        if not _realizable(d_ab, d_ac, d_cb):
            raise ValidationError(
                "gamma_ab",
                f"decay model leaves non-physical dephasing ({d_ab!r}, {d_ac!r}, {d_cb!r})",
            )
        d = np.zeros((3, 3))
        d[A, B] = d[B, A] = max(d_ab, 0.0)
        d[A, C] = d[C, A] = max(d_ac, 0.0)
        d[C, B] = d[B, C] = max(d_cb, 0.0)
        return d


def _realizable(d_ab, d_ac, d_cb, rtol=1e-12):
    """Nonnegative pair dephasing rates whose square roots obey the triangle
    inequality, i.e. a PSD Kossakowski block on the level projectors."""
    scale = max(abs(d_ab), abs(d_ac), abs(d_cb), 1e-300)
    if min(d_ab, d_ac, d_cb) < -rtol * scale:
        return False
    x, y, z = sorted(math.sqrt(max(v, 0.0)) for v in (d_ab, d_ac, d_cb))
    return z <= x + y + rtol * math.sqrt(scale)


def gamma_complex(atom: AtomParams, fields: FieldParams):
    """Complex relaxation denominators ``(Gamma_ab, Gamma_cb, Gamma_ac)``.

    With the drive resonant and probe/microwave sharing one detuning, only
    the two coherences involving |b> pick up an imaginary part.
    """
    return (
        complex(atom.gamma_ab, fields.delta),
        complex(atom.gamma_cb, fields.delta),
        complex(atom.gamma_ac, 0.0),
    )


def weak_probe_denominator(atom: AtomParams, fields: FieldParams) -> complex:
    g_ab, g_cb, _ = gamma_complex(atom, fields)
    den = g_ab * g_cb + abs(fields.omega2) ** 2
    if abs(den) < DENOMINATOR_TOL:
        raise DegenerateDenominatorError(
            f"|Gamma_ab*Gamma_cb + |Omega_2|^2| = {abs(den):.3e} is below {DENOMINATOR_TOL:g}"
        )
    return den


def weak_probe_coherence(atom: AtomParams, fields: FieldParams) -> complex:
    """Steady-state probe coherence rho_ab with all population in |b>.

    rho_ab = (i Gamma_cb Omega_1 - Omega_2 Omega_mu) / (Gamma_ab Gamma_cb + |Omega_2|^2)

    The first term is ordinary Lambda-scheme EIT; the second is the
    microwave-driven contribution that closes the loop.

    Raises
    ------
    DegenerateDenominatorError
        If the common denominator is below 1e-15.
    """
    den = weak_probe_denominator(atom, fields)
    _, g_cb, _ = gamma_complex(atom, fields)
    return (1j * g_cb * fields.omega1_in - fields.omega2 * fields.omega_mu) / den


def weak_probe_coherences(atom: AtomParams, fields: FieldParams) -> CoherenceSet:
    """All three coherences to lowest order (rho_ac vanishes at this order)."""
    rho_ab = weak_probe_coherence(atom, fields)
    _, g_cb, _ = gamma_complex(atom, fields)
    rho_cb = 1j * (fields.omega_mu + np.conj(fields.omega2) * rho_ab) / g_cb
    return CoherenceSet(rho_ab, 0j, complex(rho_cb))


def hamiltonian(fields: FieldParams) -> np.ndarray:
    """Rotating-frame Hamiltonian over hbar.

    Couplings are ``-Omega_1 |a><b| - Omega_2 |a><c| - Omega_mu |c><b| + h.c.``;
    the level shifts (delta, 0, delta) reproduce Gamma_ab = gamma_ab + i delta,
    Gamma_cb = gamma_cb + i delta and a resonant a-c transition.
    """
    o1, o2, om, d = fields.omega1_in, fields.omega2, fields.omega_mu, fields.delta
    h = np.array(
        [
            [d, -o1, -o2],
            [-np.conj(o1), 0.0, -np.conj(om)],
            [-np.conj(o2), -om, d],
        ],
        dtype=complex,
    )
    return h


def liouvillian(atom: AtomParams, fields: FieldParams, decay_model: DecayModel | None = None):
    """Complex 9x9 generator acting on the row-major vectorization of rho.

    Element ``(3*i + j, 3*i + j)`` for i != j carries ``-(gamma_ij + i*shift)``,
    so at zero field the coherence decay rates can be read off the diagonal.
    """
    model = decay_model or DecayModel()
    h = hamiltonian(fields)
    eye = np.eye(3)
    sup = -1j * (np.kron(h, eye) - np.kron(eye, h.T))

    w = model.transfer_rates(atom)
    gamma = 0.5 * (w.sum(axis=1)[:, None] + w.sum(axis=1)[None, :]) + model.dephasing(atom)
    np.fill_diagonal(gamma, 0.0)
    sup -= np.diag(gamma.ravel())
    for i in range(3):
        for j in range(3):
            if w[i, j]:
                sup[3 * j + j, 3 * i + i] += w[i, j]
                sup[3 * i + i, 3 * i + i] -= w[i, j]
    return sup


_PAIRS = ((A, B), (A, C), (C, B))


def _hermitian_basis():
    """Columns map the real coordinates (rho_aa, rho_bb, rho_cc, Re/Im of the
    three coherences) onto vec(rho)."""
    u = np.zeros((9, 9), dtype=complex)
    for k in range(3):
        u[3 * k + k, k] = 1.0
    for n, (i, j) in enumerate(_PAIRS):
        re, im = 3 + 2 * n, 4 + 2 * n
        u[3 * i + j, re], u[3 * j + i, re] = 1.0, 1.0
        u[3 * i + j, im], u[3 * j + i, im] = 1j, -1j
    return u


_U = _hermitian_basis()
_U_INV = np.linalg.inv(_U)


def full_steady_state(
    atom: AtomParams, fields: FieldParams, decay_model: DecayModel | None = None
) -> DensityMatrix:
    """
    Exact steady state of the three-level master equation.

    The generator is rewritten on the nine real coordinates of a Hermitian
    matrix, its null space is checked to be one-dimensional, and the unit-trace
    solution is obtained from the stacked system ``[G; tr] x = [0; 1]``.

    Parameters
    ----------
    atom, fields : AtomParams, FieldParams
        No weak-probe assumption is made; any amplitudes are allowed.
    decay_model : DecayModel, optional
        Population relaxation; defaults to ``DecayModel()``.

    Returns
    -------
    DensityMatrix
        Hermitian by construction.

    Raises
    ------
    SingularLiouvillianError
        If the steady state is not unique (e.g. all fields off and no ground
        exchange).
    """
    sup = liouvillian(atom, fields, decay_model)
    g = _U_INV @ sup @ _U
    if np.max(np.abs(g.imag)) > 1e-9 * max(1.0, np.max(np.abs(g.real))):
        raise AssertionError("real-coordinate generator is not real")
    g = g.real

    s = np.linalg.svd(g, compute_uv=False)
    if s[-2] <= NULL_SPACE_RTOL * s[0]:
        raise SingularLiouvillianError(
            f"null space dimension > 1 (singular values ... {s[-2]:.3e}, {s[-1]:.3e})"
        )

    trace_row = np.zeros(9)
    trace_row[:3] = 1.0
    lhs = np.vstack([g, trace_row])
    rhs = np.zeros(10)
    rhs[-1] = 1.0
    x, *_ = np.linalg.lstsq(lhs, rhs, rcond=None)

    return DensityMatrix((_U @ x).reshape(3, 3))


def compute_coupling_constant(atomic_density: float, dipole_moment: float, probe_frequency: float) -> float:
    """Propagation coupling ``nu_1 N p^2 / (2 eps0 c hbar)`` in SI.

    Inputs are the number density (m^-3), the transition dipole moment (C m)
    and the probe angular frequency (rad/s). The result is in s^-1 m^-1.
    """
    for name, v in (
        ("atomic_density", atomic_density),
        ("dipole_moment", dipole_moment),
        ("probe_frequency", probe_frequency),
    ):
        _positive(name, float(v))
    return probe_frequency * atomic_density * dipole_moment**2 / (
        2.0 * const.epsilon_0 * const.c * const.hbar
    )
