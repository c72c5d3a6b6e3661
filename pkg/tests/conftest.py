import numpy as np
import pytest

from closedlambda import AtomParams, CellGeometry, FieldParams
from closedlambda.config import Grid, RunConfig
from closedlambda.model import DecayModel

# reference parameter set shipped as data/fig6.cfg
FIG6 = dict(gamma_ab=5.0, gamma_cb=1e-3, omega1_in=0.1, omega2=1.0, omega_mu=0.02,
            eta=0.9, length=2.5, delta_k=1.5)

_ACCEPTANCE_LINES = []


@pytest.fixture
def fig6_atom():
    return AtomParams(FIG6["gamma_ab"], FIG6["gamma_cb"], FIG6["eta"])


@pytest.fixture
def fig6_fields():
    return FieldParams(FIG6["omega1_in"], FIG6["omega2"], FIG6["omega_mu"], 0.0, FIG6["delta_k"])


@pytest.fixture
def fig6_cell():
    return CellGeometry(0.0, FIG6["length"])


@pytest.fixture
def acceptance_report():
    def report(label, passed, detail):
        _ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")
        return passed

    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def _cplx(rng, lo, hi):
    return complex(rng.uniform(lo, hi) * np.exp(1j * rng.uniform(-np.pi, np.pi)))


def random_config(rng, tmp_path=None):
    """A valid RunConfig with every field randomized."""
    gamma_ab = float(rng.uniform(1, 10))
    atom = AtomParams(gamma_ab, float(10 ** rng.uniform(-4, -2)), float(rng.uniform(0.1, 2)),
                      gamma_ac=gamma_ab * float(rng.uniform(1, 2)))
    fields = FieldParams(_cplx(rng, 0.01, 0.2), _cplx(rng, 0.5, 2), _cplx(rng, 0, 0.05),
                         float(rng.uniform(-1, 1)), float(rng.uniform(0.5, 3)))
    cell = CellGeometry(float(rng.uniform(0, 5)), float(rng.uniform(1, 4)))
    lo = float(rng.uniform(-3, -0.5))
    det = Grid(lo, float(rng.uniform(0.5, 3)), int(rng.integers(2, 12)))
    z_lo = float(rng.uniform(0, 2))
    # cover at least 1.5 beat periods so a free-period fit is well posed
    span = max(float(rng.uniform(5, 10)), 3 * np.pi / fields.delta_k)
    pos = Grid(z_lo, z_lo + span, int(rng.integers(16, 32)))
    prefix = str(tmp_path) + "/" if tmp_path is not None else ""
    return RunConfig(
        atom=atom, fields=fields, cell=cell, detuning_grid=det, position_grid=pos,
        polarization=str(rng.choice(["right", "left", "both"])),
        steps=int(rng.integers(16, 1024)),
        spectrum_out=prefix + "spec.csv", phase_out=prefix + "phase.csv",
        seed=int(rng.integers(0, 2**63)),
        noise_sigma=float(rng.choice([0.0, rng.uniform(0, 0.05)])),
        expect_weak_probe_fail=bool(rng.integers(0, 2)),
        decay=DecayModel(None, float(rng.uniform(0, 1)), 0.0),
    )
