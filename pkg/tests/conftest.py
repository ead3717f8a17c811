"""Session-scoped builds of the expensive shared objects.

The working frequency for everything spectral and dynamical is 0.02; the
soliton family tests range over (0, 3/16) on their own.  Building the
profile, the linearized operators and the internal mode once per session
keeps the suite's wall time dominated by the acceptance dynamics, which
cannot be shared further.
"""

import numpy as np
import pytest

from cqnls.series import build_series
from cqnls.shooting import solve_ground_state, sweep_family
from cqnls.spectral import (QuadraticFormContext, assemble, internal_mode,
                            spectral_default_grid)

OMEGA = 0.02


@pytest.fixture(scope="session")
def profile():
    """Ground state at the working frequency on its default (fine) grid."""
    return solve_ground_state(OMEGA)


@pytest.fixture(scope="session")
def spectral_pack():
    """(profile, operators, spectral data) on the spectral grid."""
    prof = solve_ground_state(OMEGA, spectral_default_grid(OMEGA))
    ops = assemble(prof)
    spec = internal_mode(ops)
    return prof, ops, spec


@pytest.fixture(scope="session")
def form_ctx(spectral_pack):
    _, ops, _ = spectral_pack
    return QuadraticFormContext(ops=ops)


@pytest.fixture(scope="session")
def series_pack(spectral_pack):
    """Order-3 escape series at unit amplitude on the spectral grid."""
    prof, ops, spec = spectral_pack
    ser = build_series(1.0, 3, spec, ops, prof)
    return prof, ops, spec, ser


@pytest.fixture(scope="session")
def family():
    """Coarse family sweep bracketing the beta = 1 endpoint."""
    return sweep_family(np.linspace(0.03, 0.10, 8))
