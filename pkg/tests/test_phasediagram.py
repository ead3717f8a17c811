"""Variational landscape: interpolation quotient, boundary curves, markers."""

import math

import numpy as np
import pytest

from cqnls.errors import InsufficientData, InvalidArgument, OutOfRange
from cqnls.functionals import functionals
from cqnls.grid import make_grid, real_field
from cqnls.phasediagram import (boundary_curves, energy_lower_bound_check,
                                gn_quotient, optimal_constant,
                                scale_to_half_energy)
from cqnls.shooting import FamilyTable, solve_ground_state

GRID = make_grid(24.0, 1201)


def bump(width=2.0, amp=1.0):
    return real_field(GRID, amp * np.exp(-(GRID.nodes / width) ** 2))


def test_quotient_amplitude_invariance():
    q1 = gn_quotient(bump(amp=0.3), 1.0)
    q2 = gn_quotient(bump(amp=2.1), 1.0)
    assert q1 == pytest.approx(q2, rel=1e-12)


def test_quotient_dilation_invariance():
    # evaluate the same profile at two widths; the quotient is scale-free
    q1 = gn_quotient(bump(width=1.5), 1.0)
    q2 = gn_quotient(bump(width=3.0), 1.0)
    assert q1 == pytest.approx(q2, rel=1e-9)


def test_quotient_validation():
    with pytest.raises(InvalidArgument):
        gn_quotient(bump(), 0.0)
    z = real_field(GRID, np.zeros(GRID.n))
    with pytest.raises(InvalidArgument):
        gn_quotient(z, 1.0)


def test_optimal_constant_finds_the_beta_one_frequency(family):
    gn = optimal_constant(1.0, family)
    prof = solve_ground_state(gn.optimizer_omega)
    assert prof.beta == pytest.approx(1.0, abs=1e-6)
    # the endpoint norm identity: ||Q_1|| equals the optimizer's L^2 norm
    assert gn.q1_l2 == pytest.approx(math.sqrt(prof.report.mass), rel=1e-4)
    assert gn.m2 == pytest.approx(prof.report.mass, rel=2e-4)
    # the soliton quotient is the infimum: any test bump sits above it
    assert gn_quotient(bump(), 1.0) > gn.quotient_at_optimizer


def test_optimal_constant_range_errors(family):
    with pytest.raises(OutOfRange):
        optimal_constant(25.0, family)
    tiny = FamilyTable(omegas=family.omegas[:1], mass_P=family.mass_P[:1],
                       energy_P=family.energy_P[:1], beta=family.beta[:1],
                       h1dot_P=family.h1dot_P[:1], p0=family.p0[:1],
                       mass_R=family.mass_R[:1], energy_R=family.energy_R[:1])
    with pytest.raises(InsufficientData):
        optimal_constant(1.0, tiny)


def test_boundary_curves_markers(family):
    curves = boundary_curves(family)
    assert curves.m2 > 0.0
    assert curves.m0 > 0.0
    # m0 is the minimum over both discrete boundary curves
    least = min(curves.soliton_mass.min(), curves.rescaled_mass.min())
    assert curves.m0 <= least + 1e-9
    assert solve_ground_state(curves.omega_star).beta == pytest.approx(
        1.0, abs=1e-6)
    # the soliton branch is clipped at the zero-energy endpoint
    assert np.all(curves.soliton_energy >= -1e-9)
    if curves.m1 is not None:
        assert curves.m0 <= curves.m1 <= max(curves.soliton_mass.max(),
                                             curves.rescaled_mass.max())


def test_boundary_curves_deterministic_csv(family, tmp_path):
    curves = boundary_curves(family)
    p1, p2 = tmp_path / "c1.csv", tmp_path / "c2.csv"
    curves.to_csv(p1)
    curves.to_csv(p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().splitlines()[0] == "curve,omega,mass,energy"


def test_energy_lower_bound_on_subthreshold_fields(family):
    m2 = optimal_constant(1.0, family).m2
    rng = np.random.default_rng(7)
    checked = 0
    for _ in range(40):
        f = bump(width=rng.uniform(1.0, 4.0), amp=rng.uniform(0.05, 0.5))
        if functionals(f).mass >= m2:
            continue
        assert energy_lower_bound_check(f, m2) >= -1e-10
        checked += 1
    assert checked >= 10


def test_scale_to_half_energy_hits_the_target():
    f = bump()
    rep = functionals(f)
    target = 0.5 * abs(rep.energy) + 0.1
    a = scale_to_half_energy(f, target)
    g2 = rep.h1dot ** 2
    e = 0.5 * a * a * g2 + a ** 6 * rep.l6 ** 6 / 6.0 \
        - 0.25 * a ** 3 * rep.l4 ** 4
    assert e == pytest.approx(target, rel=1e-9)
    with pytest.raises(InvalidArgument):
        scale_to_half_energy(f, -1.0)
