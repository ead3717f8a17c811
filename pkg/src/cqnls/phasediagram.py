"""Mass-energy plane geometry: interpolation constants and boundary curves.

The quartic term of the energy is controlled through a one-parameter family
of product inequalities; the optimizing fields are exactly the soliton
profiles, keyed by the shape ratio beta.  Everything downstream (the energy
lower bound, the mass markers m0/m1/m2 on the boundary) reduces to locating
particular beta values along the computed family and reading off masses.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import (InsufficientData, InvalidArgument, NoConvergence,
                     OutOfRange, PreconditionViolated)
from .functionals import functionals
from .grid import RadialField, make_grid
from .shooting import (FamilyTable, SolitonProfile, rescaled_soliton,
                       solve_ground_state, suggested_r_max)


@dataclass(frozen=True)
class GNReport:
    """Optimal constant for one exponent, with the realizing frequency.

    q1_l2 and m2 are filled only for alpha = 1, where the constant encodes
    the critical mass directly.
    """

    alpha: float
    c_alpha: float
    optimizer_omega: float
    quotient_at_optimizer: float
    q1_l2: float | None = None
    m2: float | None = None


@dataclass(frozen=True)
class CurveSet:
    """Both boundary curves plus the mass markers read off them.

    The soliton branch is kept only up to the zero-energy endpoint; past it
    the energy goes negative and the branch leaves the pictured boundary.
    m1 is None when the two discrete curves do not cross inside the data.
    """

    soliton_omega: np.ndarray
    soliton_mass: np.ndarray
    soliton_energy: np.ndarray
    rescaled_omega: np.ndarray
    rescaled_mass: np.ndarray
    rescaled_energy: np.ndarray
    m0: float
    m1: float | None
    m2: float
    omega_star: float
    beta_one_omegas: tuple[float, ...]

    CSV_HEADER = "curve,omega,mass,energy"

    @property
    def soliton_curve(self) -> list[tuple[float, float]]:
        return list(zip(self.soliton_mass.tolist(), self.soliton_energy.tolist()))

    @property
    def rescaled_curve(self) -> list[tuple[float, float]]:
        return list(zip(self.rescaled_mass.tolist(), self.rescaled_energy.tolist()))

    def to_csv(self, path) -> None:
        lines = [self.CSV_HEADER]
        for om, m, e in zip(self.soliton_omega, self.soliton_mass,
                            self.soliton_energy):
            lines.append(f"soliton,{om!r},{m!r},{e!r}")
        for om, m, e in zip(self.rescaled_omega, self.rescaled_mass,
                            self.rescaled_energy):
            lines.append(f"rescaled,{om!r},{m!r},{e!r}")
        with open(path, "w", encoding="ascii") as fh:
            fh.write("\n".join(lines) + "\n")

    def summary_json(self) -> str:
        payload = {"m0": self.m0, "m1": self.m1, "m2": self.m2,
                   "omega_star": self.omega_star}
        return json.dumps(payload, sort_keys=True)


def gn_quotient(f: RadialField, alpha: float) -> float:
    """Scale- and amplitude-invariant quotient whose infimum is 1/C_alpha.

    Numerator exponents split the quartic norm between the gradient and the
    sextic norm; alpha tunes the split.
    """
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha}")
    rep = functionals(f)
    if rep.l2 == 0.0 or rep.l4 == 0.0:
        raise InvalidArgument("quotient undefined for the zero field")
    p = 3.0 / (1.0 + alpha)
    return rep.l2 * rep.h1dot ** p * rep.l6 ** (alpha * p) / rep.l4 ** 4


def _solve_beta_root(target: float, om_lo: float, om_hi: float,
                     seed: SolitonProfile | None = None
                     ) -> tuple[float, SolitonProfile]:
    """Solve beta(omega) = target inside a bracketing frequency interval.

    All evaluations share one grid (the finer of the two endpoint defaults)
    so the root-finder sees a smooth function of omega.
    """
    r_max = max(suggested_r_max(om_lo), suggested_r_max(om_hi))
    grid = make_grid(r_max, int(round(r_max / 0.01)) + 1)
    cache: dict[float, SolitonProfile] = {}
    state = {"seed": seed}

    def beta_at(om: float) -> float:
        prof = solve_ground_state(om, grid, seed=state["seed"])
        state["seed"] = prof
        cache[om] = prof
        return prof.beta - target

    root = brentq(beta_at, om_lo, om_hi, xtol=1e-12, rtol=8.9e-16)
    prof = cache.get(root)
    if prof is None:
        prof = solve_ground_state(root, grid, seed=state["seed"])
    return root, prof


def _beta_brackets(family: FamilyTable, target: float) -> list[tuple[float, float]]:
    out = []
    b = family.beta - target
    for i in range(len(family) - 1):
        if b[i] == 0.0:
            out.append((family.omegas[i], family.omegas[i]))
        elif b[i] * b[i + 1] < 0.0:
            out.append((family.omegas[i], family.omegas[i + 1]))
    if b[-1] == 0.0:
        out.append((family.omegas[-1], family.omegas[-1]))
    return out


def optimal_constant(alpha: float, family: FamilyTable) -> GNReport:
    """Locate the optimizing frequency for one exponent and evaluate there.

    The shape ratio beta matches alpha at the optimizer; the family supplies
    brackets and a local re-solve sharpens the frequency.  When several
    brackets exist the smallest quotient wins (it is an infimum).
    """
    if not alpha > 0:
        raise InvalidArgument(f"alpha must be positive, got {alpha}")
    if len(family) < 2:
        raise InsufficientData("need at least two family rows")
    brackets = _beta_brackets(family, alpha)
    if not brackets:
        lo, hi = family.beta.min(), family.beta.max()
        raise OutOfRange(
            f"alpha={alpha} outside the attained beta range [{lo:.4f}, {hi:.4f}]")
    best: tuple[float, float] | None = None
    for om_lo, om_hi in brackets:
        if om_lo == om_hi:
            prof = solve_ground_state(float(om_lo))
            root = float(om_lo)
        else:
            root, prof = _solve_beta_root(alpha, float(om_lo), float(om_hi))
        q = gn_quotient(prof.field, alpha)
        if best is None or q < best[1]:
            best = (root, q)
    root, q = best
    c_alpha = 1.0 / q
    q1_l2 = m2 = None
    if alpha == 1.0:
        q1_l2 = (8.0 / 3.0) / c_alpha
        m2 = q1_l2 ** 2
    return GNReport(alpha=alpha, c_alpha=c_alpha, optimizer_omega=root,
                    quotient_at_optimizer=q, q1_l2=q1_l2, m2=m2)


def energy_lower_bound_check(f: RadialField, m2: float) -> float:
    """Residual of the coercive energy bound for sub-threshold mass.

    Returns E(f) minus (1 - |f|_2 / sqrt(m2)) times the positive part of the
    energy; the combination of the quartic inequality at alpha = 1 with the
    three-quarters/one-quarter split makes this nonnegative analytically.
    """
    if not m2 > 0:
        raise InvalidArgument(f"m2 must be positive, got {m2}")
    rep = functionals(f)
    if rep.mass >= m2:
        raise PreconditionViolated(
            f"bound is vacuous at mass {rep.mass:.6g} >= m2 = {m2:.6g}")
    theta = rep.l2 / math.sqrt(m2)
    positive_part = 0.5 * rep.h1dot ** 2 + rep.l6 ** 6 / 6.0
    return rep.energy - (1.0 - theta) * positive_part


def _segment_crossing(a0, a1, b0, b1):
    """Intersection point of two closed plane segments, or None.

    Parallel pairs are skipped: only transversal crossings count.
    """
    u = (a1[0] - a0[0], a1[1] - a0[1])
    v = (b1[0] - b0[0], b1[1] - b0[1])
    w = (b0[0] - a0[0], b0[1] - a0[1])
    denom = u[0] * v[1] - u[1] * v[0]
    scale = max(abs(u[0]), abs(u[1]), 1e-300) * max(abs(v[0]), abs(v[1]), 1e-300)
    if abs(denom) <= 1e-12 * scale:
        return None
    s = (w[0] * v[1] - w[1] * v[0]) / denom
    t = (w[0] * u[1] - w[1] * u[0]) / denom
    if -1e-12 <= s <= 1.0 + 1e-12 and -1e-12 <= t <= 1.0 + 1e-12:
        return (a0[0] + s * u[0], a0[1] + s * u[1], s, t)
    return None


def _polyline_crossings(sol_pts, res_pts):
    """All transversal crossings between two polylines in the (M, E) plane.

    Returns tuples (mass, energy, i, j) with segment indices for refinement.
    """
    hits = []
    for i in range(len(sol_pts) - 1):
        for j in range(len(res_pts) - 1):
            hit = _segment_crossing(sol_pts[i][1:], sol_pts[i + 1][1:],
                                    res_pts[j][1:], res_pts[j + 1][1:])
            if hit is not None:
                hits.append((hit[0], hit[1], i, j))
    # de-duplicate crossings that sit on shared segment endpoints
    dedup = []
    for h in hits:
        if all(abs(h[0] - g[0]) > 1e-9 * max(abs(h[0]), 1.0) for g in dedup):
            dedup.append(h)
    return dedup


def _curve_points(omegas, seed=None):
    """(omega, mass, energy) samples for both curves at given frequencies."""
    sol = []
    res = []
    prev = seed
    for om in omegas:
        prof = solve_ground_state(float(om), seed=prev)
        prev = prof
        rrep = functionals(rescaled_soliton(prof))
        sol.append((float(om), prof.report.mass, prof.report.energy))
        res.append((float(om), rrep.mass, rrep.energy))
    return sol, res


def boundary_curves(family: FamilyTable) -> CurveSet:
    """Assemble the two boundary curves and the three mass markers.

    m2 and omega_star come from the beta = 1 root (every sign change is
    re-solved; the lowest frequency is reported, all candidates kept).  m1 is
    the crossing of the two discrete curves, refined by local re-solves, and
    None when the curves do not cross inside the data range.  m0 is the
    smallest mass attained on either curve.
    """
    if len(family) < 10:
        raise InsufficientData(
            f"need at least 10 family rows for curve assembly, got {len(family)}")

    brackets = _beta_brackets(family, 1.0)
    if not brackets:
        raise OutOfRange(
            "family never reaches beta = 1; extend the frequency range")
    roots = []
    star_profile = None
    for om_lo, om_hi in brackets:
        if om_lo == om_hi:
            prof = solve_ground_state(float(om_lo))
            root = float(om_lo)
        else:
            root, prof = _solve_beta_root(1.0, float(om_lo), float(om_hi))
        roots.append(root)
        if star_profile is None:
            star_profile = prof
    omega_star = roots[0]
    m2 = star_profile.report.mass

    keep = family.omegas < omega_star
    sol_om = np.append(family.omegas[keep], omega_star)
    sol_mass = np.append(family.mass_P[keep], m2)
    sol_energy = np.append(family.energy_P[keep], star_profile.report.energy)
    res_om = family.omegas.copy()
    res_mass = family.mass_R.copy()
    res_energy = family.energy_R.copy()

    m0 = float(min(sol_mass.min(), res_mass.min()))

    sol_pts = list(zip(sol_om.tolist(), sol_mass.tolist(), sol_energy.tolist()))
    res_pts = list(zip(res_om.tolist(), res_mass.tolist(), res_energy.tolist()))
    m1 = _refined_crossing(sol_pts, res_pts)

    return CurveSet(
        soliton_omega=sol_om, soliton_mass=sol_mass, soliton_energy=sol_energy,
        rescaled_omega=res_om, rescaled_mass=res_mass,
        rescaled_energy=res_energy,
        m0=m0, m1=m1, m2=m2, omega_star=omega_star,
        beta_one_omegas=tuple(roots))


def _mass_monotone_pieces(pts):
    """Index slices over which the mass coordinate is monotone."""
    masses = np.array([p[1] for p in pts])
    d = np.diff(masses)
    pieces = []
    start = 0
    for k in range(1, len(d)):
        if d[k] * d[k - 1] < 0.0:
            pieces.append(slice(start, k + 1))
            start = k
    pieces.append(slice(start, len(pts)))
    return pieces


def _densify_near_approach(sol_pts, res_pts):
    """Re-solve both curves finely around their closest vertical approach.

    The two curves can cross at a grazing angle; coarse chords then cut the
    corner and hide the crossing, so the locator interpolates one curve over
    each mass-monotone piece of the other and zooms where the energy gap is
    smallest.
    """
    best = None
    for piece in _mass_monotone_pieces(sol_pts):
        seg = sol_pts[piece]
        m = np.array([p[1] for p in seg])
        e = np.array([p[2] for p in seg])
        order = np.argsort(m)
        for j, rp in enumerate(res_pts):
            if m.min() <= rp[1] <= m.max():
                gap = abs(rp[2] - np.interp(rp[1], m[order], e[order]))
                k = int(np.searchsorted(m[order], rp[1]))
                i = piece.start + min(max(k - 1, 0), len(seg) - 2)
                if best is None or gap < best[0]:
                    best = (gap, i, j)
    if best is None:
        return None
    _, i, j = best
    n_s, n_r = len(sol_pts), len(res_pts)
    sol_lo = sol_pts[max(i - 2, 0)][0]
    sol_hi = sol_pts[min(i + 2, n_s - 1)][0]
    res_lo = res_pts[max(j - 2, 0)][0]
    res_hi = res_pts[min(j + 2, n_r - 1)][0]
    sol_dense, _ = _curve_points(np.linspace(sol_lo, sol_hi, 41))
    _, res_dense = _curve_points(np.linspace(res_lo, res_hi, 41))
    return sol_dense, res_dense


def _refined_crossing(sol_pts, res_pts, rounds: int = 3) -> float | None:
    """Mass at the first curve crossing, sharpened by frequency refinement.

    Each round re-solves nine frequencies inside the bracketing parameter
    intervals of both curves and re-intersects the local polylines.
    """
    hits = _polyline_crossings(sol_pts, res_pts)
    if not hits:
        dense = _densify_near_approach(sol_pts, res_pts)
        if dense is None:
            return None
        sol_pts, res_pts = dense
        hits = _polyline_crossings(sol_pts, res_pts)
        if not hits:
            return None
    hits.sort(key=lambda h: h[0])
    mass, _, i, j = hits[0]
    for _ in range(rounds):
        sol_lo, sol_hi = sol_pts[i][0], sol_pts[i + 1][0]
        res_lo, res_hi = res_pts[j][0], res_pts[j + 1][0]
        sub_sol = np.linspace(sol_lo, sol_hi, 9)
        sub_res = np.linspace(res_lo, res_hi, 9)
        sol_pts, _ = _curve_points(sub_sol)
        _, res_pts = _curve_points(sub_res)
        hits = _polyline_crossings(sol_pts, res_pts)
        if not hits:
            break
        hits.sort(key=lambda h: h[0])
        mass, _, i, j = hits[0]
    return float(mass)


def scale_to_half_energy(f: RadialField, target_E: float) -> float:
    """Mass-preserving dilation amplitude reaching a prescribed energy.

    Under f_a(x) = a^{3/2} f(a x) the three energy pieces pick up a^2, a^6
    and a^3, so the scan is closed-form in the functionals of f.  Bisection
    runs on the first sign-change bracket found from the left.
    """
    if not target_E > 0:
        raise InvalidArgument(f"target energy must be positive, got {target_E}")
    rep = functionals(f)
    if rep.l2 == 0.0:
        raise InvalidArgument("cannot scale the zero field")
    g2 = rep.h1dot ** 2
    l4 = rep.l4 ** 4
    l6 = rep.l6 ** 6

    def gap(a: float) -> float:
        return 0.5 * a * a * g2 + a ** 6 * l6 / 6.0 - 0.25 * a ** 3 * l4 - target_E

    scan = np.logspace(-6.0, 6.0, 481)
    vals = [gap(a) for a in scan]
    lo = hi = None
    for i in range(len(scan) - 1):
        if vals[i] == 0.0:
            return float(scan[i])
        if vals[i] * vals[i + 1] < 0.0:
            lo, hi = scan[i], scan[i + 1]
            break
    if lo is None:
        raise NoConvergence(
            "no amplitude bracket in [1e-6, 1e6] for the requested energy")
    flo = gap(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = gap(mid)
        if abs(fm) <= 1e-10 * target_E:
            return float(mid)
        if flo * fm < 0.0:
            hi = mid
        else:
            lo, flo = mid, fm
    raise NoConvergence("bisection failed to meet the energy tolerance")
