"""Ground-state soliton family of the cubic-quintic equation.

For each frequency omega in (0, 3/16) the positive decaying solution of

    P'' + (2/r) P' = omega P - P^3 + P^5,   P'(0) = 0

is found by bisecting the shooting parameter P(0) between undershoot and
overshoot trajectories, then polished by a collocation Newton solve on
v = r P (4th-order stencil, Dirichlet ends). Near the upper endpoint the
overshoot window shrinks below machine resolution, so frequencies above
0.155 are reached by continuation in omega from an already-converged
profile; the step size is limited by the droplet-front displacement.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import solve_banded

from . import backends
from .errors import InvalidArgument, NoConvergence, OutOfRange
from .functionals import FunctionalReport, functionals
from .grid import RadialField, RadialGrid, make_grid, real_field

OMEGA_SUP = 3.0 / 16.0

# above this frequency direct shooting cannot bracket (the overshoot window
# is narrower than one ulp of the shooting parameter); continuation takes over
_DIRECT_LIMIT = 0.155
_CONTINUATION_ANCHOR = 0.15


@dataclass(frozen=True)
class ShootingOptions:
    rtol: float = 1e-10
    atol: float = 1e-14
    max_probes: int = 60
    max_bisect: int = 200
    newton_tol: float = 1e-12
    newton_maxit: int = 60


@dataclass(frozen=True)
class SolitonProfile:
    omega: float
    field: RadialField
    p0: float
    report: FunctionalReport
    beta: float

    @property
    def grid(self) -> RadialGrid:
        return self.field.grid


@dataclass(frozen=True)
class FamilyTable:
    """Converged sweep rows ordered by omega.

    Column note: h1dot_P stores the squared seminorm ||grad P||_{L^2}^2, the
    quantity every identity is expressed against.
    """

    omegas: np.ndarray
    mass_P: np.ndarray
    energy_P: np.ndarray
    beta: np.ndarray
    h1dot_P: np.ndarray
    p0: np.ndarray
    mass_R: np.ndarray
    energy_R: np.ndarray

    CSV_HEADER = "omega,mass_P,energy_P,beta,h1dot_P,p0,mass_R,energy_R"

    def __len__(self):
        return len(self.omegas)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.CSV_HEADER + "\n")
            for i in range(len(self)):
                row = (self.omegas[i], self.mass_P[i], self.energy_P[i],
                       self.beta[i], self.h1dot_P[i], self.p0[i],
                       self.mass_R[i], self.energy_R[i])
                fh.write(",".join(repr(float(x)) for x in row) + "\n")


def positive_zero(omega: float) -> float:
    """Largest zero of omega - P^2 + P^4; shooting values above it blow up."""
    return math.sqrt((1.0 + math.sqrt(1.0 - 4.0 * omega)) / 2.0)


def suggested_r_max(omega: float) -> float:
    """Domain size keeping the Dirichlet-truncation bias out of the identity
    residuals (the truncated profile differs from the true soliton by
    O(e^{-2 sqrt(omega) r_max}) with an O(10^3) amplification into the
    Pohozaev residuals), plus room for the droplet front that forms as omega
    approaches 3/16."""
    base = max(30.0, 13.0 / math.sqrt(omega))
    front = 0.5 / (OMEGA_SUP - omega) + 30.0 if omega > 0.12 else 0.0
    return max(base, front)


def _check_omega(omega: float) -> None:
    if not (0.0 < omega < OMEGA_SUP):
        raise OutOfRange(f"omega must lie in (0, 3/16); got {omega}")


# ---------------------------------------------------------------------------
# bracketing

def _bracket_p0(omega: float, r_end: float, opts: ShootingOptions):
    """Geometric probe toward the positive zero of the nonlinearity, then
    bisection. Returns (p_under, p_over) or a collapsed pair on 'decayed'."""
    top = positive_zero(omega)
    span = top - 0.1 * math.sqrt(omega)
    p_under = None
    p_over = None
    for k in range(opts.max_probes):
        p = top - span * 0.5 ** k
        code, _ = backends.classify(p, omega, r_end, opts.rtol, opts.atol)
        if code == backends.OVERSHOOT:
            p_over = p
            break
        if code == backends.DECAYED:
            return p, p
        p_under = p
    if p_over is None or p_under is None:
        raise NoConvergence(
            f"no overshoot/undershoot bracket for omega={omega} "
            f"(probed {opts.max_probes} values below {top:.6f})")

    lo, hi = p_under, p_over
    for _ in range(opts.max_bisect):
        mid = 0.5 * (lo + hi)
        if mid == lo or mid == hi:
            break
        code, _ = backends.classify(mid, omega, r_end, opts.rtol, opts.atol)
        if code == backends.OVERSHOOT:
            hi = mid
        elif code == backends.UNDERSHOOT:
            lo = mid
        else:  # decayed: as close to the branch as floating point permits
            return mid, mid
    return lo, hi


# ---------------------------------------------------------------------------
# grid trajectory and tail graft

def _trajectory_on_grid(omega: float, p0: float, grid: RadialGrid) -> np.ndarray:
    """Integrate the bisected trajectory and sample P on the grid nodes,
    grafting the Yukawa tail A e^{-sqrt(omega) r} / r beyond the radius where
    the trajectory stops tracking the decaying branch."""
    r0 = 1e-4
    w0 = omega - p0 * p0 + p0 ** 4

    def rhs(r, y):
        P, Q = y
        return (Q, (omega - P * P + P ** 4) * P - 2.0 * Q / r)

    def ev_flip(r, y):
        return y[0]
    ev_flip.terminal = True

    def ev_curl(r, y):
        return y[1]
    ev_curl.terminal = True
    ev_curl.direction = 1.0

    y0 = (p0 * (1.0 + w0 * r0 * r0 / 6.0), p0 * w0 * r0 / 3.0)
    sol = solve_ivp(rhs, (r0, grid.r_max), y0, method="DOP853",
                    t_eval=grid.nodes[1:], rtol=1e-12, atol=1e-14,
                    events=(ev_flip, ev_curl), dense_output=False)
    vals = np.empty(grid.n)
    vals[0] = p0
    m = len(sol.t)
    vals[1:m + 1] = sol.y[0]
    sq = math.sqrt(omega)

    # choose the graft radius: last sampled node still on the decaying branch
    # and safely above the absolute floor
    if m > 0:
        floor = 1e-9 * p0
        good = np.nonzero(vals[1:m + 1] > floor)[0]
        i_m = good[-1] + 1 if len(good) else m
    else:
        i_m = 0
    if i_m < 1:
        raise NoConvergence(f"trajectory for omega={omega} left the branch immediately")
    if i_m < grid.n - 1:
        rm = grid.nodes[i_m]
        A = vals[i_m] * rm * math.exp(sq * rm)
        tail_r = grid.nodes[i_m + 1:]
        vals[i_m + 1:] = A * np.exp(-sq * tail_r) / tail_r
    return vals


# ---------------------------------------------------------------------------
# collocation Newton polish on v = r P

def _newton_polish(omega: float, grid: RadialGrid, v_init: np.ndarray,
                   opts: ShootingOptions) -> np.ndarray:
    """Solve the collocation system for v = r P with Dirichlet ends.

    Interior rows use the 4th-order five-point second difference (the row at
    i=1 folds in the odd ghost v_{-1} = -v_1); the last interior row falls
    back to the 3-point stencil. Returns the full v array including the zero
    end values, or raises NoConvergence.
    """
    n = grid.n
    h = grid.spacing
    r = grid.nodes
    c = 1.0 / (12.0 * h * h)
    c2 = 1.0 / (h * h)

    v = v_init.copy()
    v[0] = 0.0
    v[-1] = 0.0

    def residual(vv):
        u = np.zeros(n)
        u[1:] = vv[1:] / r[1:]
        W = omega - u * u + u ** 4
        F = np.empty(n - 2)
        # i = 1 (ghost-folded)
        F[0] = (-29.0 * vv[1] + 16.0 * vv[2] - vv[3]) * c - W[1] * vv[1]
        # 2 <= i <= n-3
        i = np.arange(2, n - 2)
        F[1:-1] = (-vv[i - 2] + 16.0 * vv[i - 1] - 30.0 * vv[i]
                   + 16.0 * vv[i + 1] - vv[i + 2]) * c - W[i] * vv[i]
        # last interior row: 3-point
        F[-1] = (vv[n - 3] - 2.0 * vv[n - 2]) * c2 - W[n - 2] * vv[n - 2]
        return F

    def jacobian_bands(vv):
        u = np.zeros(n)
        u[1:] = vv[1:] / r[1:]
        Wp = omega - 3.0 * u * u + 5.0 * u ** 4  # d(W v)/dv
        m = n - 2
        # solve_banded layout: ab[2 + i - j, j] = J[i, j]
        ab = np.zeros((5, m))
        ab[0, 2:] = -c          # J[j-2, j]
        ab[1, 1:] = 16.0 * c    # J[j-1, j]
        ab[2, :] = -30.0 * c - Wp[1:n - 1]
        ab[3, :-1] = 16.0 * c   # J[j+1, j]
        ab[4, :-2] = -c         # J[j+2, j]
        ab[2, 0] = -29.0 * c - Wp[1]        # ghost-folded row
        # only the final row is 3-point; rows above it keep the full band
        ab[2, m - 1] = -2.0 * c2 - Wp[n - 2]
        ab[3, m - 2] = c2
        ab[4, m - 3] = 0.0
        return ab

    F = residual(v)
    fnorm = np.max(np.abs(F))
    scale = max(np.max(np.abs(v)), 1.0) / (h * h)
    for _ in range(opts.newton_maxit):
        if fnorm <= opts.newton_tol * scale:
            break
        ab = jacobian_bands(v)
        try:
            dv = solve_banded((2, 2), ab, -F)
        except np.linalg.LinAlgError as exc:
            raise NoConvergence(f"singular collocation Jacobian at omega={omega}") from exc
        lam = 1.0
        while lam > 1e-4:
            vt = v.copy()
            vt[1:-1] += lam * dv
            Ft = residual(vt)
            ft = np.max(np.abs(Ft))
            if ft < fnorm * (1.0 - 0.25 * lam) or ft < opts.newton_tol * scale:
                v, F, fnorm = vt, Ft, ft
                break
            lam *= 0.5
        else:
            raise NoConvergence(
                f"collocation line search stalled at omega={omega} (|F|={fnorm:.3e})")
    else:
        raise NoConvergence(
            f"collocation Newton did not converge at omega={omega} (|F|={fnorm:.3e})")
    return v


def _profile_from_v(omega: float, grid: RadialGrid, v: np.ndarray) -> SolitonProfile:
    r = grid.nodes
    P = np.empty(grid.n)
    # P(0) by the one-sided 4th-order derivative of the odd function v
    h = grid.spacing
    P[0] = (48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
    P[1:] = v[1:] / r[1:]
    if np.min(P) < -1e-10 * np.max(P):
        raise NoConvergence(f"polished profile not nonnegative at omega={omega}")
    field = real_field(grid, np.maximum(P, 0.0))
    rep = functionals(field)
    beta = rep.l6 ** 6 / rep.h1dot ** 2
    return SolitonProfile(omega=float(omega), field=field, p0=float(P[0]),
                          report=rep, beta=float(beta))


# ---------------------------------------------------------------------------
# public solvers

def _resample_values(prof: SolitonProfile, grid: RadialGrid) -> np.ndarray:
    """Profile samples carried onto another grid (spline inside, Yukawa tail
    beyond the source domain)."""
    from scipy.interpolate import CubicSpline
    spl = CubicSpline(prof.grid.nodes, prof.field.values)
    vals = np.empty(grid.n)
    inside = grid.nodes <= prof.grid.r_max
    vals[inside] = spl(grid.nodes[inside])
    if not np.all(inside):
        sq = math.sqrt(prof.omega)
        rm = prof.grid.r_max
        A = prof.field.values[-1] * rm * math.exp(sq * rm)
        out = grid.nodes[~inside]
        vals[~inside] = A * np.exp(-sq * out) / out
    return vals


def solve_ground_state(omega: float, grid: RadialGrid | None = None,
                       opts: ShootingOptions | None = None,
                       seed: SolitonProfile | None = None) -> SolitonProfile:
    """Compute the soliton profile at one frequency.

    A seed profile at a nearby omega (any grid) short-circuits the shooting
    phase and goes straight to the Newton polish; sweep warm starts and the
    high-omega continuation both use this.
    """
    _check_omega(omega)
    opts = opts or ShootingOptions()
    if grid is None:
        grid = make_grid(suggested_r_max(omega), int(round(suggested_r_max(omega) / 0.01)) + 1)

    if seed is not None:
        seed_vals = (seed.field.values if seed.grid == grid
                     else _resample_values(seed, grid))
        try:
            v = _newton_polish(omega, grid, grid.nodes * seed_vals, opts)
            return _profile_from_v(omega, grid, v)
        except NoConvergence:
            if omega > _DIRECT_LIMIT and seed.omega < omega:
                return _continued_solve(omega, grid, opts,
                                        anchor=(seed.omega, grid.nodes * seed_vals))
            # fall through to a cold solve

    if omega > _DIRECT_LIMIT:
        return _continued_solve(omega, grid, opts)

    lo, hi = _bracket_p0(omega, grid.r_max, opts)
    p0 = 0.5 * (lo + hi)
    vals = _trajectory_on_grid(omega, p0, grid)
    v = _newton_polish(omega, grid, grid.nodes * vals, opts)
    return _profile_from_v(omega, grid, v)


def _continued_solve(omega: float, grid: RadialGrid, opts: ShootingOptions,
                     anchor: tuple[float, np.ndarray] | None = None) -> SolitonProfile:
    """Continuation in omega from an anchor toward the target.

    The admissible step shrinks like the square of the distance to 3/16: the
    droplet front sits near 0.36/(3/16 - omega) and Newton's basin only
    tolerates front displacements of a fraction of a unit.
    """
    if anchor is None:
        current = solve_ground_state(_CONTINUATION_ANCHOR, grid, opts)
        om = _CONTINUATION_ANCHOR
        v = grid.nodes * current.field.values
    else:
        om, v = anchor
        v = _newton_polish(om, grid, v, opts)
    # Secant predictor: extrapolating from the previous accepted step moves
    # the droplet front before Newton starts, which keeps the corrector in
    # its fast phase instead of crawling the front over by line search.
    step_opts = dataclasses.replace(opts, newton_maxit=25)
    om_prev: float | None = None
    v_prev: np.ndarray | None = None
    while om < omega - 1e-14:
        dom = 0.4 * (OMEGA_SUP - om) ** 2 / 0.36
        step_ok = False
        while dom >= 1e-7:
            om_try = min(om + dom, omega)
            if om_prev is not None:
                v_guess = v + (v - v_prev) * ((om_try - om) / (om - om_prev))
            else:
                v_guess = v
            try:
                v_try = _newton_polish(om_try, grid, v_guess, step_opts)
            except NoConvergence:
                dom *= 0.5
                continue
            om_prev, v_prev = om, v
            v, om = v_try, om_try
            step_ok = True
            break
        if not step_ok:
            raise NoConvergence(
                f"continuation stalled at omega={om:.6f} on the way to {omega}"
                f" (grid r_max={grid.r_max} may be too small for the droplet front)")
    v = _newton_polish(omega, grid, v, opts)
    return _profile_from_v(omega, grid, v)


def pohozaev_report(p: SolitonProfile) -> dict:
    """Relative residuals of the four exact soliton identities.

    Keys: mass_identity, l4_identity, l6_identity, energy_identity. The l6
    identity restates the definition of beta and serves as a bookkeeping
    check; the other three are nontrivial.
    """
    rep = p.report
    g2 = rep.h1dot ** 2
    b = p.beta
    m_pred = (b + 1.0) / (3.0 * p.omega) * g2
    l4_pred = 4.0 * (b + 1.0) / 3.0 * g2
    l6_pred = b * g2
    e_pred = (1.0 - b) / 6.0 * g2
    return {
        "mass_identity": abs(rep.mass - m_pred) / abs(m_pred),
        "l4_identity": abs(rep.l4 ** 4 - l4_pred) / abs(l4_pred),
        "l6_identity": abs(rep.l6 ** 6 - l6_pred) / max(abs(l6_pred), 1e-300),
        "energy_identity": abs(rep.energy - e_pred) / max(abs(e_pred), g2 / 6.0),
    }


def rescaled_soliton(p: SolitonProfile) -> RadialField:
    """The zero-virial rescaling c P(b r) with c^2 = (1+beta)/(4 beta) and
    b = 3(1+beta)/(4 sqrt(3 beta)); V of the result vanishes identically by
    the algebraic cancellation b^2 = c^2(1+beta) - c^4 beta ... = 0."""
    if not p.beta > 0:
        raise InvalidArgument(f"rescaling needs beta > 0, got {p.beta}")
    if p.p0 <= 0 or p.report.mass <= 0:
        raise InvalidArgument("degenerate profile cannot be rescaled")
    from scipy.interpolate import CubicSpline
    b = p.beta
    cc = math.sqrt((1.0 + b) / (4.0 * b))
    bb = 3.0 * (1.0 + b) / (4.0 * math.sqrt(3.0 * b))
    grid = p.grid
    spl = CubicSpline(grid.nodes, p.field.values)
    arg = bb * grid.nodes
    inside = arg <= grid.r_max
    vals = np.empty(grid.n)
    vals[inside] = spl(arg[inside])
    if not np.all(inside):
        # continue with the matched Yukawa tail
        sq = math.sqrt(p.omega)
        rm = grid.nodes[-1]
        A = p.field.values[-1] * rm * math.exp(sq * rm)
        out = arg[~inside]
        vals[~inside] = A * np.exp(-sq * out) / out
    return real_field(grid, cc * vals)


def sweep_family(omega_grid, grid: RadialGrid | None = None,
                 opts: ShootingOptions | None = None) -> FamilyTable:
    """Solve the family over a frequency list (ascending warm starts).

    Every row is identity-checked downstream by pohozaev_report; a failed
    frequency aborts with NoConvergence naming the offender.
    """
    omegas = sorted(float(w) for w in omega_grid)
    if not omegas:
        raise InvalidArgument("empty omega grid")
    rows = {k: [] for k in ("mass_P", "energy_P", "beta", "h1dot_P", "p0",
                            "mass_R", "energy_R")}
    prev = None
    for om in omegas:
        try:
            prof = solve_ground_state(om, grid, opts, seed=prev)
        except NoConvergence as exc:
            raise NoConvergence(f"sweep failed at omega={om}: {exc}") from exc
        prev = prof
        resc = rescaled_soliton(prof)
        rrep = functionals(resc)
        rows["mass_P"].append(prof.report.mass)
        rows["energy_P"].append(prof.report.energy)
        rows["beta"].append(prof.beta)
        rows["h1dot_P"].append(prof.report.h1dot ** 2)
        rows["p0"].append(prof.p0)
        rows["mass_R"].append(rrep.mass)
        rows["energy_R"].append(rrep.energy)
    return FamilyTable(
        omegas=np.array(omegas),
        mass_P=np.array(rows["mass_P"]),
        energy_P=np.array(rows["energy_P"]),
        beta=np.array(rows["beta"]),
        h1dot_P=np.array(rows["h1dot_P"]),
        p0=np.array(rows["p0"]),
        mass_R=np.array(rows["mass_R"]),
        energy_R=np.array(rows["energy_R"]),
    )
