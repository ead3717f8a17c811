"""Conserved quantities, the virial functional and its localized variants.

Conventions: mass M = int |u|^2, energy
E = int 1/2 |grad u|^2 - 1/4 |u|^4 + 1/6 |u|^6, and the virial functional
V(u) = ||u||_{H^1dot}^2 + ||u||_{L^6}^6 - 3/4 ||u||_{L^4}^4. All integrals are
over R^3 via the radial measure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument
from .grid import (RadialField, RadialGrid, derivative, radial_integral,
                   same_grid, volume_weights)


@dataclass(frozen=True)
class FunctionalReport:
    mass: float
    energy: float
    virial: float
    l2: float
    h1dot: float
    l4: float
    l6: float
    momentum: np.ndarray  # identically zero for radial fields

    def __post_init__(self):
        mom = np.asarray(self.momentum, dtype=float)
        mom.setflags(write=False)
        object.__setattr__(self, "momentum", mom)


def functionals(u: RadialField) -> FunctionalReport:
    """Evaluate M, E, V and the underlying norms for one field.

    The gradient is the 4th-order radial derivative; the momentum of a radial
    field is an exact zero vector (odd integrand), stored as such rather than
    quadratured.
    """
    u.require_finite()
    du = derivative(u)
    absu2 = np.abs(u.values) ** 2
    grad2 = radial_integral(u.with_values(np.abs(du.values) ** 2))
    m = radial_integral(u.with_values(absu2))
    p4 = radial_integral(u.with_values(absu2**2))
    p6 = radial_integral(u.with_values(absu2**3))
    if isinstance(grad2, complex):
        grad2, m, p4, p6 = grad2.real, m.real, p4.real, p6.real
    energy = 0.5 * grad2 - 0.25 * p4 + p6 / 6.0
    virial = grad2 + p6 - 0.75 * p4
    return FunctionalReport(
        mass=m,
        energy=energy,
        virial=virial,
        l2=math.sqrt(max(m, 0.0)),
        h1dot=math.sqrt(max(grad2, 0.0)),
        l4=max(p4, 0.0) ** 0.25,
        l6=max(p6, 0.0) ** (1.0 / 6.0),
        momentum=np.zeros(3),
    )


def h1_norm_sq(u: RadialField) -> float:
    """Full Sobolev norm squared, ||u||_{L^2}^2 + ||grad u||_{L^2}^2."""
    rep = functionals(u)
    return rep.mass + rep.h1dot**2


# ---------------------------------------------------------------------------
# localized virial weights

# C^4 ninth-order smoothstep q and its first three derivatives; q rises 0 -> 1
# on [0,1] with four vanishing derivatives at both ends.
def _q(y):
    return y**5 * (126.0 + y * (-420.0 + y * (540.0 + y * (-315.0 + 70.0 * y))))


def _qp(y):
    return 630.0 * y**4 * (1.0 - y) ** 4


def _qpp(y):
    return 2520.0 * y**3 * (1.0 - y) ** 3 * (1.0 - 2.0 * y)


def _qppp(y):
    return 2520.0 * y**2 * (1.0 - y) ** 2 * (3.0 * (1.0 - 2.0 * y) ** 2 - 2.0 * y * (1.0 - y))


@dataclass(frozen=True)
class VirialWeight:
    """Profiles of the localization weight w_R and its derivatives.

    w_R(r) = R^2 phi(r/R) with phi = r^2 inside the unit ball and a monotone
    C^4 plateau reached at radius 2: phi'(s) = 2s(1 - q(s-1)) on [1,2] with q
    the ninth-order smoothstep, so all of phi', ..., phi'''' match the inner
    r^2 branch at s=1 and vanish at s=2; phi == 25/11 beyond. R = inf encodes
    the exact w = r^2. All derivative profiles vanish identically for r >= 2R.
    """

    R: float
    grid: RadialGrid
    w: np.ndarray
    wp: np.ndarray
    wpp: np.ndarray
    lap: np.ndarray
    bilap: np.ndarray
    cutoff_shape: str = "ninth-order smoothstep taper of phi' on [1,2]"


def virial_weight(R: float, grid: RadialGrid) -> VirialWeight:
    """Build w_R on the grid; R must be >= 1 or infinite."""
    r = grid.nodes
    if math.isinf(R):
        w = r**2
        wp = 2.0 * r
        wpp = np.full_like(r, 2.0)
        lap = np.full_like(r, 6.0)
        bilap = np.zeros_like(r)
        return VirialWeight(math.inf, grid, w, wp, wpp, lap, bilap, "none (w = r^2)")
    if not R >= 1.0:
        raise InvalidArgument(f"virial weight needs R >= 1, got {R}")

    s = r / R
    inner = s <= 1.0
    outer = s >= 2.0
    mid = ~inner & ~outer
    y = s[mid] - 1.0

    # phi and derivatives in s
    phi = np.empty_like(s)
    phip = np.empty_like(s)
    phipp = np.empty_like(s)
    phippp = np.empty_like(s)
    phipppp = np.empty_like(s)

    phi[inner] = s[inner] ** 2
    phip[inner] = 2.0 * s[inner]
    phipp[inner] = 2.0
    phippp[inner] = 0.0
    phipppp[inner] = 0.0

    # phi'(s) = 2s (1 - q(s-1)) on [1,2]: tapering the full inner slope keeps
    # phi'' through phi'''' continuous at s=1 (a taper of the constant slope 2
    # would leave phi'' jumping there and ruin the d/dt P_R = F_R identity).
    # phi(s) = s^2 - 2 int_0^{s-1} (1+t) q(t) dt; plateau value phi(2) = 25/11.
    sm = s[mid]
    Q1 = y**6 * (21.0 + y * (-60.0 + y * (67.5 + y * (-35.0 + 7.0 * y))))
    Qy = y**7 * (18.0 + y * (-52.5 + y * (60.0 + y * (-31.5 + (70.0 / 11.0) * y))))
    phi[mid] = sm**2 - 2.0 * (Q1 + Qy)
    phip[mid] = 2.0 * sm * (1.0 - _q(y))
    phipp[mid] = 2.0 * (1.0 - _q(y)) - 2.0 * sm * _qp(y)
    phippp[mid] = -4.0 * _qp(y) - 2.0 * sm * _qpp(y)
    phipppp[mid] = -6.0 * _qpp(y) - 2.0 * sm * _qppp(y)

    phi[outer] = 25.0 / 11.0
    phip[outer] = 0.0
    phipp[outer] = 0.0
    phippp[outer] = 0.0
    phipppp[outer] = 0.0

    w = R**2 * phi
    wp = R * phip
    wpp = phipp
    # radial Laplacians: D w = w'' + 2 w'/r, DD w = (phi'''' + 4 phi'''/s) / R^2
    s_safe = np.where(s > 0, s, 1.0)
    lap = phipp + 2.0 * phip / s_safe
    bilap = (phipppp + 4.0 * phippp / s_safe) / R**2
    lap[0] = 6.0  # r=0 lies in the exact r^2 region for every R >= 1
    bilap[0] = 0.0
    return VirialWeight(float(R), grid, w, wp, wpp, lap, bilap)


def localized_virial_F(u: RadialField, wgt: VirialWeight) -> float:
    """F_R[u] = int 4|u_r|^2 w'' - |u|^4 Dw + 4/3 |u|^6 Dw - DDw |u|^2 dx.

    For R = inf this equals 8 V(u); for the soliton orbit it vanishes for
    every R (stationarity), which the tests exercise.
    """
    same_grid(u, wgt.grid)
    u.require_finite()
    du = derivative(u).values
    absu2 = np.abs(u.values) ** 2
    integrand = (4.0 * np.abs(du) ** 2 * wgt.wpp
                 - absu2**2 * wgt.lap
                 + (4.0 / 3.0) * absu2**3 * wgt.lap
                 - wgt.bilap * absu2)
    return float(np.dot(volume_weights(u.grid), integrand))


def localized_virial_P(u: RadialField, wgt: VirialWeight) -> float:
    """P_R[u] = 2 Im int conj(u) u_r w' dx (the localized momentum-type track)."""
    same_grid(u, wgt.grid)
    u.require_finite()
    du = derivative(u).values
    integrand = np.imag(np.conj(u.values) * du) * wgt.wp
    return float(2.0 * np.dot(volume_weights(u.grid), integrand))
