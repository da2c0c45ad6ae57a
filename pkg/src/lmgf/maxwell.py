"""Per-spectral-point electromagnetic kernels for a layered stack.

The electric and magnetic dyadics are driven by two scalar one-dimensional
transmission problems: a field ``b1`` whose derivative jump is weighted by
1/mu across interfaces (the TE channel) and a field ``b2`` weighted by 1/eps
(the TM channel).  A third coefficient ``b3`` is the source-depth derivative
of ``b2`` with flipped sign and is obtained from the same factorization with
a differentiated right-hand side, never by finite differences.

Reaction coefficients are stored against per-layer reference depths so every
stored exponential has modulus <= 1 inside its own layer; this keeps the
interface systems well scaled deep into the evanescent tail.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Tuple

import numpy as np

from . import basis
from ._linalg import COND_LIMIT, band_solve
from .errors import BranchPoint, CoincidentDepths, DegenerateSpectralPoint, OnInterface
from .stack import LayerStack, vertical_wavenumber, wavenumbers

__all__ = [
    "EmSpectralSolution",
    "em_free_space_b",
    "solve_em_spectral",
    "assemble_GE",
    "assemble_GH",
    "em_channels",
    "em_interface_residuals",
    "recover_transverse_potential",
    "recover_sommerfeld_potential",
    "AssembledTensor",
    "RecoveredPotential",
]

#: Below k_rho = SMALL_KRHO_FACTOR * max|k| the assembly switches to the
#: cancelled form in which the 1/k_rho^2 factors never appear explicitly.
SMALL_KRHO_FACTOR = 1e-6

# A z-dependent scalar is carried as a list of (amp, rate, z0) terms meaning
# sum(amp * exp(rate * (z - z0))).
ExpTerms = List[Tuple[complex, complex, float]]


def _eval_terms(terms: ExpTerms, z: float) -> complex:
    return sum(amp * cmath.exp(rate * (z - z0)) for amp, rate, z0 in terms)


def _ddz(terms: ExpTerms) -> ExpTerms:
    return [(amp * rate, rate, z0) for amp, rate, z0 in terms]


def _scale_terms(terms: ExpTerms, factor: complex) -> ExpTerms:
    return [(amp * factor, rate, z0) for amp, rate, z0 in terms]


def _free_space_value(amp: complex, kz: complex, d: float, zp: float,
                      dz: int = 0, dzp: int = 0) -> complex:
    """amp * e^{i kz |d - zp|} with optional analytic d- and zp-derivatives."""
    s = 1.0 if d > zp else -1.0
    return (amp * (1j * kz * s) ** dz * (-1j * kz * s) ** dzp
            * cmath.exp(1j * kz * abs(d - zp)))


def em_free_space_b(omega: float, material, k_rho: float, z: float, zp: float,
                    *, delta_loss: float = 0.0) -> Tuple[complex, complex, complex]:
    """Free-space values (b1, b2, b3) of one homogeneous EM layer.

    b1 = -g/(i w), b2 = b1/mu, b3 = -dz g/(i w mu), where
    g = i e^{i kz |z - z'|} / (2 kz).
    """
    if z == zp or abs(z - zp) < 1e-14 * max(1.0, abs(z), abs(zp)):
        raise CoincidentDepths("free-space kernel needs z != z'")
    k = wavenumbers(material, omega, delta_loss)
    kz = vertical_wavenumber(k, k_rho)
    g = 1j * cmath.exp(1j * kz * abs(z - zp)) / (2.0 * kz)
    dzg = 1j * (1j * kz * math.copysign(1.0, z - zp)) \
        * cmath.exp(1j * kz * abs(z - zp)) / (2.0 * kz)
    b1 = -g / (1j * omega)
    b2 = b1 / material.mu
    b3 = -dzg / (1j * omega * material.mu)
    return b1, b2, b3


def _solve_scalar_layered(kz, weights, interfaces, j, amp, zp, *,
                          with_zp_derivative=False, cond_limit=COND_LIMIT):
    """Two-condition scalar transmission problem on a layered line.

    Unknowns are the up/down reaction coefficients of every layer, referenced
    at the layer boundary where their propagation factor peaks.  Conditions
    at each interface: value continuity and weighted-derivative continuity,
    with the gated free-space source terms of layer ``j`` on the right-hand
    side.  Returns (c_up, c_dn[, c_up_dzp, c_dn_dzp]) plus the references.
    """
    L = len(interfaces)
    n_layers = L + 1
    up_ref = np.zeros(n_layers)
    dn_ref = np.zeros(n_layers)
    for t in range(n_layers):
        if L:
            up_ref[t] = interfaces[t - 1] if t >= 1 else interfaces[0]
            dn_ref[t] = interfaces[t] if t <= L - 1 else interfaces[L - 1]
    c_shape = (n_layers, 2) if with_zp_derivative else (n_layers, 1)
    if L == 0:
        zeros = np.zeros(n_layers, dtype=complex)
        out = [zeros, zeros.copy()]
        if with_zp_derivative:
            out += [zeros.copy(), zeros.copy()]
        return (*out, up_ref, dn_ref)

    n = 2 * n_layers
    nrhs = 2 if with_zp_derivative else 1
    a = np.zeros((n, n), dtype=complex)
    rhs = np.zeros((n, nrhs), dtype=complex)

    def iu(t):
        return 2 * t

    def idn(t):
        return 2 * t + 1

    a[0, idn(0)] = 1.0  # no wave arriving from z = +inf
    for l, d in enumerate(interfaces):
        rv = 1 + 2 * l   # value continuity
        rd = 2 + 2 * l   # weighted-derivative continuity
        for side, t in ((+1, l), (-1, l + 1)):
            eu = cmath.exp(1j * kz[t] * (d - up_ref[t]))
            ed = cmath.exp(-1j * kz[t] * (d - dn_ref[t]))
            a[rv, iu(t)] += side * eu
            a[rv, idn(t)] += side * ed
            a[rd, iu(t)] += side * weights[t] * 1j * kz[t] * eu
            a[rd, idn(t)] += side * weights[t] * (-1j * kz[t]) * ed
            if t == j:
                fv = _free_space_value(amp, kz[j], d, zp)
                fd = _free_space_value(amp, kz[j], d, zp, dz=1)
                rhs[rv, 0] -= side * fv
                rhs[rd, 0] -= side * weights[t] * fd
                if with_zp_derivative:
                    # rhs for -d/dz' of the field
                    rhs[rv, 1] += side * _free_space_value(amp, kz[j], d, zp, dzp=1)
                    rhs[rd, 1] += side * weights[t] * _free_space_value(
                        amp, kz[j], d, zp, dz=1, dzp=1)
    a[n - 1, iu(n_layers - 1)] = 1.0  # no wave arriving from z = -inf

    x = band_solve(a, rhs, cond_limit=cond_limit)
    x[idn(0), :] = 0.0
    x[iu(n_layers - 1), :] = 0.0
    c_up = x[0::2, 0].copy()
    c_dn = x[1::2, 0].copy()
    if with_zp_derivative:
        return c_up, c_dn, x[0::2, 1].copy(), x[1::2, 1].copy(), up_ref, dn_ref
    return c_up, c_dn, up_ref, dn_ref


@dataclass(frozen=True)
class EmSpectralSolution:
    """Reaction coefficients of one EM stack at fixed (omega, k_rho, z')."""

    stack: LayerStack
    omega: float
    k_rho: float
    zp: float
    j: int
    k: np.ndarray
    kz: np.ndarray
    eps: np.ndarray
    mu: np.ndarray
    up_ref: np.ndarray
    dn_ref: np.ndarray
    # referenced reaction coefficients, shape (3, n_layers): rows b1, b2, b3
    c_up: np.ndarray
    c_dn: np.ndarray

    @property
    def k_max(self) -> float:
        return float(np.max(np.abs(self.k)))

    def reaction_coefficient(self, which: int, t: int, direction: str) -> complex:
        """Unreferenced b_{which}^{r, direction} of layer t (direction 'up'/'dn')."""
        i = which - 1
        if direction == "up":
            return self.c_up[i, t] * cmath.exp(-1j * self.kz[t] * self.up_ref[t])
        if direction == "dn":
            return self.c_dn[i, t] * cmath.exp(1j * self.kz[t] * self.dn_ref[t])
        raise ValueError("direction must be 'up' or 'dn'")

    def b_terms(self, which: int, t: int, side: int = 0) -> ExpTerms:
        """Exponential-term expansion of b_{which} in layer t.

        ``side`` is sign(z - z') and only matters in the source layer, where
        the gated free-space term is included.
        """
        i = which - 1
        kz = self.kz[t]
        terms: ExpTerms = []
        if self.c_up[i, t] != 0:
            terms.append((self.c_up[i, t], 1j * kz, self.up_ref[t]))
        if self.c_dn[i, t] != 0:
            terms.append((self.c_dn[i, t], -1j * kz, self.dn_ref[t]))
        if t == self.j:
            if side == 0:
                raise ValueError("side (sign of z - z') is required in the source layer")
            s = 1.0 if side > 0 else -1.0
            kzj = self.kz[self.j]
            a1 = -1.0 / (2.0 * self.omega * kzj)
            if which == 1:
                terms.append((a1, s * 1j * kzj, self.zp))
            elif which == 2:
                terms.append((a1 / self.mu[self.j], s * 1j * kzj, self.zp))
            elif which == 3:
                # -d/dz' of the b2 free-space term
                terms.append((s * 1j * kzj * a1 / self.mu[self.j], s * 1j * kzj, self.zp))
            else:
                raise ValueError("which must be 1, 2 or 3")
        return terms

    def _side_of(self, t: int, z: float) -> int:
        if t != self.j:
            return 0
        if abs(z - self.zp) < 1e-14 * max(1.0, abs(z), abs(self.zp)):
            raise CoincidentDepths("z coincides with the source depth")
        return 1 if z > self.zp else -1

    def b_value(self, which: int, t: int, z: float) -> complex:
        return _eval_terms(self.b_terms(which, t, self._side_of(t, z)), z)


def solve_em_spectral(stack: LayerStack, omega: float, k_rho: float, zp: float,
                      j: Optional[int] = None, *, delta_loss: float = 0.0,
                      cond_limit: float = COND_LIMIT) -> EmSpectralSolution:
    """Solve the two scalar interface systems of an EM stack at one k_rho."""
    if stack.problem_kind != "maxwell":
        raise ValueError("solve_em_spectral needs an EM stack")
    if k_rho < 0:
        raise ValueError("k_rho must be nonnegative")
    located = stack.locate_layer(zp)  # raises OnInterface when too close
    if j is None:
        j = located
    elif j != located:
        raise OnInterface(f"z'={zp!r} lies in layer {located}, not {j}")

    n_layers = stack.n_layers
    k = np.array([wavenumbers(m, omega, delta_loss) for m in stack.materials],
                 dtype=complex)
    kz = np.array([vertical_wavenumber(kk, k_rho) for kk in k], dtype=complex)
    eps = np.array([m.eps for m in stack.materials], dtype=complex)
    mu = np.array([m.mu for m in stack.materials], dtype=complex)
    if abs(kz[j]) == 0:
        raise BranchPoint("source-layer vertical wavenumber vanishes")

    amp1 = -1.0 / (2.0 * omega * kz[j])
    c1u, c1d, ur, dr = _solve_scalar_layered(
        kz, 1.0 / mu, stack.interfaces, j, amp1, zp, cond_limit=cond_limit)
    c2u, c2d, c3u, c3d, _, _ = _solve_scalar_layered(
        kz, 1.0 / eps, stack.interfaces, j, amp1 / mu[j], zp,
        with_zp_derivative=True, cond_limit=cond_limit)

    c_up = np.vstack([c1u, c2u, c3u])
    c_dn = np.vstack([c1d, c2d, c3d])
    return EmSpectralSolution(stack=stack, omega=omega, k_rho=float(k_rho),
                              zp=float(zp), j=j, k=k, kz=kz, eps=eps, mu=mu,
                              up_ref=ur, dn_ref=dr, c_up=c_up, c_dn=c_dn)


class AssembledTensor(NamedTuple):
    """Basis coefficients plus the realized 3x3 matrix."""

    coefficients: basis.BasisCoefficients
    matrix: np.ndarray


def _check_point(sol: EmSpectralSolution, point: basis.SpectralPoint):
    if abs(point.k_rho - sol.k_rho) > 1e-9 * max(1.0, sol.k_rho):
        raise ValueError("spectral point radius disagrees with the solution's k_rho")


def _p5_pattern(point: basis.SpectralPoint) -> np.ndarray:
    """J5 divided by k_rho^2, regular as k_rho -> 0 at fixed azimuth."""
    ca, sa = math.cos(point.alpha), math.sin(point.alpha)
    return np.array([[-ca * ca, -ca * sa, 0.0],
                     [-ca * sa, -sa * sa, 0.0],
                     [0.0, 0.0, 0.0]], dtype=complex)


def _p8_pattern(point: basis.SpectralPoint) -> np.ndarray:
    """J8 divided by k_rho^2."""
    ca, sa = math.cos(point.alpha), math.sin(point.alpha)
    return np.array([[ca * sa, sa * sa, 0.0],
                     [-ca * ca, -ca * sa, 0.0],
                     [0.0, 0.0, 0.0]], dtype=complex)


def _ge_pieces(sol: EmSpectralSolution, z: float):
    t = sol.stack.locate_layer(z)
    side = sol._side_of(t, z)
    b1 = _eval_terms(sol.b_terms(1, t, side), z)
    b2t = sol.b_terms(2, t, side)
    b3t = sol.b_terms(3, t, side)
    b2 = _eval_terms(b2t, z)
    db2 = _eval_terms(_ddz(b2t), z)
    b3 = _eval_terms(b3t, z)
    db3 = _eval_terms(_ddz(b3t), z)
    return t, b1, b2, db2, b3, db3


def em_channels(sol: EmSpectralSolution, z: float, which: str = "GE") -> dict:
    """Azimuth-independent coefficient channels at (k_rho, z, z').

    The degree-two channels are returned with their k_rho^2 factor kept in
    (keys ``n5``/``n8``), which is the cancelled form that stays finite at
    k_rho = 0.
    """
    t, b1, b2, db2, b3, db3 = _ge_pieces(sol, z)
    w = sol.omega
    kt2 = sol.k[t] ** 2
    mu = sol.mu[t]
    if which == "GE":
        return {
            "c1": -1j * w * b1,
            "c2": -1j * w * mu * sol.k_rho ** 2 * b2 / kt2,
            "c3": -1j * w * mu * db2 / kt2,
            "c4": -1j * w * mu * b3 / kt2,
            "n5": -1j * w * (b1 + mu * db3 / kt2),
        }
    if which == "GH":
        db1 = _eval_terms(_ddz(sol.b_terms(1, t, sol._side_of(t, z))), z)
        return {
            "c6": b1 / mu,
            "c7": b2,
            "n8": (db1 - mu * b3) / mu,
            "c9": -db1 / mu,
        }
    raise ValueError("which must be 'GE' or 'GH'")


def assemble_GE(sol: EmSpectralSolution, point: basis.SpectralPoint,
                z: float) -> AssembledTensor:
    """Electric dyadic at a target depth, as coefficients plus realization.

    Below the small-k_rho cutoff the realization multiplies the degree-two
    channel against J5/k_rho^2 directly, so no 1/k_rho^2 is ever formed; the
    stored fifth coefficient is then the best available quotient (zero at
    k_rho = 0 exactly, where J5 vanishes identically).
    """
    _check_point(sol, point)
    ch = em_channels(sol, z, "GE")
    small = sol.k_rho < SMALL_KRHO_FACTOR * sol.k_max
    c = np.zeros(9, dtype=complex)
    c[0], c[1], c[2], c[3] = ch["c1"], ch["c2"], ch["c3"], ch["c4"]
    c[4] = ch["n5"] / sol.k_rho ** 2 if sol.k_rho > 0 else 0.0
    coeffs = basis.BasisCoefficients(c)
    if small:
        m = sum(c[i] * basis.realize_basis(i + 1, point) for i in range(4))
        m = m + ch["n5"] * _p5_pattern(point)
    else:
        m = basis.realize(coeffs, point)
    return AssembledTensor(coeffs, m)


def assemble_GH(sol: EmSpectralSolution, point: basis.SpectralPoint,
                z: float) -> AssembledTensor:
    """Magnetic dyadic; coefficients live entirely on the last four matrices."""
    _check_point(sol, point)
    ch = em_channels(sol, z, "GH")
    small = sol.k_rho < SMALL_KRHO_FACTOR * sol.k_max
    c = np.zeros(9, dtype=complex)
    c[5], c[6], c[8] = ch["c6"], ch["c7"], ch["c9"]
    c[7] = ch["n8"] / sol.k_rho ** 2 if sol.k_rho > 0 else 0.0
    coeffs = basis.BasisCoefficients(c)
    if small:
        m = (c[5] * basis.realize_basis(6, point)
             + c[6] * basis.realize_basis(7, point)
             + c[8] * basis.realize_basis(9, point)
             + ch["n8"] * _p8_pattern(point))
    else:
        m = basis.realize(coeffs, point)
    return AssembledTensor(coeffs, m)


def em_interface_residuals(sol: EmSpectralSolution,
                           point: Optional[basis.SpectralPoint] = None) -> list:
    """Jump residuals of the four tensor interface conditions.

    For every interface, evaluates [[J1 GE]], [[eps J2 GE]], [[J9 GH]] and
    [[mu J7 GH]] from both sides and returns, per interface, the residual of
    each condition relative to the largest participating entry.
    """
    if point is None:
        point = basis.SpectralPoint.from_polar(sol.k_rho, 0.0)
    out = []
    for l, d in enumerate(sol.stack.interfaces):
        sides = []
        for t in (l, l + 1):
            side = 0
            if t == sol.j:
                side = 1 if d > sol.zp else -1
            b1 = _eval_terms(sol.b_terms(1, t, side), d)
            b2t = sol.b_terms(2, t, side)
            b3t = sol.b_terms(3, t, side)
            ge = _assemble_ge_at(sol, t, point, b1, b2t, b3t, d)
            gh = _assemble_gh_at(sol, t, point, sol.b_terms(1, t, side), b2t, b3t, d)
            sides.append({
                "J1.GE": basis.realize_basis(1, point) @ ge,
                "eps.J2.GE": sol.eps[t] * basis.realize_basis(2, point) @ ge,
                "J9.GH": basis.realize_basis(9, point) @ gh,
                "mu.J7.GH": sol.mu[t] * basis.realize_basis(7, point) @ gh,
            })
        res = {}
        for key in sides[0]:
            top, bot = sides[0][key], sides[1][key]
            scale = max(np.max(np.abs(top)), np.max(np.abs(bot)))
            jump = np.max(np.abs(top - bot))
            res[key] = jump / scale if scale > 0 else 0.0
        out.append(res)
    return out


def _assemble_ge_at(sol, t, point, b1, b2t, b3t, z):
    w, mu, kt2 = sol.omega, sol.mu[t], sol.k[t] ** 2
    b2 = _eval_terms(b2t, z)
    db2 = _eval_terms(_ddz(b2t), z)
    b3 = _eval_terms(b3t, z)
    db3 = _eval_terms(_ddz(b3t), z)
    m = (-1j * w * b1 * basis.realize_basis(1, point)
         - 1j * w * mu * sol.k_rho ** 2 * b2 / kt2 * basis.realize_basis(2, point)
         - 1j * w * mu * db2 / kt2 * basis.realize_basis(3, point)
         - 1j * w * mu * b3 / kt2 * basis.realize_basis(4, point))
    return m + (-1j * w * (b1 + mu * db3 / kt2)) * _p5_pattern(point)


def _assemble_gh_at(sol, t, point, b1t, b2t, b3t, z):
    mu = sol.mu[t]
    b1 = _eval_terms(b1t, z)
    db1 = _eval_terms(_ddz(b1t), z)
    b2 = _eval_terms(b2t, z)
    b3 = _eval_terms(b3t, z)
    m = (b1 / mu * basis.realize_basis(6, point)
         + b2 * basis.realize_basis(7, point)
         - db1 / mu * basis.realize_basis(9, point))
    return m + (db1 - mu * b3) / mu * _p8_pattern(point)


@dataclass(frozen=True)
class RecoveredPotential:
    """Five-entry vector-potential representation recovered from b1 and b2.

    ``terms`` maps a basis index to the exponential expansion of its
    coefficient in the target layer (one side of z' in the source layer).
    """

    kind: str
    layer: int
    side: int
    omega: float
    k: complex
    terms: dict

    def coefficients(self, z: float) -> basis.BasisCoefficients:
        c = np.zeros(9, dtype=complex)
        for idx, terms in self.terms.items():
            c[idx - 1] = _eval_terms(terms, z)
        return basis.BasisCoefficients(c)

    def realization(self, point: basis.SpectralPoint, z: float) -> np.ndarray:
        return basis.realize(self.coefficients(z), point)

    def ge_via_operator(self, point: basis.SpectralPoint, z: float) -> np.ndarray:
        """Push the potential through -i w (I + grad grad / k^2) analytically."""
        g = np.zeros((3, 3), dtype=complex)
        for idx, terms in self.terms.items():
            jm = basis.realize_basis(idx, point)
            for amp, rate, z0 in terms:
                d = np.array([1j * point.kx, 1j * point.ky, rate], dtype=complex)
                op = np.eye(3, dtype=complex) + np.outer(d, d) / self.k ** 2
                g += -1j * self.omega * (op @ jm) * amp * cmath.exp(rate * (z - z0))
        return g


def _potential_common(sol: EmSpectralSolution, z: float):
    t = sol.stack.locate_layer(z)
    side = sol._side_of(t, z)
    if sol.k_rho <= basis.degenerate_threshold(sol.k_max):
        raise DegenerateSpectralPoint(
            "potential recovery needs k_rho above the degeneracy threshold")
    b1t = sol.b_terms(1, t, side)
    b2t = sol.b_terms(2, t, side)
    b3t = sol.b_terms(3, t, side)
    return t, side, b1t, b2t, b3t


def recover_transverse_potential(sol: EmSpectralSolution, z: float) -> RecoveredPotential:
    """Potential with the (1,1),(1,2),(2,1),(2,2),(3,3) sparsity pattern.

    a1 = b1, a2 = mu b2, a5 = b1 - mu dz dz' b2 / (k_rho^2 kz^2).
    """
    t, side, b1t, b2t, b3t = _potential_common(sol, z)
    kz = sol.kz[t]
    if abs(kz) <= 1e-8 * max(1.0, abs(sol.k[t])):
        raise BranchPoint("transverse potential is singular at kz = 0")
    mu = sol.mu[t]
    # dz dz' b2 = -dz b3
    a5 = b1t + _scale_terms(_ddz(b3t), mu / (sol.k_rho ** 2 * kz ** 2))
    return RecoveredPotential(kind="transverse", layer=t, side=side,
                              omega=sol.omega, k=sol.k[t],
                              terms={1: b1t, 2: _scale_terms(b2t, mu), 5: a5})


def recover_sommerfeld_potential(sol: EmSpectralSolution, z: float) -> RecoveredPotential:
    """Potential with the (1,1),(2,2),(3,1),(3,2),(3,3) sparsity pattern.

    a1 = b1, a2 = mu b2, a4 = -(mu dz' b2 + dz b1)/k_rho^2.
    """
    t, side, b1t, b2t, b3t = _potential_common(sol, z)
    mu = sol.mu[t]
    # dz' b2 = -b3
    a4 = _scale_terms(b3t, mu / sol.k_rho ** 2) \
        + _scale_terms(_ddz(b1t), -1.0 / sol.k_rho ** 2)
    return RecoveredPotential(kind="sommerfeld", layer=t, side=side,
                              omega=sol.omega, k=sol.k[t],
                              terms={1: b1t, 2: _scale_terms(b2t, mu), 4: a4})
