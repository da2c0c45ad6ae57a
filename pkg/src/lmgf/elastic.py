"""Per-spectral-point elastodynamic kernels for a layered stack.

Solid layers carry five coefficients per propagation direction; the first,
third and fifth ride the shear-wave exponential and the second and fourth the
compressional one.  Fluid layers carry the two scalars (u, v) of the rank-one
curl-free general solution, and vacuum layers carry nothing.  The interface
conditions reduce to ten continuity scalars T1..T10 that decouple into two
independent banded systems:

  group A (T2, T4, T5, T7, T8, T10) couples x1, x4, x5 and the fluid v;
  group B (T1, T3, T6, T9)          couples x2, x3 and the fluid u.

Vector (fluid-origin) sources use the group-B machinery alone with solid
unknowns (x2, x3) and a single fluid scalar per direction.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import basis
from ._linalg import COND_LIMIT, band_solve
from .errors import (BranchPoint, CoincidentDepths, OnInterface, PhaseMismatch)
from .stack import ElasticMaterial, LayerStack, vertical_wavenumber, wavenumbers

__all__ = [
    "FreeSpaceCoeffs",
    "elastic_free_space_coeffs",
    "solve_elastic_spectral",
    "assemble_G_elastic",
    "elastic_channels",
    "evaluate_traction_scalars",
    "elastic_interface_residuals",
    "traction_scalars_solid",
    "traction_scalars_fluid",
    "ElasticSpectralSolution",
    "SolidLayerCoefficients",
    "FluidLayerCoefficients",
    "VacuumLayerCoefficients",
    "SolidVectorLayerCoefficients",
    "FluidVectorLayerCoefficients",
    "GROUP_A_T", "GROUP_B_T",
]

GROUP_A_T = (2, 4, 5, 7, 8, 10)
GROUP_B_T = (1, 3, 6, 9)

_DIRS = ("up", "dn")
_TAU = {"up": 1.0, "dn": -1.0}


def _interface_t_set(phase_top: str, phase_bot: str) -> Tuple[int, ...]:
    """Continuity scalars imposed across one interface, by phase pair."""
    pair = frozenset((phase_top, phase_bot)) if phase_top != phase_bot \
        else frozenset((phase_top,))
    if pair == frozenset(("solid",)):
        return (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)
    if pair == frozenset(("solid", "fluid")):
        return (1, 2, 3, 4, 5, 6, 7)
    if pair == frozenset(("fluid",)):
        return (1, 2, 3, 4)
    if pair == frozenset(("solid", "vacuum")):
        return (1, 2, 5, 6, 7)
    if pair == frozenset(("fluid", "vacuum")):
        return (1, 2)
    raise ValueError(f"unsupported phase pair {phase_top}/{phase_bot}")


def traction_scalars_solid(material: ElasticMaterial, k_rho: float,
                           ksz: complex, kcz: complex, tau: float,
                           s: complex, c: complex) -> Dict[int, Dict[str, complex]]:
    """Slot coefficients of T1..T10 for one solid propagation direction.

    ``s`` and ``c`` are the shear/compressional phase factors at the
    evaluation depth; the returned dict maps T index -> {slot: coefficient}.
    """
    mu, lam, gam = material.mu, material.lam, material.gamma
    tks = tau * 1j * ksz
    tkc = tau * 1j * kcz
    kr2 = k_rho * k_rho
    q = -lam * kr2 - gam * kcz * kcz
    return {
        1: {"x3": -2.0 * mu * tks * kr2 * s, "x2": q * c},
        2: {"x1": 2.0 * mu * tks * s, "x5": -2.0 * mu * tks * kr2 * s, "x4": q * c},
        3: {"x3": -kr2 * s, "x2": tkc * c},
        4: {"x1": s, "x5": -kr2 * s, "x4": tkc * c},
        5: {"x1": mu * ksz * ksz * s},
        6: {"x3": mu * (ksz * ksz - kr2) * s, "x2": 2.0 * mu * tkc * c},
        7: {"x1": mu * s, "x5": mu * (ksz * ksz - kr2) * s, "x4": 2.0 * mu * tkc * c},
        8: {"x1": -tks * s},
        9: {"x3": -tks * s, "x2": c},
        10: {"x5": -tks * s, "x4": c},
    }


def traction_scalars_fluid(material: ElasticMaterial, kc: complex,
                           kcz: complex, tau: float,
                           c: complex) -> Dict[int, Dict[str, complex]]:
    """Fluid analogues of the continuity scalars (shear tractions vanish).

    The inertial factor is written as gamma*kc^2 (== omega^2 rho for the
    lossless wavenumber) so that loss regularization enters purely through
    the wavenumbers.
    """
    tkc = tau * 1j * kcz
    w2r = material.gamma * kc * kc
    return {
        1: {"u": -w2r * c},
        2: {"v": -w2r * c},
        3: {"u": tkc * c},
        4: {"v": tkc * c},
        5: {}, 6: {}, 7: {}, 8: {},
        9: {"u": c},
        10: {"v": c},
    }


@dataclass(frozen=True)
class FreeSpaceCoeffs:
    """Source-layer expansion coefficients of one propagation direction.

    ``x`` holds (x1..x5) without the e^{-tau i k z'} source phases; ``gate``
    names the half space where this direction is active.
    """

    x: np.ndarray
    d_s: complex
    d_c: complex
    gate: str


def _free_space_x(w2rho, ks, ksz, kcz, tau):
    """(x1..x5) of the whole-space solid kernel, one propagation direction.

    ``w2rho`` is mu*ks^2, i.e. omega^2 rho continued through the (possibly
    lossy) wavenumber.  Matching the expansion against the closed spectral
    dyadic puts the direction sign on the first, second and fifth slots; the
    third and fourth are direction-even.  (Only then does the down-gated
    part reproduce the closed form; see the decisions ledger.)
    """
    d_s = -1.0 / (2.0 * w2rho * ksz * ksz)
    d_c = -1.0 / (2.0 * w2rho * kcz * kcz)
    x = np.array([tau * ks * ks * d_s,
                  -tau * kcz * kcz * d_c,
                  1j * ksz * d_s,
                  1j * kcz * d_c,
                  tau * d_s], dtype=complex)
    return x, d_s, d_c


def elastic_free_space_coeffs(omega: float, material: ElasticMaterial,
                              k_rho: float, direction: str, *,
                              delta_loss: float = 0.0) -> FreeSpaceCoeffs:
    """Free-space coefficients of a whole-space solid at one k_rho."""
    if not isinstance(material, ElasticMaterial) or material.phase != "solid":
        raise PhaseMismatch("free-space tensor coefficients need a solid material")
    ks, kc = wavenumbers(material, omega, delta_loss)
    ksz = vertical_wavenumber(ks, k_rho)
    kcz = vertical_wavenumber(kc, k_rho)
    if abs(ksz) <= 1e-10 * abs(ks) or abs(kcz) <= 1e-10 * abs(kc):
        raise BranchPoint("k_rho sits on a vertical-wavenumber branch point")
    x, d_s, d_c = _free_space_x(material.mu * ks * ks, ks, ksz, kcz, _TAU[direction])
    return FreeSpaceCoeffs(x=x, d_s=d_s, d_c=d_c,
                           gate="z>z'" if direction == "up" else "z<z'")


@dataclass(frozen=True)
class SolidLayerCoefficients:
    """(x1..x5) per direction, referenced at the layer's peak boundary."""

    x_up: np.ndarray
    x_dn: np.ndarray

    def x(self, direction: str) -> np.ndarray:
        return self.x_up if direction == "up" else self.x_dn


@dataclass(frozen=True)
class FluidLayerCoefficients:
    """Rank-one (u, v) parameters per direction."""

    u_up: complex
    u_dn: complex
    v_up: complex
    v_dn: complex


@dataclass(frozen=True)
class VacuumLayerCoefficients:
    pass


@dataclass(frozen=True)
class SolidVectorLayerCoefficients:
    """(x2, x3) per direction for fluid-origin sources."""

    x2_up: complex
    x2_dn: complex
    x3_up: complex
    x3_dn: complex


@dataclass(frozen=True)
class FluidVectorLayerCoefficients:
    g_up: complex
    g_dn: complex


def _slots(phase: str, group: str) -> Tuple[str, ...]:
    if phase == "vacuum":
        return ()
    if group == "A":
        return ("x1", "x4", "x5") if phase == "solid" else ("v",)
    if group == "B":
        return ("x2", "x3") if phase == "solid" else ("u",)
    if group == "VEC":
        return ("x2", "x3") if phase == "solid" else ("g",)
    raise ValueError(group)


_GROUP_T = {"A": GROUP_A_T, "B": GROUP_B_T, "VEC": GROUP_B_T}


@dataclass(frozen=True)
class ElasticSpectralSolution:
    """Per-layer reaction coefficients of an elastic stack at fixed k_rho."""

    stack: LayerStack
    omega: float
    k_rho: float
    zp: float
    j: int
    source_kind: str
    ks: tuple
    kc: tuple
    ksz: tuple
    kcz: tuple
    up_ref: np.ndarray
    dn_ref: np.ndarray
    layers: tuple

    @property
    def k_max(self) -> float:
        best = 0.0
        for k in (*self.ks, *self.kc):
            if k is not None:
                best = max(best, abs(k))
        return best

    def phases(self, t: int, direction: str, z: float) -> Tuple[complex, complex]:
        """(shear, compressional) propagation factors of layer t at depth z."""
        tau = _TAU[direction]
        ref = self.up_ref[t] if direction == "up" else self.dn_ref[t]
        c = cmath.exp(tau * 1j * self.kcz[t] * (z - ref))
        s = cmath.exp(tau * 1j * self.ksz[t] * (z - ref)) \
            if self.ksz[t] is not None else 0.0
        return s, c

    def source_gate(self, direction: str, z: float) -> float:
        if _TAU[direction] > 0:
            return 1.0 if z > self.zp else 0.0
        return 1.0 if z < self.zp else 0.0

    def _side_check(self, t: int, z: float):
        if t == self.j and abs(z - self.zp) < 1e-14 * max(1.0, abs(z), abs(self.zp)):
            raise CoincidentDepths("z coincides with the source depth")


def _make_refs(stack: LayerStack) -> Tuple[np.ndarray, np.ndarray]:
    L = stack.L
    n = stack.n_layers
    up_ref = np.zeros(n)
    dn_ref = np.zeros(n)
    for t in range(n):
        if L:
            up_ref[t] = stack.interfaces[t - 1] if t >= 1 else stack.interfaces[0]
            dn_ref[t] = stack.interfaces[t] if t <= L - 1 else stack.interfaces[L - 1]
    return up_ref, dn_ref


def _source_free_values(sol_like: dict, m: int, side_layer: int, d: float) -> Tuple[complex, complex]:
    """(value, scale) of the free-space part of T_m at an interface depth."""
    stack = sol_like["stack"]
    omega, k_rho, zp, j = sol_like["omega"], sol_like["k_rho"], sol_like["zp"], sol_like["j"]
    if side_layer != j:
        return 0.0, 0.0
    mat = stack.materials[j]
    total = 0.0 + 0.0j
    scale = 0.0
    for direction in _DIRS:
        tau = _TAU[direction]
        gate = (d > zp) if tau > 0 else (d < zp)
        if not gate:
            continue
        if sol_like["source_kind"] == "tensor":
            ksz, kcz = sol_like["ksz"][j], sol_like["kcz"][j]
            ks = sol_like["ks"][j]
            s = cmath.exp(tau * 1j * ksz * (d - zp))
            c = cmath.exp(tau * 1j * kcz * (d - zp))
            rows = traction_scalars_solid(mat, k_rho, ksz, kcz, tau, s, c)[m]
            xf, _, _ = _free_space_x(mat.mu * ks * ks, ks, ksz, kcz, tau)
            vals = {f"x{i + 1}": xf[i] for i in range(5)}
            for slot, coef in rows.items():
                term = coef * vals[slot]
                total += term
                scale = max(scale, abs(term))
        else:
            kc, kcz = sol_like["kc"][j], sol_like["kcz"][j]
            c = cmath.exp(tau * 1j * kcz * (d - zp))
            rows = traction_scalars_fluid(mat, kc, kcz, tau, c)[m]
            g_amp = 1j / (2.0 * mat.gamma * kc * kc * kcz)
            term = rows.get("u", 0.0) * g_amp
            total += term
            scale = max(scale, abs(term))
    return total, scale


def solve_elastic_spectral(stack: LayerStack, omega: float, k_rho: float,
                           zp: float, j: Optional[int] = None,
                           source_kind: str = "tensor", *,
                           delta_loss: float = 0.0,
                           cond_limit: float = COND_LIMIT) -> ElasticSpectralSolution:
    """Solve the decoupled interface systems of an elastic stack at one k_rho."""
    if stack.problem_kind != "elastic":
        raise ValueError("solve_elastic_spectral needs an elastic stack")
    if source_kind not in ("tensor", "vector"):
        raise ValueError("source_kind must be 'tensor' or 'vector'")
    located = stack.locate_layer(zp)
    if j is None:
        j = located
    elif j != located:
        raise OnInterface(f"z'={zp!r} lies in layer {located}, not {j}")
    src_mat = stack.materials[j]
    if not isinstance(src_mat, ElasticMaterial):
        raise PhaseMismatch("the source layer must be a material layer")
    if source_kind == "tensor" and src_mat.phase != "solid":
        raise PhaseMismatch("tensor sources require a solid source layer")
    if source_kind == "vector" and src_mat.phase != "fluid":
        raise PhaseMismatch("vector sources require a fluid source layer")

    n = stack.n_layers
    ks: List[Optional[complex]] = [None] * n
    kc: List[Optional[complex]] = [None] * n
    ksz: List[Optional[complex]] = [None] * n
    kcz: List[Optional[complex]] = [None] * n
    for t, m in enumerate(stack.materials):
        if not isinstance(m, ElasticMaterial):
            continue
        wn = wavenumbers(m, omega, delta_loss)
        kc[t] = wn.kc
        kcz[t] = vertical_wavenumber(wn.kc, k_rho)
        if wn.ks is not None:
            ks[t] = wn.ks
            ksz[t] = vertical_wavenumber(wn.ks, k_rho)
    if source_kind == "tensor":
        if abs(ksz[j]) <= 1e-10 * abs(ks[j]) or abs(kcz[j]) <= 1e-10 * abs(kc[j]):
            raise BranchPoint("source layer sits on a branch point")
    elif abs(kcz[j]) <= 1e-10 * abs(kc[j]):
        raise BranchPoint("source layer sits on a branch point")

    up_ref, dn_ref = _make_refs(stack)
    sol_like = {"stack": stack, "omega": omega, "k_rho": k_rho, "zp": zp,
                "j": j, "source_kind": source_kind, "ks": ks, "kc": kc,
                "ksz": ksz, "kcz": kcz}

    groups = ("A", "B") if source_kind == "tensor" else ("VEC",)
    solved: Dict[str, Dict[Tuple[int, str, str], complex]] = {}
    for group in groups:
        solved[group] = _solve_group(sol_like, up_ref, dn_ref, group, cond_limit)

    layers = []
    for t, m in enumerate(stack.materials):
        if not isinstance(m, ElasticMaterial):
            layers.append(VacuumLayerCoefficients())
            continue

        def get(group, slot, direction, t=t):
            return solved.get(group, {}).get((t, direction, slot), 0.0)

        if source_kind == "tensor":
            if m.phase == "solid":
                layers.append(SolidLayerCoefficients(
                    x_up=np.array([get("A", "x1", "up"), get("B", "x2", "up"),
                                   get("B", "x3", "up"), get("A", "x4", "up"),
                                   get("A", "x5", "up")], dtype=complex),
                    x_dn=np.array([get("A", "x1", "dn"), get("B", "x2", "dn"),
                                   get("B", "x3", "dn"), get("A", "x4", "dn"),
                                   get("A", "x5", "dn")], dtype=complex)))
            else:
                layers.append(FluidLayerCoefficients(
                    u_up=get("B", "u", "up"), u_dn=get("B", "u", "dn"),
                    v_up=get("A", "v", "up"), v_dn=get("A", "v", "dn")))
        else:
            if m.phase == "solid":
                layers.append(SolidVectorLayerCoefficients(
                    x2_up=get("VEC", "x2", "up"), x2_dn=get("VEC", "x2", "dn"),
                    x3_up=get("VEC", "x3", "up"), x3_dn=get("VEC", "x3", "dn")))
            else:
                layers.append(FluidVectorLayerCoefficients(
                    g_up=get("VEC", "g", "up"), g_dn=get("VEC", "g", "dn")))

    return ElasticSpectralSolution(
        stack=stack, omega=omega, k_rho=float(k_rho), zp=float(zp), j=j,
        source_kind=source_kind, ks=tuple(ks), kc=tuple(kc), ksz=tuple(ksz),
        kcz=tuple(kcz), up_ref=up_ref, dn_ref=dn_ref, layers=tuple(layers))


def _phase_of(stack: LayerStack, t: int) -> str:
    m = stack.materials[t]
    return m.phase if isinstance(m, ElasticMaterial) else "vacuum"


def _solve_group(sol_like: dict, up_ref, dn_ref, group: str,
                 cond_limit: float) -> Dict[Tuple[int, str, str], complex]:
    stack: LayerStack = sol_like["stack"]
    k_rho, omega = sol_like["k_rho"], sol_like["omega"]
    n_layers = stack.n_layers
    L = stack.L

    index: Dict[Tuple[int, str, str], int] = {}
    for t in range(n_layers):
        for direction in _DIRS:
            for slot in _slots(_phase_of(stack, t), group):
                index[(t, direction, slot)] = len(index)
    n_unknown = len(index)
    if n_unknown == 0:
        return {}

    rows: List[np.ndarray] = []
    rhs: List[complex] = []

    def radiation_rows(t, direction):
        for slot in _slots(_phase_of(stack, t), group):
            row = np.zeros(n_unknown, dtype=complex)
            row[index[(t, direction, slot)]] = 1.0
            rows.append(row)
            rhs.append(0.0)

    def side_rows(t, d, m):
        """Coefficient contributions of layer t to [[T_m]] at depth d."""
        out = np.zeros(n_unknown, dtype=complex)
        phase = _phase_of(stack, t)
        if phase == "vacuum":
            return out
        mat = stack.materials[t]
        for direction in _DIRS:
            tau = _TAU[direction]
            ref = up_ref[t] if direction == "up" else dn_ref[t]
            c = cmath.exp(tau * 1j * sol_like["kcz"][t] * (d - ref))
            if phase == "solid":
                s = cmath.exp(tau * 1j * sol_like["ksz"][t] * (d - ref))
                coeffs = traction_scalars_solid(mat, k_rho, sol_like["ksz"][t],
                                                sol_like["kcz"][t], tau, s, c)[m]
            else:
                coeffs = traction_scalars_fluid(mat, sol_like["kc"][t],
                                                sol_like["kcz"][t], tau, c)[m]
            for slot, coef in coeffs.items():
                if group == "VEC" and slot == "u":
                    slot = "g"
                key = (t, direction, slot)
                if key in index:
                    out[index[key]] += coef
        return out

    radiation_top = _phase_of(stack, 0) != "vacuum"
    radiation_bot = _phase_of(stack, n_layers - 1) != "vacuum"
    if radiation_top:
        radiation_rows(0, "dn")
    for l, d in enumerate(stack.interfaces):
        t_set = _interface_t_set(_phase_of(stack, l), _phase_of(stack, l + 1))
        for m in t_set:
            if m not in _GROUP_T[group]:
                continue
            row = side_rows(l, d, m) - side_rows(l + 1, d, m)
            f_top, _ = _source_free_values(sol_like, m, l, d)
            f_bot, _ = _source_free_values(sol_like, m, l + 1, d)
            rows.append(row)
            rhs.append(-(f_top - f_bot))
    if radiation_bot:
        radiation_rows(n_layers - 1, "up")

    a = np.array(rows, dtype=complex)
    b = np.array(rhs, dtype=complex)
    if a.shape[0] != n_unknown:
        raise AssertionError(
            f"group {group} system is {a.shape[0]}x{n_unknown}, not square")
    x = band_solve(a, b.reshape(-1, 1), cond_limit=cond_limit)[:, 0]
    out = {key: x[i] for key, i in index.items()}
    # prohibited propagation directions are exactly zero by radiation
    if radiation_top:
        for slot in _slots(_phase_of(stack, 0), group):
            out[(0, "dn", slot)] = 0.0
    if radiation_bot:
        for slot in _slots(_phase_of(stack, n_layers - 1), group):
            out[(n_layers - 1, "up", slot)] = 0.0
    return out


# --- assembly ----------------------------------------------------------------

def _solid_slot_values(sol: ElasticSpectralSolution, t: int, z: float) -> dict:
    """Phased slot sums of a solid layer at depth z, free-space included.

    Returns per direction the shear-phased (x1, x3, x5) and compressional-
    phased (x2, x4) contributions, already multiplied by their exponentials.
    """
    coeffs = sol.layers[t]
    out = {}
    for direction in _DIRS:
        tau = _TAU[direction]
        s, c = sol.phases(t, direction, z)
        if sol.source_kind == "tensor":
            x = coeffs.x(direction).copy() if isinstance(coeffs, SolidLayerCoefficients) \
                else np.zeros(5, dtype=complex)
            vals = np.array([x[0] * s, x[1] * c, x[2] * s, x[3] * c, x[4] * s],
                            dtype=complex)
        else:
            x2 = coeffs.x2_up if direction == "up" else coeffs.x2_dn
            x3 = coeffs.x3_up if direction == "up" else coeffs.x3_dn
            vals = np.array([0.0, x2 * c, x3 * s, 0.0, 0.0], dtype=complex)
        if t == sol.j and sol.source_gate(direction, z):
            ksz, kcz = sol.ksz[t], sol.kcz[t]
            sf = cmath.exp(tau * 1j * ksz * (z - sol.zp))
            cf = cmath.exp(tau * 1j * kcz * (z - sol.zp))
            mat = sol.stack.materials[t]
            xf, _, _ = _free_space_x(mat.mu * sol.ks[t] ** 2, sol.ks[t], ksz, kcz, tau)
            vals += xf * np.array([sf, cf, sf, cf, sf])
        out[direction] = vals
    return out


def elastic_channels(sol: ElasticSpectralSolution, z: float) -> dict:
    """Azimuth-independent coefficient channels of the displacement kernel.

    Tensor sources give the five matrix channels {c1..c5}; vector sources the
    two vector channels {c2, c3}.  All channels are regular down to k_rho = 0.
    """
    t = sol.stack.locate_layer(z)
    sol._side_check(t, z)
    phase = _phase_of(sol.stack, t)
    if phase == "vacuum":
        if sol.source_kind == "tensor":
            return {f"c{i}": 0.0 for i in range(1, 6)}
        return {"c2": 0.0, "c3": 0.0}
    kr2 = sol.k_rho ** 2

    if phase == "solid":
        slot = _solid_slot_values(sol, t, z)
        ksz, kcz = sol.ksz[t], sol.kcz[t]
        c = {k: 0.0 + 0.0j for k in ("c1", "c2", "c3", "c4", "c5")}
        for direction in _DIRS:
            tau = _TAU[direction]
            x1s, x2c, x3s, x4c, x5s = slot[direction]
            tks, tkc = tau * 1j * ksz, tau * 1j * kcz
            c["c1"] += -tks * x1s
            c["c2"] += -kr2 * x3s + tkc * x2c
            c["c3"] += -tks * x3s + x2c
            c["c4"] += x1s - kr2 * x5s + tkc * x4c
            c["c5"] += -tks * x5s + x4c
        if sol.source_kind == "vector":
            return {"c2": c["c2"], "c3": c["c3"]}
        return c

    # fluid layer
    coeffs = sol.layers[t]
    kcz = sol.kcz[t]
    if sol.source_kind == "tensor":
        c2 = c3 = c4 = c5 = 0.0 + 0.0j
        for direction in _DIRS:
            tau = _TAU[direction]
            _, cph = sol.phases(t, direction, z)
            u = coeffs.u_up if direction == "up" else coeffs.u_dn
            v = coeffs.v_up if direction == "up" else coeffs.v_dn
            c2 += tau * 1j * kcz * u * cph
            c3 += u * cph
            c4 += tau * 1j * kcz * v * cph
            c5 += v * cph
        return {"c1": 0.0 + 0.0j, "c2": c2, "c3": c3, "c4": c4, "c5": c5}
    c2 = c3 = 0.0 + 0.0j
    for direction in _DIRS:
        tau = _TAU[direction]
        _, cph = sol.phases(t, direction, z)
        g = coeffs.g_up if direction == "up" else coeffs.g_dn
        g = g * cph
        if t == sol.j and sol.source_gate(direction, z):
            mat = sol.stack.materials[t]
            amp = 1j / (2.0 * mat.gamma * sol.kc[t] ** 2 * kcz)
            g += amp * cmath.exp(tau * 1j * kcz * (z - sol.zp))
        c2 += tau * 1j * kcz * g
        c3 += g
    return {"c2": c2, "c3": c3}


def assemble_G_elastic(sol: ElasticSpectralSolution, point: basis.SpectralPoint,
                       z: float):
    """Displacement kernel at a target depth.

    Tensor sources return (BasisCoefficients, 3x3 matrix); vector sources
    return (VectorBasisCoefficients, 3-vector).
    """
    if abs(point.k_rho - sol.k_rho) > 1e-9 * max(1.0, sol.k_rho):
        raise ValueError("spectral point radius disagrees with the solution's k_rho")
    ch = elastic_channels(sol, z)
    if sol.source_kind == "tensor":
        coeffs = basis.BasisCoefficients.from_restricted(
            ch["c1"], ch["c2"], ch["c3"], ch["c4"], ch["c5"])
        return coeffs, basis.realize(coeffs, point)
    coeffs = basis.VectorBasisCoefficients(ch["c2"], ch["c3"], 0.0)
    return coeffs, basis.realize_vector(coeffs, point)


# --- residual reporting ------------------------------------------------------

def evaluate_traction_scalars(sol: ElasticSpectralSolution, t: int, z: float,
                              include_source: bool = True) -> np.ndarray:
    """T1..T10 of layer t evaluated at depth z (length-10 complex array).

    Vector solutions fill only the T1/T3/T6/T9 analogues.  Vacuum layers
    return zeros.
    """
    vals, _ = _traction_values(sol, t, z, include_source)
    return vals


def _traction_values(sol: ElasticSpectralSolution, t: int, z: float,
                     include_source: bool = True) -> Tuple[np.ndarray, np.ndarray]:
    vals = np.zeros(10, dtype=complex)
    scales = np.zeros(10)
    phase = _phase_of(sol.stack, t)
    if phase == "vacuum":
        return vals, scales
    mat = sol.stack.materials[t]
    indices = range(1, 11) if sol.source_kind == "tensor" else GROUP_B_T

    def accumulate(rows, slot_values):
        for m in indices:
            for slot, coef in rows[m].items():
                term = coef * slot_values.get(slot, 0.0)
                vals[m - 1] += term
                scales[m - 1] = max(scales[m - 1], abs(term))

    coeffs = sol.layers[t]
    for direction in _DIRS:
        tau = _TAU[direction]
        s, c = sol.phases(t, direction, z)
        if phase == "solid":
            rows = traction_scalars_solid(mat, sol.k_rho, sol.ksz[t],
                                          sol.kcz[t], tau, s, c)
            if sol.source_kind == "tensor":
                x = coeffs.x(direction)
                slot_values = {f"x{i + 1}": x[i] for i in range(5)}
            else:
                slot_values = {
                    "x2": coeffs.x2_up if direction == "up" else coeffs.x2_dn,
                    "x3": coeffs.x3_up if direction == "up" else coeffs.x3_dn,
                }
        else:
            rows = traction_scalars_fluid(mat, sol.kc[t], sol.kcz[t], tau, c)
            if sol.source_kind == "tensor":
                slot_values = {
                    "u": coeffs.u_up if direction == "up" else coeffs.u_dn,
                    "v": coeffs.v_up if direction == "up" else coeffs.v_dn,
                }
            else:
                slot_values = {"u": coeffs.g_up if direction == "up" else coeffs.g_dn}
        accumulate(rows, slot_values)

    if include_source and t == sol.j:
        sol_like = {"stack": sol.stack, "omega": sol.omega, "k_rho": sol.k_rho,
                    "zp": sol.zp, "j": sol.j, "source_kind": sol.source_kind,
                    "ks": sol.ks, "kc": sol.kc, "ksz": sol.ksz, "kcz": sol.kcz}
        for m in indices:
            fv, fs = _source_free_values(sol_like, m, t, z)
            vals[m - 1] += fv
            scales[m - 1] = max(scales[m - 1], fs)
    return vals, scales


def elastic_interface_residuals(sol: ElasticSpectralSolution) -> list:
    """Relative jump residual of every imposed condition, per interface."""
    out = []
    for l, d in enumerate(sol.stack.interfaces):
        t_set = _interface_t_set(_phase_of(sol.stack, l), _phase_of(sol.stack, l + 1))
        if sol.source_kind == "vector":
            t_set = tuple(m for m in t_set if m in GROUP_B_T)
        top_v, top_s = _traction_values(sol, l, d)
        bot_v, bot_s = _traction_values(sol, l + 1, d)
        iface_scale = max((max(top_s[m - 1], bot_s[m - 1]) for m in t_set),
                          default=0.0)
        res = {}
        for m in t_set:
            # conditions whose sides are structurally zero (rounding-level
            # terms only) are judged against the interface's field scale
            scale = max(top_s[m - 1], bot_s[m - 1], 1e-4 * iface_scale)
            jump = abs(top_v[m - 1] - bot_v[m - 1])
            res[f"T{m}"] = jump / scale if scale > 0 else 0.0
        out.append(res)
    return out
