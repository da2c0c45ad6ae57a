"""Spatial reconstruction by Bessel-weighted radial quadrature.

The inverse horizontal Fourier transform of an azimuth-independent channel
c(k_rho) times an entry polynomial in (i kx, i ky) reduces to integrals

    (1/2pi) int_0^inf c(k_rho) k_rho^p J_n(k_rho rho) k_rho dk_rho

with n in {0, 1, 2}.  Degree-two channels are integrated in their cancelled
form (the k_rho^2 factor folded into the channel), so nothing singular is
ever sampled near k_rho = 0.  Quadrature is adaptive Gauss-Kronrod on panels
split at the branch-point abscissae, with a geometric tail whose remainder is
estimated by ratio extrapolation.  Node order is deterministic, so results
are bit-for-bit reproducible at a fixed spec.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import jv

from . import basis, elastic, maxwell
from .errors import NonConvergent
from .stack import ElasticMaterial, LayerStack

__all__ = [
    "QuadratureSpec",
    "RadialIntegrand",
    "inverse_radial_transform",
    "spatial_green",
]


@dataclass(frozen=True)
class QuadratureSpec:
    """Truncation, tolerance and regularization of the radial quadrature."""

    max_k_rho_factor: float = 12.0   # truncation in units of max |k|
    rel_tol: float = 1e-6
    delta_loss: float = 1e-5         # relative imaginary part added to every k
    panel_count: int = 24            # cap on pre-adaptive panels
    max_depth: int = 48

    def __post_init__(self):
        if self.max_k_rho_factor < 2.0:
            raise ValueError("truncation must be at least 2x the largest wavenumber")
        if not 0.0 < self.rel_tol <= 1e-2:
            raise ValueError("rel_tol must lie in (0, 1e-2]")
        if self.panel_count < 4:
            raise ValueError("panel_count must be at least 4")


@dataclass(frozen=True)
class RadialIntegrand:
    """One azimuth-independent channel to be pushed through the transform."""

    f: Callable[[float], complex]
    order: int
    rho: float
    branch_points: Tuple[float, ...] = ()
    osc_scale: Optional[float] = None   # oscillation length scale; default rho

    def __post_init__(self):
        if self.order not in (0, 1, 2):
            raise ValueError("Bessel order must be 0, 1 or 2")
        if self.rho < 0:
            raise ValueError("target radius must be nonnegative")


# 15-point Kronrod rule with embedded 7-point Gauss rule on [-1, 1]
_XGK = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_WGK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469,
    0.381830050505119, 0.279705391489277, 0.129484966168870,
])


def _gk15(f, a: float, b: float):
    c = 0.5 * (a + b)
    h = 0.5 * (b - a)
    vals = np.array([np.atleast_1d(f(c + h * x)) for x in _XGK])
    kron = h * np.tensordot(_WGK, vals, axes=(0, 0))
    gauss = h * np.tensordot(_WG, vals[1::2], axes=(0, 0))
    return kron, np.abs(kron - gauss)


def _adaptive(f, a: float, b: float, err_density: float, depth: int,
              max_depth: int):
    val, err = _gk15(f, a, b)
    if depth >= max_depth or np.all(err <= err_density * (b - a)):
        return val
    m = 0.5 * (a + b)
    return (_adaptive(f, a, m, err_density, depth + 1, max_depth)
            + _adaptive(f, m, b, err_density, depth + 1, max_depth))


def _panels(kmax: float, branch_points: Sequence[float], osc: float,
            panel_count: int):
    """Deterministic panel edges: branch-point splits plus a geometric tail."""
    edges = [0.0]
    bps = sorted({float(b) for b in branch_points if 0.0 < b < kmax})
    edges.extend(bps)
    start = edges[-1] if edges[-1] > 0 else kmax / 2 ** (panel_count // 2)
    p = start
    while p < kmax:
        p = min(2.0 * p if p > 0 else kmax / 64.0, kmax)
        edges.append(p)
    edges[-1] = kmax
    # cap panel width so one panel spans few oscillation periods
    if osc > 0:
        cap = max(4.0 * math.pi / osc, kmax / (4.0 * panel_count))
        refined = [edges[0]]
        for e in edges[1:]:
            while e - refined[-1] > cap:
                refined.append(refined[-1] + cap)
            refined.append(e)
        edges = refined
    return [(a, b) for a, b in zip(edges, edges[1:]) if b > a]


def _integrate_vector(f, kmax: float, branch_points, osc: float,
                      spec: QuadratureSpec):
    """Integral over [0, kmax] plus a ratio-extrapolated tail estimate."""
    panels = _panels(kmax, branch_points, osc, spec.panel_count)
    rough = [np.atleast_1d(_gk15(f, a, b)[0]) for a, b in panels]
    scale = max(float(np.max(np.abs(np.sum(rough, axis=0)))), 1e-300)
    err_density = spec.rel_tol * scale / (2.0 * kmax)
    pieces = [_adaptive(f, a, b, err_density, 0, spec.max_depth)
              for a, b in panels]
    total = np.sum(pieces, axis=0)
    # tail from the geometric decay of the last two panels
    last = float(np.max(np.abs(pieces[-1])))
    prev = float(np.max(np.abs(pieces[-2]))) if len(pieces) > 1 else 0.0
    if last == 0.0:
        tail = 0.0
    elif prev > last:
        q = last / prev
        tail = last * q / (1.0 - q)
    else:
        tail = math.inf
    return total, tail, scale


def inverse_radial_transform(integrand: RadialIntegrand,
                             spec: QuadratureSpec, *,
                             k_scale: float = 1.0) -> complex:
    """(1/2pi) int_0^inf f(k_rho) J_n(k_rho rho) k_rho dk_rho.

    The integral is truncated at ``spec.max_k_rho_factor * k_scale``; the
    remainder is estimated from the decay of the final panels and must fall
    below the requested tolerance, otherwise ``NonConvergent`` is raised.
    """
    kmax = spec.max_k_rho_factor * max(k_scale, 1e-300)
    n, rho = integrand.order, integrand.rho

    def g(kr):
        return integrand.f(kr) * jv(n, kr * rho) * kr / (2.0 * math.pi)

    osc = integrand.osc_scale if integrand.osc_scale is not None else rho
    total, tail, scale = _integrate_vector(
        g, kmax, integrand.branch_points, osc, spec)
    if tail > spec.rel_tol * max(float(np.max(np.abs(total))), 1e-3 * scale):
        raise NonConvergent(
            f"tail estimate {tail:.3e} exceeds tolerance at truncation {kmax:.3e}")
    return complex(total[0])


# --- entry polynomials and their Bessel images --------------------------------

# tensor entries of each basis matrix: (row, col, monomial, sign)
_ENTRY_TABLE = {
    1: [(0, 0, "1", 1.0), (1, 1, "1", 1.0)],
    2: [(2, 2, "1", 1.0)],
    3: [(0, 2, "x", 1.0), (1, 2, "y", 1.0)],
    4: [(2, 0, "x", 1.0), (2, 1, "y", 1.0)],
    5: [(0, 0, "xx", -1.0), (0, 1, "xy", -1.0), (1, 0, "xy", -1.0),
        (1, 1, "yy", -1.0)],
    6: [(2, 0, "y", -1.0), (2, 1, "x", 1.0)],
    7: [(0, 2, "y", 1.0), (1, 2, "x", -1.0)],
    8: [(0, 0, "xy", 1.0), (0, 1, "yy", 1.0), (1, 0, "xx", -1.0),
        (1, 1, "xy", -1.0)],
    9: [(0, 1, "1", 1.0), (1, 0, "1", -1.0)],
}

# vector entries of j2 and j3 (the curl-free vector problem has no j7 part)
_VECTOR_ENTRY_TABLE = {
    2: [(2, "1", 1.0)],
    3: [(0, "x", 1.0), (1, "y", 1.0)],
}


def _monomial_map(phi: float):
    """Bessel order, azimuth factor and k_rho power of each entry monomial.

    Monomials are in (i kx, i ky): '1', 'x' = i kx, 'y' = i ky, and the
    degree-two real products 'xx' = kx^2, 'xy' = kx ky, 'yy' = ky^2.
    """
    c, s = math.cos(phi), math.sin(phi)
    c2, s2 = math.cos(2 * phi), math.sin(2 * phi)
    return {
        "1": ((0, 1.0, 0),),
        "x": ((1, -c, 1),),
        "y": ((1, -s, 1),),
        "xx": ((0, 0.5, 2), (2, -0.5 * c2, 2)),
        "xy": ((2, -0.5 * s2, 2),),
        "yy": ((0, 0.5, 2), (2, 0.5 * c2, 2)),
    }


# channel key -> (basis index, k_rho power folded into the channel)
_CHANNEL_SETS = {
    "GE": {"c1": (1, 0), "c2": (2, 0), "c3": (3, 0), "c4": (4, 0), "n5": (5, 2)},
    "GH": {"c6": (6, 0), "c7": (7, 0), "n8": (8, 2), "c9": (9, 0)},
    "elastic-tensor": {f"c{i}": (i, 0) for i in range(1, 6)},
    "elastic-vector": {"c2": (2, 0), "c3": (3, 0)},
}


def _branch_abscissae(stack: LayerStack, omega: float) -> Tuple[float, ...]:
    out = []
    for m in stack.materials:
        if isinstance(m, ElasticMaterial):
            from .stack import wavenumbers
            wn = wavenumbers(m, omega)
            if wn.ks is not None:
                out.append(abs(wn.ks))
            out.append(abs(wn.kc))
        elif hasattr(m, "eps"):
            from .stack import wavenumbers
            out.append(abs(wavenumbers(m, omega)))
    return tuple(out)


def spatial_green(stack: LayerStack, omega: float, source, target,
                  which: str, spec: Optional[QuadratureSpec] = None) -> np.ndarray:
    """Spatial-domain kernel between two points.

    ``which`` is ``"GE"`` or ``"GH"`` for EM stacks and ``"elastic"`` for
    elastic stacks (tensor for solid source layers, displacement vector for
    fluid ones).  Returns a 3x3 array, or a length-3 array for fluid-source
    elastic problems.
    """
    if spec is None:
        spec = QuadratureSpec()
    xs, ys, zp = (float(v) for v in source)
    xt, yt, zt = (float(v) for v in target)
    rho = math.hypot(xt - xs, yt - ys)
    phi = math.atan2(yt - ys, xt - xs)
    k_scale = stack.max_wavenumber(omega)

    if which in ("GE", "GH"):
        if stack.problem_kind != "maxwell":
            raise ValueError("GE/GH need an EM stack")
        channel_set = _CHANNEL_SETS[which]

        def channels(kr):
            sol = maxwell.solve_em_spectral(stack, omega, kr, zp,
                                            delta_loss=spec.delta_loss)
            return maxwell.em_channels(sol, zt, which)
        vector_problem = False
    elif which == "elastic":
        if stack.problem_kind != "elastic":
            raise ValueError("'elastic' needs an elastic stack")
        j = stack.locate_layer(zp)
        source_kind = "tensor" if stack.materials[j].phase == "solid" else "vector"
        channel_set = _CHANNEL_SETS[f"elastic-{source_kind}"]

        def channels(kr):
            sol = elastic.solve_elastic_spectral(stack, omega, kr, zp,
                                                 source_kind=source_kind,
                                                 delta_loss=spec.delta_loss)
            return elastic.elastic_channels(sol, zt)
        vector_problem = source_kind == "vector"
    else:
        raise ValueError("which must be 'GE', 'GH' or 'elastic'")

    mono = _monomial_map(phi)
    entry_table = _VECTOR_ENTRY_TABLE if vector_problem else _ENTRY_TABLE

    # enumerate the distinct radial integrals
    keys = []
    for ch, (jidx, shift) in channel_set.items():
        if jidx not in entry_table:
            continue
        monomials = {e[-2] for e in entry_table[jidx]}
        for mname in monomials:
            for (n, _ang, kpow) in mono[mname]:
                key = (ch, n, kpow - shift)
                if key not in keys:
                    keys.append(key)
    key_index = {key: i for i, key in enumerate(keys)}

    def f(kr):
        ch = channels(kr)
        out = np.zeros(len(keys), dtype=complex)
        for (name, n, p), i in key_index.items():
            out[i] = ch[name] * kr ** p * jv(n, kr * rho) * kr / (2.0 * math.pi)
        return out

    osc = rho + abs(zt - zp)
    total, tail, scale = _integrate_vector(
        f, spec.max_k_rho_factor * k_scale, _branch_abscissae(stack, omega),
        osc, spec)
    if tail > spec.rel_tol * max(float(np.max(np.abs(total))), 1e-3 * scale):
        raise NonConvergent(
            f"tail estimate {tail:.3e} exceeds tolerance at truncation")

    shape = (3,) if vector_problem else (3, 3)
    g = np.zeros(shape, dtype=complex)
    for ch, (jidx, shift) in channel_set.items():
        if jidx not in entry_table:
            continue
        for entry in entry_table[jidx]:
            if vector_problem:
                row, mname, sign = entry
                idx = (row,)
            else:
                row, col, mname, sign = entry
                idx = (row, col)
            for (n, ang, kpow) in mono[mname]:
                g[idx] += sign * ang * total[key_index[(ch, n, kpow - shift)]]
    return g
