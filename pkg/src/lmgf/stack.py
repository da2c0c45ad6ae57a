"""Layered geometry, materials and vertical wavenumbers.

Layers are indexed 0 (top) to L (bottom), separated by interfaces at depths
d_0 > d_1 > ... > d_{L-1}.  All kernels assume sources and targets strictly
inside layers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from .errors import OnInterface, VacuumHasNoWavenumber

__all__ = [
    "EmMaterial",
    "ElasticMaterial",
    "VacuumMaterial",
    "VACUUM",
    "Material",
    "ElasticWavenumbers",
    "LayerStack",
    "wavenumbers",
    "vertical_wavenumber",
]


@dataclass(frozen=True)
class EmMaterial:
    """Homogeneous dielectric/magnetic layer (permittivity, permeability)."""

    eps: complex
    mu: complex

    def __post_init__(self):
        if self.eps == 0 or self.mu == 0:
            raise ValueError("EM material needs nonzero eps and mu")


@dataclass(frozen=True)
class ElasticMaterial:
    """Isotropic elastic layer; mu == 0 means an inviscid fluid."""

    rho: float
    lam: float
    mu: float

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("density must be positive")
        if self.mu < 0:
            raise ValueError("shear modulus must be nonnegative")
        if self.lam <= 0:
            raise ValueError("first Lame constant must be positive")

    @property
    def phase(self) -> str:
        return "solid" if self.mu > 0 else "fluid"

    @property
    def gamma(self) -> float:
        """P-wave modulus lambda + 2*mu."""
        return self.lam + 2.0 * self.mu


class VacuumMaterial:
    """Empty half space (elastic problems only, outermost layers only)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "VACUUM"

    @property
    def phase(self) -> str:
        return "vacuum"


VACUUM = VacuumMaterial()

Material = Union[EmMaterial, ElasticMaterial, VacuumMaterial]


class ElasticWavenumbers(NamedTuple):
    """S- and P-wavenumbers of an elastic layer; ks is None in fluid."""

    ks: Optional[complex]
    kc: complex


def wavenumbers(material: Material, omega: float, delta_loss: float = 0.0):
    """Wavenumber(s) of a material at angular frequency omega.

    EM layers return a single complex k = sqrt(omega^2 eps mu); elastic
    layers return ``ElasticWavenumbers``.  ``delta_loss`` multiplies every
    wavenumber by (1 + 1j*delta_loss), pushing branch points off the real
    axis so the decaying-at-infinity propagation factors stay bounded.
    """
    loss = 1.0 + 1j * delta_loss
    if isinstance(material, VacuumMaterial):
        raise VacuumHasNoWavenumber("vacuum supports no propagating wave")
    if isinstance(material, EmMaterial):
        return np.sqrt(complex(omega * omega * material.eps * material.mu)) * loss
    kc = np.sqrt(complex(omega * omega * material.rho / material.gamma)) * loss
    if material.mu == 0:
        return ElasticWavenumbers(None, kc)
    ks = np.sqrt(complex(omega * omega * material.rho / material.mu)) * loss
    return ElasticWavenumbers(ks, kc)


def vertical_wavenumber(k: complex, k_rho: float) -> complex:
    """sqrt(k^2 - k_rho^2) with nonnegative real part.

    Ties at Re == 0 are broken toward Im >= 0, so evanescent components decay
    as z -> +inf under the e^{i k_z z} convention.
    """
    kz = complex(np.sqrt(complex(k * k - k_rho * k_rho)))
    if kz.real < 0:
        kz = -kz
    if kz.real == 0 and kz.imag < 0:
        kz = -kz
    return kz


@dataclass(frozen=True)
class LayerStack:
    """Interface depths plus one material per layer, top to bottom."""

    interfaces: tuple
    materials: tuple

    def __init__(self, interfaces: Sequence[float], materials: Sequence[Material]):
        object.__setattr__(self, "interfaces", tuple(float(d) for d in interfaces))
        object.__setattr__(self, "materials", tuple(materials))
        self._validate()

    def _validate(self):
        if len(self.materials) != len(self.interfaces) + 1:
            raise ValueError("need exactly one material per layer")
        for a, b in zip(self.interfaces, self.interfaces[1:]):
            if not a > b:
                raise ValueError("interface depths must be strictly decreasing")
        kinds = {type(m) for m in self.materials}
        if kinds == {EmMaterial}:
            kind = "maxwell"
        elif kinds <= {ElasticMaterial, VacuumMaterial} and ElasticMaterial in kinds:
            kind = "elastic"
            for t, m in enumerate(self.materials):
                if isinstance(m, VacuumMaterial) and t not in (0, self.n_layers - 1):
                    raise ValueError("vacuum is allowed only as an outermost layer")
        else:
            raise ValueError("materials must be all EM, or elastic with optional "
                             "outermost vacuum")
        object.__setattr__(self, "_problem_kind", kind)

    @property
    def problem_kind(self) -> str:
        return self._problem_kind

    @property
    def n_layers(self) -> int:
        return len(self.materials)

    @property
    def L(self) -> int:
        """Number of interfaces."""
        return len(self.interfaces)

    @property
    def geometry_scale(self) -> float:
        if not self.interfaces:
            return 1.0
        return max(1.0, max(abs(d) for d in self.interfaces))

    @property
    def eps_iface(self) -> float:
        """Depths closer than this to an interface are rejected."""
        return 1e-12 * self.geometry_scale

    def locate_layer(self, z: float) -> int:
        """Index t with d_{t-1} > z > d_t (d_{-1} = +inf, d_L = -inf)."""
        for d in self.interfaces:
            if abs(z - d) <= self.eps_iface:
                raise OnInterface(f"z={z!r} lies on the interface at {d!r}")
        t = 0
        while t < self.L and z < self.interfaces[t]:
            t += 1
        return t

    def material(self, t: int) -> Material:
        return self.materials[t]

    def phase(self, t: int) -> str:
        m = self.materials[t]
        if isinstance(m, EmMaterial):
            raise ValueError("EM layers have no solid/fluid phase")
        return m.phase

    def max_wavenumber(self, omega: float) -> float:
        """Largest |k| over all layers (both elastic waves count)."""
        best = 0.0
        for m in self.materials:
            if isinstance(m, VacuumMaterial):
                continue
            kk = wavenumbers(m, omega)
            if isinstance(kk, ElasticWavenumbers):
                if kk.ks is not None:
                    best = max(best, abs(kk.ks))
                best = max(best, abs(kk.kc))
            else:
                best = max(best, abs(kk))
        return best

    def layer_span(self, t: int) -> tuple:
        """(bottom, top) depths of layer t; infinities for the half spaces."""
        top = np.inf if t == 0 else self.interfaces[t - 1]
        bottom = -np.inf if t == self.L else self.interfaces[t]
        return bottom, top
