"""Nine-matrix basis for 3x3 spectral-domain tensors.

All layered-media kernels in this package are expanded on nine fixed 3x3
matrices whose entries are polynomials in (i*kx, i*ky).  The first five span
the "R" (rotationally even) subspace used by the physical solvers; the last
four span the complementary "I" subspace.  Products of basis matrices close
on the basis with coefficients that are polynomials in k_rho^2 only, which is
what makes coefficient-space solves possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateSpectralPoint

__all__ = [
    "SpectralPoint",
    "BasisCoefficients",
    "VectorBasisCoefficients",
    "realize_basis",
    "realize",
    "multiply_in_basis",
    "decompose",
    "product_rule_class",
    "vector_basis",
    "realize_vector",
    "decompose_vector",
    "degenerate_threshold",
]


@dataclass(frozen=True)
class SpectralPoint:
    """A point (kx, ky) of the horizontal spectral plane.

    ``k_rho`` and ``alpha`` are the polar coordinates.  ``from_polar`` keeps
    the supplied radius bit-exact, which matters for tests that assert the
    radial solvers never see the azimuth.
    """

    kx: float
    ky: float
    k_rho: float = field(default=None, repr=False)  # type: ignore[assignment]
    alpha: float = field(default=None, repr=False)  # type: ignore[assignment]

    def __post_init__(self):
        if self.k_rho is None:
            object.__setattr__(self, "k_rho", math.hypot(self.kx, self.ky))
        if self.alpha is None:
            object.__setattr__(self, "alpha", math.atan2(self.ky, self.kx))

    @classmethod
    def from_polar(cls, k_rho: float, alpha: float = 0.0) -> "SpectralPoint":
        if k_rho < 0:
            raise ValueError("k_rho must be nonnegative")
        return cls(k_rho * math.cos(alpha), k_rho * math.sin(alpha),
                   k_rho=float(k_rho), alpha=float(alpha))


def degenerate_threshold(k_scale: float = 1.0) -> float:
    """k_rho below this makes the 9x9 decomposition rank deficient."""
    return 1e-8 * max(1.0, abs(k_scale))


def realize_basis(index: int, point: SpectralPoint) -> np.ndarray:
    """Return basis matrix ``index`` (1..9) evaluated at (kx, ky).

    Entries involve only products and sign flips of kx, ky, so the result is
    exact in floating point.
    """
    kx, ky = point.kx, point.ky
    ikx, iky = 1j * kx, 1j * ky
    m = np.zeros((3, 3), dtype=complex)
    if index == 1:
        m[0, 0] = m[1, 1] = 1.0
    elif index == 2:
        m[2, 2] = 1.0
    elif index == 3:
        m[0, 2] = ikx
        m[1, 2] = iky
    elif index == 4:
        m[2, 0] = ikx
        m[2, 1] = iky
    elif index == 5:
        m[0, 0] = -kx * kx
        m[0, 1] = m[1, 0] = -kx * ky
        m[1, 1] = -ky * ky
    elif index == 6:
        m[2, 0] = -iky
        m[2, 1] = ikx
    elif index == 7:
        m[0, 2] = iky
        m[1, 2] = -ikx
    elif index == 8:
        m[0, 0] = kx * ky
        m[0, 1] = ky * ky
        m[1, 0] = -kx * kx
        m[1, 1] = -kx * ky
    elif index == 9:
        m[0, 1] = 1.0
        m[1, 0] = -1.0
    else:
        raise ValueError(f"basis index must be 1..9, got {index}")
    return m


# Structure constants: (u, v) -> ((w, a, b), ...) meaning
# J_u . J_v = sum_w (a + b * k_rho^2) J_w.  Pairs not listed multiply to zero.
_PRODUCT_TABLE = {
    (1, 1): ((1, 1, 0),),
    (1, 3): ((3, 1, 0),),
    (1, 5): ((5, 1, 0),),
    (1, 7): ((7, 1, 0),),
    (1, 8): ((8, 1, 0),),
    (1, 9): ((9, 1, 0),),
    (2, 2): ((2, 1, 0),),
    (2, 4): ((4, 1, 0),),
    (2, 6): ((6, 1, 0),),
    (3, 2): ((3, 1, 0),),
    (3, 4): ((5, 1, 0),),
    (3, 6): ((8, 1, 0), (9, 0, -1)),
    (4, 1): ((4, 1, 0),),
    (4, 3): ((2, 0, -1),),
    (4, 5): ((4, 0, -1),),
    (4, 9): ((6, 1, 0),),
    (5, 1): ((5, 1, 0),),
    (5, 3): ((3, 0, -1),),
    (5, 5): ((5, 0, -1),),
    (5, 9): ((8, 1, 0), (9, 0, -1)),
    (6, 1): ((6, 1, 0),),
    (6, 7): ((2, 0, 1),),
    (6, 8): ((4, 0, -1),),
    (6, 9): ((4, -1, 0),),
    (7, 2): ((7, 1, 0),),
    (7, 4): ((8, -1, 0),),
    (7, 6): ((1, 0, 1), (5, 1, 0)),
    (8, 1): ((8, 1, 0),),
    (8, 3): ((7, 0, 1),),
    (8, 5): ((8, 0, -1),),
    (8, 9): ((1, 0, -1), (5, -1, 0)),
    (9, 1): ((9, 1, 0),),
    (9, 3): ((7, 1, 0),),
    (9, 5): ((8, -1, 0),),
    (9, 7): ((3, -1, 0),),
    (9, 8): ((5, 1, 0),),
    (9, 9): ((1, -1, 0),),
}

_table_checked = False


def _check_product_table():
    """One-time self check of the transcribed structure constants."""
    global _table_checked
    if _table_checked:
        return
    pt = SpectralPoint(0.7, -0.4)
    s = pt.k_rho ** 2
    js = [realize_basis(i, pt) for i in range(1, 10)]
    for u in range(1, 10):
        for v in range(1, 10):
            direct = js[u - 1] @ js[v - 1]
            predicted = np.zeros((3, 3), dtype=complex)
            for (w, a, b) in _PRODUCT_TABLE.get((u, v), ()):
                predicted += (a + b * s) * js[w - 1]
            if not np.allclose(direct, predicted, rtol=0.0, atol=1e-13):
                raise AssertionError(
                    f"product table entry ({u},{v}) disagrees with the realized product"
                )
    _table_checked = True


@dataclass(frozen=True)
class BasisCoefficients:
    """Complex coefficients on the nine basis matrices.

    ``c`` is a length-9 array; ``c[i]`` multiplies basis matrix ``i + 1``.
    A value is "restricted" when the last four coefficients are exactly zero,
    i.e. it lies in the span of the first five matrices.
    """

    c: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.c, dtype=complex)
        if arr.shape != (9,):
            raise ValueError("expected 9 coefficients")
        object.__setattr__(self, "c", arr)

    @classmethod
    def zeros(cls) -> "BasisCoefficients":
        return cls(np.zeros(9, dtype=complex))

    @classmethod
    def unit(cls, index: int) -> "BasisCoefficients":
        c = np.zeros(9, dtype=complex)
        c[index - 1] = 1.0
        return cls(c)

    @classmethod
    def from_restricted(cls, c1=0.0, c2=0.0, c3=0.0, c4=0.0, c5=0.0) -> "BasisCoefficients":
        c = np.zeros(9, dtype=complex)
        c[:5] = (c1, c2, c3, c4, c5)
        return cls(c)

    @property
    def restricted(self) -> bool:
        return bool(np.all(self.c[5:] == 0))

    def realize(self, point: SpectralPoint) -> np.ndarray:
        return realize(self, point)


def realize(coeffs: BasisCoefficients, point: SpectralPoint) -> np.ndarray:
    """Sum of coefficients times realized basis matrices."""
    m = np.zeros((3, 3), dtype=complex)
    for i, ci in enumerate(coeffs.c):
        if ci != 0:
            m += ci * realize_basis(i + 1, point)
    return m


def multiply_in_basis(a: BasisCoefficients, b: BasisCoefficients,
                      k_rho_sq: complex) -> BasisCoefficients:
    """Coefficients of the matrix product, computed from the product table.

    Restricted inputs give a restricted result with exact zeros in the last
    four slots (the table routes no restricted x restricted product there).
    """
    _check_product_table()
    out = np.zeros(9, dtype=complex)
    for (u, v), terms in _PRODUCT_TABLE.items():
        p = a.c[u - 1] * b.c[v - 1]
        if p == 0:
            continue
        for (w, alpha, beta) in terms:
            out[w - 1] += p * (alpha + beta * k_rho_sq)
    return BasisCoefficients(out)


def decompose(m: np.ndarray, point: SpectralPoint, *,
              k_scale: float = 1.0) -> BasisCoefficients:
    """Unique basis coefficients of an arbitrary 3x3 complex matrix.

    Implemented as a dense 9x9 solve against the realized basis.  Matrices
    3..8 vanish as k_rho -> 0, so extraction is refused below the degeneracy
    threshold; assemble values directly instead if that limit is needed.
    """
    eps = degenerate_threshold(k_scale)
    if point.k_rho <= eps:
        raise DegenerateSpectralPoint(
            f"k_rho={point.k_rho:.3e} <= {eps:.3e}: basis loses rank")
    m = np.asarray(m, dtype=complex)
    if m.shape != (3, 3):
        raise ValueError("expected a 3x3 matrix")
    cols = np.column_stack([realize_basis(i, point).ravel() for i in range(1, 10)])
    c = np.linalg.solve(cols, m.ravel())
    return BasisCoefficients(c)


def product_rule_class(a_class: str, b_class: str) -> str:
    """Class of a product: R.R -> R, R.I -> I, I.R -> I, I.I -> R."""
    if a_class not in ("R", "I") or b_class not in ("R", "I"):
        raise ValueError("classes must be 'R' or 'I'")
    return "R" if a_class == b_class else "I"


# --- vector basis (third columns of matrices 2, 3 and 7) ---------------------

@dataclass(frozen=True)
class VectorBasisCoefficients:
    """Coefficients on the three-vector basis j2, j3, j7.

    Curl-free fields in fluid have c7 == 0.
    """

    c2: complex
    c3: complex
    c7: complex = 0.0


def vector_basis(index: int, point: SpectralPoint) -> np.ndarray:
    ikx, iky = 1j * point.kx, 1j * point.ky
    if index == 2:
        return np.array([0.0, 0.0, 1.0], dtype=complex)
    if index == 3:
        return np.array([ikx, iky, 0.0], dtype=complex)
    if index == 7:
        return np.array([iky, -ikx, 0.0], dtype=complex)
    raise ValueError(f"vector basis index must be 2, 3 or 7, got {index}")


def realize_vector(coeffs: VectorBasisCoefficients, point: SpectralPoint) -> np.ndarray:
    return (coeffs.c2 * vector_basis(2, point)
            + coeffs.c3 * vector_basis(3, point)
            + coeffs.c7 * vector_basis(7, point))


def decompose_vector(v: np.ndarray, point: SpectralPoint, *,
                     k_scale: float = 1.0) -> VectorBasisCoefficients:
    """Coefficients of a 3-vector on (j2, j3, j7); 3x3 dense solve."""
    eps = degenerate_threshold(k_scale)
    if point.k_rho <= eps:
        raise DegenerateSpectralPoint(
            f"k_rho={point.k_rho:.3e} <= {eps:.3e}: vector basis loses rank")
    cols = np.column_stack([vector_basis(i, point) for i in (2, 3, 7)])
    c2, c3, c7 = np.linalg.solve(cols, np.asarray(v, dtype=complex))
    return VectorBasisCoefficients(c2, c3, c7)
