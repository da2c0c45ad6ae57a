"""Small shared linear-algebra helpers for the interface systems."""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .errors import SingularSystem

#: Interface systems with 1-norm condition beyond this raise SingularSystem.
COND_LIMIT = 1e13


def band_solve(a: np.ndarray, b: np.ndarray, *, cond_limit: float = COND_LIMIT):
    """Solve a small dense-assembled banded system with partial pivoting.

    The bandwidth is measured from the nonzero pattern and the system is
    handed to the LAPACK banded LU.  A 1-norm condition estimate guards
    against spectral poles; those raise ``SingularSystem``.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n) or b.shape[0] != n:
        raise ValueError("system is not square or rhs size mismatch")
    if n == 0:
        return b.copy()
    if not np.all(np.isfinite(a)) or not np.all(np.isfinite(b)):
        raise SingularSystem("non-finite entries in the interface system")
    cond = _cond1(a)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularSystem(f"interface system condition {cond:.3e} exceeds "
                             f"{cond_limit:.1e} (spectral pole?)")
    rows, cols = np.nonzero(a)
    if rows.size == 0:
        raise SingularSystem("interface system is identically zero")
    kl = int(np.max(rows - cols))
    ku = int(np.max(cols - rows))
    ab = np.zeros((kl + ku + 1, n), dtype=complex)
    for i, j in zip(rows, cols):
        ab[ku + i - j, j] = a[i, j]
    try:
        return scipy.linalg.solve_banded((kl, ku), ab, b)
    except np.linalg.LinAlgError as exc:  # exact singularity in the LU
        raise SingularSystem(str(exc)) from exc


def _cond1(a: np.ndarray) -> float:
    try:
        return float(abs(np.linalg.cond(a, 1)))
    except np.linalg.LinAlgError:
        return np.inf


def consistent_lstsq(a: np.ndarray, b: np.ndarray, *, rel_tol: float = 1e-8):
    """Minimum-norm least-squares solve of a consistent (possibly rank
    deficient) system.

    Returns ``(x, cond)`` where ``cond`` is the ratio of the largest kept
    singular value to the smallest.  Raises ``SingularSystem`` when the
    residual shows the system is actually inconsistent (a spectral pole).
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    x, _, rank, sv = np.linalg.lstsq(a, b, rcond=None)
    scale = np.linalg.norm(a) * np.linalg.norm(x) + np.linalg.norm(b)
    resid = np.linalg.norm(a @ x - b)
    if scale > 0 and resid > rel_tol * scale:
        raise SingularSystem(
            f"least-squares residual {resid / scale:.3e} exceeds {rel_tol:.1e}")
    cond = float(sv[0] / sv[rank - 1]) if rank > 0 else np.inf
    return x, cond
