"""Dense complex vector/matrix arithmetic for small Hermitian problems.

Everything operates on plain numpy arrays: state vectors are 1-D complex
arrays, operators are square 2-D complex arrays, eigenvectors are matrix
columns. Intended for dimensions 2..64; no sparsity, no large-N tricks.
"""

from __future__ import annotations

import math

import numpy as np

__all__ = [
    "ConvergenceError",
    "HERMITIAN_ATOL",
    "UNITARY_ATOL",
    "NORMALIZED_ATOL",
    "inner",
    "vector_norm",
    "frobenius_norm",
    "max_abs",
    "require_hermitian",
    "require_unitary",
    "require_normalized",
    "hermitian_eigendecompose",
    "unitary_exponential",
]

HERMITIAN_ATOL = 1e-12
UNITARY_ATOL = 1e-10
NORMALIZED_ATOL = 1e-9

# Jacobi sweeps stop once the off-diagonal Frobenius norm drops below
# _SWEEP_TARGET * ||H||_F; two orders below the 1e-12 scales used downstream.
_SWEEP_TARGET = 1e-14
_MAX_SWEEPS = 100


class ConvergenceError(RuntimeError):
    """Jacobi sweep loop failed to reach its off-diagonal target."""


def inner(u, v) -> complex:
    """Inner product <u|v>, conjugate-linear in the first argument."""
    u = np.asarray(u)
    v = np.asarray(v)
    if u.ndim != 1 or v.ndim != 1:
        raise ValueError("inner expects 1-D vectors")
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")
    return complex(np.vdot(u, v))


def vector_norm(v) -> float:
    return float(np.linalg.norm(np.asarray(v)))


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a)))


def max_abs(a) -> float:
    """Largest elementwise magnitude."""
    return float(np.max(np.abs(np.asarray(a))))


def require_hermitian(h, atol: float = HERMITIAN_ATOL) -> np.ndarray:
    """Validate that ``h`` is a finite square Hermitian matrix.

    Elementwise |h[i,j] - conj(h[j,i])| must stay within ``atol``; this also
    bounds imaginary parts on the diagonal. Returns ``h`` as an ndarray.
    """
    h = np.asarray(h)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("operator must be a square matrix")
    if not np.all(np.isfinite(h)):
        raise ValueError("operator contains non-finite entries")
    defect = max_abs(h - h.conj().T)
    if defect > atol:
        raise ValueError(f"operator is not Hermitian (defect {defect:.3e} > {atol:.1e})")
    return h


def require_unitary(u, atol: float = UNITARY_ATOL) -> np.ndarray:
    """Validate that U†U stays within ``atol`` of the identity (max-norm)."""
    u = np.asarray(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValueError("operator must be a square matrix")
    if not np.all(np.isfinite(u)):
        raise ValueError("operator contains non-finite entries")
    defect = max_abs(u.conj().T @ u - np.eye(u.shape[0]))
    if defect > atol:
        raise ValueError(f"operator is not unitary (defect {defect:.3e} > {atol:.1e})")
    return u


def require_normalized(v, atol: float = NORMALIZED_ATOL) -> np.ndarray:
    v = np.asarray(v)
    if v.ndim != 1:
        raise ValueError("state must be a 1-D vector")
    if not np.all(np.isfinite(v)):
        raise ValueError("state contains non-finite entries")
    defect = abs(vector_norm(v) - 1.0)
    if defect > atol:
        raise ValueError(f"state is not normalized (defect {defect:.3e} > {atol:.1e})")
    return v


def _small_rotation_tangent(tau: float) -> float:
    # Smaller-magnitude root of t^2 - 2*tau*t - 1 = 0, keeping |theta| <= pi/4.
    t = -1.0 / (abs(tau) + math.sqrt(1.0 + tau * tau))
    return -t if tau < 0.0 else t


def _eig2(h: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # dim-2 case: the cyclic sweep is a single rotation, done with scalars.
    app = float(h[0, 0].real)
    aqq = float(h[1, 1].real)
    b = complex(h[0, 1])
    ab = abs(b)
    if ab == 0.0:
        if app <= aqq:
            return np.array([app, aqq]), np.eye(2, dtype=np.complex128)
        return np.array([aqq, app]), np.eye(2, dtype=np.complex128)[:, ::-1].copy()
    phase = b / ab
    t = _small_rotation_tangent((aqq - app) / (2.0 * ab))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    w1 = app + t * ab
    w2 = aqq - t * ab
    v1 = np.array([c, s * phase.conjugate()], dtype=np.complex128)
    v2 = np.array([-s * phase, c], dtype=np.complex128)
    if w1 <= w2:
        return np.array([w1, w2]), np.column_stack([v1, v2])
    return np.array([w2, w1]), np.column_stack([v2, v1])


def _rotate(a: np.ndarray, v: np.ndarray, p: int, q: int) -> None:
    # One Jacobi rotation zeroing a[p, q]; updates a <- U†aU and v <- vU.
    b = a[p, q]
    ab = abs(b)
    if ab == 0.0:
        return
    phase = b / ab
    t = _small_rotation_tangent((a[q, q].real - a[p, p].real) / (2.0 * ab))
    c = 1.0 / math.sqrt(1.0 + t * t)
    s = t * c
    sp = s * phase
    spc = s * phase.conjugate()

    col_p = a[:, p].copy()
    col_q = a[:, q].copy()
    a[:, p] = c * col_p + spc * col_q
    a[:, q] = -sp * col_p + c * col_q
    row_p = a[p, :].copy()
    row_q = a[q, :].copy()
    a[p, :] = c * row_p + sp * row_q
    a[q, :] = -spc * row_p + c * row_q
    a[p, q] = 0.0
    a[q, p] = 0.0
    a[p, p] = a[p, p].real
    a[q, q] = a[q, q].real

    vec_p = v[:, p].copy()
    vec_q = v[:, q].copy()
    v[:, p] = c * vec_p + spc * vec_q
    v[:, q] = -sp * vec_p + c * vec_q


def _offdiag_norm(a: np.ndarray) -> float:
    off = a - np.diag(a.diagonal())
    return float(np.linalg.norm(off))


def hermitian_eigendecompose(h, max_sweeps: int = _MAX_SWEEPS) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues and orthonormal eigenvectors of a Hermitian matrix.

    Cyclic Jacobi rotations run until the off-diagonal Frobenius norm falls
    below 1e-14 * ||H||_F. Returns ``(w, V)`` with ``w`` real ascending and
    the columns of ``V`` the matching eigenvectors, so ``H @ V[:, i]``
    equals ``w[i] * V[:, i]``.

    Raises ``ValueError`` for non-Hermitian input and ``ConvergenceError``
    if the target is not met within ``max_sweeps`` sweeps.
    """
    h = require_hermitian(h)
    n = h.shape[0]
    scale = frobenius_norm(h)
    if scale == 0.0:
        return np.zeros(n), np.eye(n, dtype=np.complex128)
    if n == 2:
        return _eig2(h)

    a = np.array(h, dtype=np.complex128)
    v = np.eye(n, dtype=np.complex128)
    target = _SWEEP_TARGET * scale
    for _ in range(max_sweeps):
        if _offdiag_norm(a) <= target:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                _rotate(a, v, p, q)
    else:
        if _offdiag_norm(a) > target:
            raise ConvergenceError(
                f"Jacobi iteration did not reach off-diagonal norm {target:.3e} "
                f"within {max_sweeps} sweeps"
            )
    w = a.diagonal().real.copy()
    order = np.argsort(w, kind="stable")
    return w[order], np.ascontiguousarray(v[:, order])


def unitary_exponential(h, s: float) -> np.ndarray:
    """exp(-i * s * H) for Hermitian H, assembled from the eigensystem."""
    w, v = hermitian_eigendecompose(h)
    return (v * np.exp(-1j * s * w)) @ v.conj().T
