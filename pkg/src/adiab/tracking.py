"""Instantaneous eigensystem along a time grid, with a smooth gauge.

Each eigenvector carries a free time-dependent phase. The tracker pins it
down in one of two ways:

* ``transport``: successive frames are phase-rotated so the overlap with
  the previous frame is real and positive (discrete parallel transport).
  Frame 0 follows an optional reference frame, or makes the first nonzero
  component of each vector real positive.
* ``analytic``: every frame is phase-aligned to the model's closed-form
  eigensystem. Only available for models that provide one; this is the
  gauge in which the rotating-field closed-form amplitudes are stated.

Phase-sensitive quantities (accumulated phase, coupling terms) depend on
this choice; all magnitudes reported downstream are gauge-free.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from adiab.linalg import frobenius_norm, hermitian_eigendecompose, inner
from adiab.models import Model
from adiab.propagate import TimeGrid

__all__ = [
    "DegeneracyError",
    "LevelCrossingError",
    "SpectralFrame",
    "SpectralPath",
    "BerryPhase",
    "track",
    "analytic_path",
    "eigen_derivative_fd",
    "eigen_derivative_pert",
    "berry_phase",
    "qac_ratio",
    "qac_ratios",
    "rotate_gauge",
]

_DEGENERACY_REL = 1e-12
_OVERLAP_FLOOR = 0.5


class DegeneracyError(RuntimeError):
    """Two instantaneous eigenvalues collided at some grid sample."""


class LevelCrossingError(RuntimeError):
    """Level identity could not be followed between consecutive frames."""


@dataclass(frozen=True)
class SpectralFrame:
    """Eigensystem snapshot at one time sample (vectors are matrix columns)."""

    t: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    eigenvector_derivatives: Optional[np.ndarray]
    min_gap: float


@dataclass
class SpectralPath:
    """Gauge-fixed eigensystem along a grid, stacked over samples.

    Shapes: times (K+1,), eigenvalues (K+1, dim), eigenvectors and
    derivatives (K+1, dim, dim) with level i in column ``[..., i]``.
    """

    grid: TimeGrid
    times: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    derivatives: Optional[np.ndarray]
    min_gaps: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[1]

    @property
    def n_samples(self) -> int:
        return self.times.shape[0]

    def frame(self, k: int) -> SpectralFrame:
        return SpectralFrame(
            t=float(self.times[k]),
            eigenvalues=self.eigenvalues[k],
            eigenvectors=self.eigenvectors[k],
            eigenvector_derivatives=None if self.derivatives is None else self.derivatives[k],
            min_gap=float(self.min_gaps[k]),
        )


@dataclass(frozen=True)
class BerryPhase:
    """Accumulated phase -∫E_n dt + i∫<E_n|Ė_n> dt along the grid.

    ``values`` is real (the integrand's i<E_n|Ė_n> part is real under a
    smooth gauge); ``imag_residue`` records how far from real the raw
    quadrature strayed.
    """

    level: int
    values: np.ndarray
    imag_residue: float


def _align_phase(vec: np.ndarray, ref: np.ndarray, what: str, t: float):
    z = inner(ref, vec)
    mag = abs(z)
    if mag < _OVERLAP_FLOOR:
        raise LevelCrossingError(
            f"{what}: overlap magnitude {mag:.3f} fell below {_OVERLAP_FLOOR} at t={t:.6g}"
        )
    vec *= z.conjugate() / mag


def _default_phase(vec: np.ndarray):
    nonzero = np.flatnonzero(np.abs(vec) > 1e-12)
    j = int(nonzero[0]) if nonzero.size else 0
    z = vec[j]
    if abs(z) > 0.0:
        vec *= z.conjugate() / abs(z)


def _check_gap(w: np.ndarray, scale: float, t: float, k: int) -> float:
    gaps = np.diff(w)
    min_gap = float(np.min(gaps)) if gaps.size else np.inf
    if min_gap <= _DEGENERACY_REL * max(scale, 1e-300):
        raise DegeneracyError(
            f"near-degenerate spectrum at sample {k} (t={t:.6g}): min gap {min_gap:.3e}"
        )
    return min_gap


def _fill_derivatives(vectors: np.ndarray, h: float) -> np.ndarray:
    """Second-order stencils: central inside, one-sided at the endpoints."""
    if vectors.shape[0] < 3:
        raise ValueError("derivative stencils need at least three samples")
    d = np.empty_like(vectors)
    d[1:-1] = (vectors[2:] - vectors[:-2]) / (2.0 * h)
    d[0] = (-3.0 * vectors[0] + 4.0 * vectors[1] - vectors[2]) / (2.0 * h)
    d[-1] = (3.0 * vectors[-1] - 4.0 * vectors[-2] + vectors[-3]) / (2.0 * h)
    return d


def track(
    model: Model,
    grid: TimeGrid,
    gauge: str = "transport",
    reference: Optional[np.ndarray] = None,
) -> SpectralPath:
    """Eigendecompose H(t) on every grid sample and fix a smooth gauge.

    ``reference`` (dim x dim, columns ordered by level) pins frame 0 in
    transport mode. Raises ``DegeneracyError`` on a vanishing gap and
    ``LevelCrossingError`` when consecutive frames cannot be identified
    level-by-level (overlap below 0.5 or eigenvalue order breaking).
    """
    if gauge not in ("transport", "analytic"):
        raise ValueError(f"unknown gauge {gauge!r}; expected 'transport' or 'analytic'")
    if gauge == "analytic" and model.analytic_eigensystem is None:
        raise ValueError("model does not provide a closed-form eigensystem")

    ts = grid.samples
    n_samples = ts.shape[0]
    dim = model.dim
    eigenvalues = np.empty((n_samples, dim))
    eigenvectors = np.empty((n_samples, dim, dim), dtype=np.complex128)
    min_gaps = np.empty(n_samples)

    prev = None
    for k in range(n_samples):
        t = float(ts[k])
        h_t = model.hamiltonian(t)
        w, v = hermitian_eigendecompose(h_t)
        min_gaps[k] = _check_gap(w, frobenius_norm(h_t), t, k)

        if gauge == "analytic":
            _, v_ref = model.analytic_eigensystem(t)
            for i in range(dim):
                _align_phase(v[:, i], v_ref[:, i], f"level {i} vs closed form", t)
        elif prev is None:
            if reference is not None:
                ref = np.asarray(reference)
                if ref.shape != (dim, dim):
                    raise ValueError(f"reference frame must be {dim}x{dim}, got {ref.shape}")
                for i in range(dim):
                    _align_phase(v[:, i], ref[:, i], f"level {i} vs reference", t)
            else:
                for i in range(dim):
                    _default_phase(v[:, i])
        else:
            overlaps = np.abs(prev.conj().T @ v)
            hits = np.argmax(overlaps, axis=1)
            if not np.array_equal(hits, np.arange(dim)):
                raise LevelCrossingError(
                    f"eigenvalue order broke between samples {k - 1} and {k} (t={t:.6g}); "
                    "suspected level crossing"
                )
            for i in range(dim):
                _align_phase(v[:, i], prev[:, i], f"level {i} continuity", t)

        eigenvalues[k] = w
        eigenvectors[k] = v
        prev = v

    derivatives = _fill_derivatives(eigenvectors, grid.h)
    return SpectralPath(
        grid=grid,
        times=ts,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        derivatives=derivatives,
        min_gaps=min_gaps,
    )


def analytic_path(model: Model, grid: TimeGrid) -> SpectralPath:
    """SpectralPath built purely from a model's closed forms (no eigensolver).

    Derivatives come from the closed-form expressions when the model supplies
    them, otherwise from the same finite-difference stencils as ``track``.
    """
    if model.analytic_eigensystem is None:
        raise ValueError("model does not provide a closed-form eigensystem")
    ts = grid.samples
    n_samples = ts.shape[0]
    dim = model.dim
    eigenvalues = np.empty((n_samples, dim))
    eigenvectors = np.empty((n_samples, dim, dim), dtype=np.complex128)
    derivatives = np.empty((n_samples, dim, dim), dtype=np.complex128)
    min_gaps = np.empty(n_samples)
    have_dv = model.analytic_eigensystem_derivative is not None
    for k in range(n_samples):
        t = float(ts[k])
        w, v = model.analytic_eigensystem(t)
        eigenvalues[k] = w
        eigenvectors[k] = v
        min_gaps[k] = _check_gap(w, float(np.max(np.abs(w))) or 1.0, t, k)
        if have_dv:
            derivatives[k] = model.analytic_eigensystem_derivative(t)
    if not have_dv:
        derivatives = _fill_derivatives(eigenvectors, grid.h)
    return SpectralPath(
        grid=grid,
        times=ts,
        eigenvalues=eigenvalues,
        eigenvectors=eigenvectors,
        derivatives=derivatives,
        min_gaps=min_gaps,
    )


def eigen_derivative_fd(path: SpectralPath, k: int, i: int) -> np.ndarray:
    """Finite-difference d|E_i>/dt at sample k from the gauge-fixed vectors."""
    v = path.eigenvectors
    last = path.n_samples - 1
    if not 0 <= k <= last:
        raise IndexError(f"sample index {k} out of range 0..{last}")
    h = path.grid.h
    if k == 0:
        return (-3.0 * v[0, :, i] + 4.0 * v[1, :, i] - v[2, :, i]) / (2.0 * h)
    if k == last:
        return (3.0 * v[last, :, i] - 4.0 * v[last - 1, :, i] + v[last - 2, :, i]) / (2.0 * h)
    return (v[k + 1, :, i] - v[k - 1, :, i]) / (2.0 * h)


def eigen_derivative_pert(path: SpectralPath, k: int, hdot: np.ndarray, i: int) -> np.ndarray:
    """Off-level part of d|E_i>/dt from first-order perturbation theory.

    Sum over m != i of <E_m|Hdot|E_i>/(E_i - E_m) |E_m>. The component along
    |E_i> is pure gauge and is not determined by Hdot; callers that need the
    full derivative take it from the finite-difference path.
    """
    v = path.eigenvectors[k]
    w = path.eigenvalues[k]
    hv = np.asarray(hdot) @ v[:, i]
    out = np.zeros(path.dim, dtype=np.complex128)
    for m in range(path.dim):
        if m == i:
            continue
        gap = w[i] - w[m]
        if abs(gap) <= _DEGENERACY_REL * max(float(np.max(np.abs(w))), 1e-300):
            raise DegeneracyError(f"degenerate gap between levels {i} and {m} at sample {k}")
        out += (inner(v[:, m], hv) / gap) * v[:, m]
    return out


def berry_phase(path: SpectralPath, n: int) -> BerryPhase:
    """Trapezoidal accumulation of -E_n + i<E_n|Ė_n> from t_start.

    The result starts at zero and is real under a smooth gauge; an imaginary
    residue above 1e-6 aborts, since it signals a broken gauge.
    """
    if path.derivatives is None:
        raise ValueError("path carries no eigenvector derivatives")
    vn = path.eigenvectors[:, :, n]
    dn = path.derivatives[:, :, n]
    geometric = np.einsum("kj,kj->k", vn.conj(), dn)
    integrand = -path.eigenvalues[:, n] + 1j * geometric
    h = path.grid.h
    increments = 0.5 * h * (integrand[1:] + integrand[:-1])
    raw = np.concatenate([[0.0 + 0.0j], np.cumsum(increments)])
    residue = float(np.max(np.abs(raw.imag)))
    if residue > 1e-6:
        raise ValueError(f"accumulated phase has imaginary residue {residue:.3e}; gauge broken")
    return BerryPhase(level=n, values=raw.real.copy(), imag_residue=residue)


def qac_ratio(path: SpectralPath, k: int, m: int, n: int) -> float:
    """|<E_m|Ė_n>| / |E_m - E_n| at one sample, for m != n."""
    if m == n:
        raise ValueError("qac ratio is defined for distinct levels only")
    if path.derivatives is None:
        raise ValueError("path carries no eigenvector derivatives")
    w = path.eigenvalues[k]
    gap = w[m] - w[n]
    if abs(gap) <= _DEGENERACY_REL * max(float(np.max(np.abs(w))), 1e-300):
        raise DegeneracyError(f"degenerate gap between levels {m} and {n} at sample {k}")
    coupling = inner(path.eigenvectors[k, :, m], path.derivatives[k, :, n])
    return abs(coupling) / abs(gap)


def qac_ratios(path: SpectralPath, n: int) -> np.ndarray:
    """(K+1, dim) array of |<E_m|Ė_n>|/|E_m - E_n|, NaN on the m == n column."""
    if path.derivatives is None:
        raise ValueError("path carries no eigenvector derivatives")
    couplings = np.einsum("kjm,kj->km", path.eigenvectors.conj(), path.derivatives[:, :, n])
    gaps = path.eigenvalues - path.eigenvalues[:, n][:, np.newaxis]
    out = np.full(couplings.shape, np.nan)
    mask = np.arange(path.dim) != n
    out[:, mask] = np.abs(couplings[:, mask]) / np.abs(gaps[:, mask])
    return out


def rotate_gauge(path: SpectralPath, phases: np.ndarray) -> SpectralPath:
    """Apply per-level phase rotations e^{i phases[k, i]} and re-derive.

    ``phases`` has shape (K+1, dim). Derivatives are rebuilt with the same
    stencils, so downstream gauge-covariant quantities see a consistently
    rotated path.
    """
    phases = np.asarray(phases, dtype=float)
    if phases.shape != (path.n_samples, path.dim):
        raise ValueError(f"phases must have shape {(path.n_samples, path.dim)}")
    rotated = path.eigenvectors * np.exp(1j * phases)[:, np.newaxis, :]
    return replace(
        path,
        eigenvectors=rotated,
        derivatives=_fill_derivatives(rotated, path.grid.h),
    )
