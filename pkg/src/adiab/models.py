"""Concrete time-dependent Hamiltonians and their closed-form companions.

The rotating-field two-level model is exactly solvable; its eigensystem,
eigenvector derivatives and transition amplitudes ship alongside the matrix
form and act as oracles for the numerical pipeline. Natural units are used
throughout (hbar = 1), so every frequency is an energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "SchwingerParams",
    "AnalyticSolution",
    "Model",
    "effective_rabi_frequency",
    "schwinger_hamiltonian",
    "schwinger_hamiltonian_derivative",
    "schwinger_analytic_eigensystem",
    "schwinger_analytic_eigensystem_derivative",
    "schwinger_analytic_amplitudes",
    "schwinger_solution",
    "schwinger_model",
    "custom_model",
    "random_smooth_model",
    "transformed_hamiltonian",
    "transformed_hamiltonian_derivative",
]


@dataclass(frozen=True)
class SchwingerParams:
    """Rotating-field two-level model parameters.

    omega0: field strength (> 0), sets the constant +/- omega0/2 spectrum.
    omega:  rotation rate of the field about the z axis (>= 0).
    theta:  cone angle between field and z axis, in [0, pi].
    """

    omega0: float
    omega: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and self.omega0 > 0.0):
            raise ValueError(f"omega0 must be positive and finite, got {self.omega0}")
        if not (math.isfinite(self.omega) and self.omega >= 0.0):
            raise ValueError(f"omega must be nonnegative and finite, got {self.omega}")
        if not (math.isfinite(self.theta) and 0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta must lie in [0, pi], got {self.theta}")


def effective_rabi_frequency(p: SchwingerParams) -> float:
    """sqrt(omega0^2 + omega^2 - 2*omega0*omega*cos(theta))."""
    return math.sqrt(
        p.omega0 * p.omega0
        + p.omega * p.omega
        - 2.0 * p.omega0 * p.omega * math.cos(p.theta)
    )


def schwinger_hamiltonian(p: SchwingerParams, t: float) -> np.ndarray:
    """(omega0/2) * [[cos θ, sin θ e^{-iωt}], [sin θ e^{iωt}, -cos θ]]."""
    half = 0.5 * p.omega0
    off = half * math.sin(p.theta) * np.exp(-1j * p.omega * t)
    diag = half * math.cos(p.theta)
    return np.array([[diag, off], [np.conj(off), -diag]], dtype=np.complex128)


def schwinger_hamiltonian_derivative(p: SchwingerParams, t: float) -> np.ndarray:
    """Elementwise time derivative of the rotating-field Hamiltonian."""
    half = 0.5 * p.omega0
    doff = -1j * p.omega * half * math.sin(p.theta) * np.exp(-1j * p.omega * t)
    return np.array([[0.0, doff], [np.conj(doff), 0.0]], dtype=np.complex128)


def schwinger_analytic_eigensystem(p: SchwingerParams, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form eigenvalues (-omega0/2, +omega0/2) and eigenvector columns.

    The eigenvector phases carry e^{∓iωt/2} factors; this is the fixed gauge
    in which all closed-form amplitudes below are stated.
    """
    half_sin = math.sin(0.5 * p.theta)
    half_cos = math.cos(0.5 * p.theta)
    up = np.exp(-0.5j * p.omega * t)
    dn = np.exp(0.5j * p.omega * t)
    v1 = np.array([up * half_sin, -dn * half_cos], dtype=np.complex128)
    v2 = np.array([up * half_cos, dn * half_sin], dtype=np.complex128)
    w = np.array([-0.5 * p.omega0, 0.5 * p.omega0])
    return w, np.column_stack([v1, v2])


def schwinger_analytic_eigensystem_derivative(p: SchwingerParams, t: float) -> np.ndarray:
    """Time derivatives of the closed-form eigenvector columns (same gauge)."""
    half_sin = math.sin(0.5 * p.theta)
    half_cos = math.cos(0.5 * p.theta)
    up = np.exp(-0.5j * p.omega * t)
    dn = np.exp(0.5j * p.omega * t)
    rate = 0.5j * p.omega
    d1 = np.array([-rate * up * half_sin, -rate * dn * half_cos], dtype=np.complex128)
    d2 = np.array([-rate * up * half_cos, rate * dn * half_sin], dtype=np.complex128)
    return np.column_stack([d1, d2])


def schwinger_analytic_amplitudes(p: SchwingerParams, t):
    """Closed-form (c1, c2) for a run started in the lower eigenstate.

    c1 = cos(ω̃t/2) + i sin(ω̃t/2) (omega0 - omega cos θ)/ω̃
    c2 = i (omega/ω̃) sin θ sin(ω̃t/2)

    ``t`` may be a scalar or an array; |c1|^2 + |c2|^2 == 1 identically.
    """
    t = np.asarray(t, dtype=float)
    wt = effective_rabi_frequency(p)
    half = 0.5 * wt * t
    if wt > 1e-300:
        ratio = np.sin(half) / wt
    else:
        ratio = 0.5 * t  # sin(x)/x limit for a vanishing effective frequency
    c1 = np.cos(half) + 1j * (p.omega0 - p.omega * math.cos(p.theta)) * ratio
    c2 = 1j * p.omega * math.sin(p.theta) * ratio
    if t.ndim == 0:
        return complex(c1), complex(c2)
    return c1, c2


@dataclass(frozen=True)
class AnalyticSolution:
    """Callable closed-form amplitudes plus the effective frequency."""

    params: SchwingerParams
    omega_tilde: float

    def c1(self, t):
        return schwinger_analytic_amplitudes(self.params, t)[0]

    def c2(self, t):
        return schwinger_analytic_amplitudes(self.params, t)[1]


def schwinger_solution(p: SchwingerParams) -> AnalyticSolution:
    return AnalyticSolution(params=p, omega_tilde=effective_rabi_frequency(p))


@dataclass(frozen=True)
class Model:
    """A time-dependent Hamiltonian with optional extras.

    ``hamiltonian(t)`` returns the dim x dim Hermitian matrix; ``derivative``
    returns its elementwise time derivative when available. Models with a
    closed-form eigensystem expose it through ``analytic_eigensystem`` (and
    its derivative), which the tracker can use as a phase reference.
    """

    dim: int
    hamiltonian: Callable[[float], np.ndarray]
    derivative: Optional[Callable[[float], np.ndarray]] = None
    kind: str = "custom"
    analytic_eigensystem: Optional[Callable[[float], tuple[np.ndarray, np.ndarray]]] = None
    analytic_eigensystem_derivative: Optional[Callable[[float], np.ndarray]] = field(
        default=None, repr=False
    )


def schwinger_model(p: SchwingerParams) -> Model:
    """Rotating-field two-level model with all closed forms attached."""
    return Model(
        dim=2,
        hamiltonian=lambda t: schwinger_hamiltonian(p, t),
        derivative=lambda t: schwinger_hamiltonian_derivative(p, t),
        kind="schwinger",
        analytic_eigensystem=lambda t: schwinger_analytic_eigensystem(p, t),
        analytic_eigensystem_derivative=lambda t: schwinger_analytic_eigensystem_derivative(p, t),
    )


def custom_model(
    hamiltonian: Callable[[float], np.ndarray],
    derivative: Optional[Callable[[float], np.ndarray]] = None,
    *,
    dim: int,
    fd_step: float = 1e-6,
) -> Model:
    """Wrap a user-supplied H(t) callback.

    When no analytic derivative is given, a central difference with the
    user-set ``fd_step`` substitutes for it.
    """
    if dim < 2:
        raise ValueError("model dimension must be at least 2")
    if derivative is None:
        if not (fd_step > 0.0 and math.isfinite(fd_step)):
            raise ValueError("fd_step must be positive and finite")

        def derivative(t: float, _h=hamiltonian, _s=fd_step) -> np.ndarray:
            return (_h(t + _s) - _h(t - _s)) / (2.0 * _s)

    return Model(dim=dim, hamiltonian=hamiltonian, derivative=derivative, kind="custom")


def random_smooth_model(
    dim: int,
    seed: int,
    *,
    base_gap: float = 1.0,
    drive: float = 0.05,
    frequency: float = 1.0,
) -> Model:
    """Seeded smooth Hermitian drive with a well-gapped static part.

    H(t) = D + A cos(frequency t) + B sin(frequency t), where D has diagonal
    0, base_gap, 2 base_gap, ... plus a small Hermitian perturbation, and A,
    B are random Hermitian matrices of magnitude ``drive``. Gaps stay well
    clear of degeneracy for drive << base_gap.
    """
    rng = np.random.default_rng(seed)

    def draw_hermitian(scale: float) -> np.ndarray:
        m = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
        return scale * 0.5 * (m + m.conj().T)

    static = np.diag(base_gap * np.arange(dim, dtype=float)).astype(np.complex128)
    static += draw_hermitian(0.1 * drive)
    a = draw_hermitian(drive)
    b = draw_hermitian(drive)

    def hamiltonian(t: float) -> np.ndarray:
        return static + a * math.cos(frequency * t) + b * math.sin(frequency * t)

    def derivative(t: float) -> np.ndarray:
        return frequency * (-a * math.sin(frequency * t) + b * math.cos(frequency * t))

    return Model(dim=dim, hamiltonian=hamiltonian, derivative=derivative, kind="custom")


def transformed_hamiltonian(u_at_t: np.ndarray, h_at_t: np.ndarray) -> np.ndarray:
    """-U† H U: the companion system driven by the propagator of H.

    The result is Hermitian whenever H is, regardless of how accurately U is
    unitary, since (U† H U)† = U† H U.
    """
    u_at_t = np.asarray(u_at_t)
    h_at_t = np.asarray(h_at_t)
    if u_at_t.shape != h_at_t.shape or u_at_t.ndim != 2:
        raise ValueError(
            f"dimension mismatch: propagator {u_at_t.shape} vs operator {h_at_t.shape}"
        )
    return -(u_at_t.conj().T @ h_at_t @ u_at_t)


def transformed_hamiltonian_derivative(u_at_t: np.ndarray, hdot_at_t: np.ndarray) -> np.ndarray:
    """-U† Hdot U: time derivative of the companion Hamiltonian.

    The product-rule terms involving U̇ = -iHU cancel pairwise, leaving only
    the transformed Hdot.
    """
    u_at_t = np.asarray(u_at_t)
    hdot_at_t = np.asarray(hdot_at_t)
    if u_at_t.shape != hdot_at_t.shape or u_at_t.ndim != 2:
        raise ValueError(
            f"dimension mismatch: propagator {u_at_t.shape} vs operator {hdot_at_t.shape}"
        )
    return -(u_at_t.conj().T @ hdot_at_t @ u_at_t)
