"""Gaussian states as quadrature covariance matrices, and the optical circuit acting on them.

Variances are in shot-noise units: the vacuum is the identity matrix. A two-beam
matrix is ordered (X⁺ₓ, X⁻ₓ, X⁺ᵧ, X⁻ᵧ). Only fluctuations are modelled; every
mean field is zero.
"""

from __future__ import annotations

import dataclasses
import math
from typing import TYPE_CHECKING, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

if TYPE_CHECKING:
    from collections.abc import Sequence

    from numpy.typing import ArrayLike, NDArray

Beam = Literal["x", "y"]
Quadrature = Literal["+", "-"]

PHYSICALITY_TOL = 1e-9
_SYMMETRY_TOL = 1e-12
_PURITY_TOL = 1e-12

_BEAM_OFFSET = {"x": 0, "y": 2}
_QUADRATURE_OFFSET = {"+": 0, "-": 1}
_OMEGA_1 = np.array([[0.0, 1.0], [-1.0, 0.0]])
# Symmetric 50/50 beamsplitter: x = (in1 + in2)/√2, y = (in1 − in2)/√2.
_BEAMSPLITTER = np.block([[np.eye(2), np.eye(2)], [np.eye(2), -np.eye(2)]]) / math.sqrt(2)


class UnphysicalStateError(ValueError):
    """Covariance matrix violates the uncertainty principle."""


def quadrature_index(beam: Beam, quadrature: Quadrature) -> int:
    return _BEAM_OFFSET[beam] + _QUADRATURE_OFFSET[quadrature]


def other_beam(beam: Beam) -> Beam:
    return "y" if beam == "x" else "x"


def _require_symmetric(m: NDArray[np.float64]) -> None:
    scale = max(1.0, float(np.max(np.abs(m))))
    if float(np.max(np.abs(m - m.T))) > _SYMMETRY_TOL * scale:
        raise ValueError("covariance matrix is not symmetric")


@dataclasses.dataclass(frozen=True, eq=False)
class CovarianceMatrix:
    """Quadrature second moments of a one-beam (2×2) or two-beam (4×4) Gaussian state.

    Entries are copied, symmetrised and made read-only on construction, so a
    CovarianceMatrix is an immutable value. Physicality is not enforced here
    (see :func:`physicality_check`); symmetry and a positive diagonal are.
    """

    entries: NDArray[np.float64]

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=np.float64)
        if m.shape not in ((2, 2), (4, 4)):
            raise ValueError(f"covariance matrix must be 2x2 or 4x4, got shape {m.shape}")
        if not np.all(np.isfinite(m)):
            raise ValueError("covariance matrix has non-finite entries")
        _require_symmetric(m)
        m = (m + m.T) / 2
        if np.any(np.diag(m) <= 0):
            raise ValueError("covariance matrix diagonal must be positive")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)

    @classmethod
    def vacuum(cls, modes: int = 2) -> CovarianceMatrix:
        return cls(np.eye(2 * modes))

    @property
    def modes(self) -> int:
        return self.entries.shape[0] // 2

    def variance(self, beam: Beam, quadrature: Quadrature) -> float:
        if self.modes == 1:
            i = _QUADRATURE_OFFSET[quadrature]
        else:
            i = quadrature_index(beam, quadrature)
        return float(self.entries[i, i])

    def covariance(self, quadrature: Quadrature) -> float:
        """⟨δX_x δX_y⟩ for one quadrature of a two-beam state."""
        self.require_modes(2)
        return float(self.entries[quadrature_index("x", quadrature), quadrature_index("y", quadrature)])

    def block(self, beam: Beam) -> NDArray[np.float64]:
        self.require_modes(2)
        i = _BEAM_OFFSET[beam]
        return self.entries[i : i + 2, i : i + 2]

    def require_modes(self, modes: int) -> None:
        if self.modes != modes:
            raise ValueError(f"expected a {modes}-mode covariance matrix, got {self.modes} mode(s)")

    def allclose(self, other: CovarianceMatrix, atol: float = 1e-12) -> bool:
        return self.entries.shape == other.entries.shape and bool(np.allclose(self.entries, other.entries, rtol=0, atol=atol))


class SqueezerSpec(BaseModel):
    """Squeezed and anti-squeezed variances of one source beam (1 = shot noise).

    ``anti_variance == 1 / squeezed_variance`` is a pure source; larger values
    carry impurity.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    squeezed_variance: float = Field(gt=0)
    anti_variance: float = Field(gt=0)

    @model_validator(mode="after")
    def _check_physical(self) -> SqueezerSpec:
        if self.anti_variance < self.squeezed_variance:
            raise ValueError("anti_variance must not be below squeezed_variance")
        if self.squeezed_variance * self.anti_variance < 1 - _PURITY_TOL:
            raise ValueError("anti_variance below 1/squeezed_variance violates the uncertainty principle")
        return self

    @classmethod
    def pure(cls, squeezed_variance: float) -> SqueezerSpec:
        return cls(squeezed_variance=squeezed_variance, anti_variance=1 / squeezed_variance)

    @property
    def is_pure(self) -> bool:
        return abs(self.squeezed_variance * self.anti_variance - 1) <= _PURITY_TOL


class LossChannel(BaseModel):
    """Power transmission of each beam; the lost fraction is replaced by vacuum."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    eta_x: float = Field(ge=0, le=1)
    eta_y: float = Field(ge=0, le=1)

    @classmethod
    def symmetric(cls, eta: float) -> LossChannel:
        return cls(eta_x=eta, eta_y=eta)


@dataclasses.dataclass(frozen=True)
class PhysicalityReport:
    physical: bool
    symplectic_eigenvalues: tuple[float, ...]


def _omega(modes: int) -> NDArray[np.float64]:
    return np.kron(np.eye(modes), _OMEGA_1)


def _as_matrix(cm: CovarianceMatrix | ArrayLike) -> NDArray[np.float64]:
    if isinstance(cm, CovarianceMatrix):
        return cm.entries
    m = np.asarray(cm, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] % 2:
        raise ValueError(f"covariance matrix must be square with even size, got shape {m.shape}")
    _require_symmetric(m)
    return m


def symplectic_eigenvalues(cm: CovarianceMatrix | ArrayLike) -> tuple[float, ...]:
    """Symplectic spectrum, ascending: the moduli of the eigenvalues of iΩV.

    For positive-definite V the spectrum is read off the Hermitian matrix
    V^½ (iΩ) V^½, which keeps full precision at degenerate (pure) spectra.
    """
    m = _as_matrix(cm)
    modes = m.shape[0] // 2
    w, q = np.linalg.eigh(m)
    if w[0] <= 0:
        moduli = np.sort(np.abs(np.linalg.eigvals(1j * _omega(modes) @ m)))
        return tuple(float(v) for v in moduli[::2])
    root = (q * np.sqrt(w)) @ q.T
    spectrum = np.linalg.eigvalsh(root @ (1j * _omega(modes)) @ root)
    return tuple(float(v) for v in spectrum[modes:])


def symplectic_invariants(cm: CovarianceMatrix) -> tuple[float, float]:
    """(det V, Δ) with Δ = det A + det B + 2 det C for a two-beam state.

    ν₁² + ν₂² = Δ and ν₁² ν₂² = det V.
    """
    cm.require_modes(2)
    m = cm.entries
    delta = np.linalg.det(m[:2, :2]) + np.linalg.det(m[2:, 2:]) + 2 * np.linalg.det(m[:2, 2:])
    return float(np.linalg.det(m)), float(delta)


def physicality_check(cm: CovarianceMatrix | ArrayLike) -> PhysicalityReport:
    nu = symplectic_eigenvalues(cm)
    return PhysicalityReport(physical=min(nu) >= 1 - PHYSICALITY_TOL, symplectic_eigenvalues=nu)


def require_physical(cm: CovarianceMatrix, what: str = "state") -> None:
    report = physicality_check(cm)
    if not report.physical:
        raise UnphysicalStateError(f"{what} is unphysical: symplectic eigenvalues {report.symplectic_eigenvalues}")


def purity(cm: CovarianceMatrix) -> float:
    """1/√det V; equals 1 for pure states."""
    return float(1 / math.sqrt(np.linalg.det(cm.entries)))


def squeezed_state(spec: SqueezerSpec) -> CovarianceMatrix:
    return CovarianceMatrix(np.diag([spec.squeezed_variance, spec.anti_variance]))


def rotate(cm: CovarianceMatrix, phase: float) -> CovarianceMatrix:
    """Phase shift of a single beam: R(φ) V R(φ)ᵀ."""
    cm.require_modes(1)
    c, s = math.cos(phase), math.sin(phase)
    r = np.array([[c, -s], [s, c]])
    return CovarianceMatrix(r @ cm.entries @ r.T)


def beamsplitter(cm1: CovarianceMatrix, cm2: CovarianceMatrix) -> CovarianceMatrix:
    """Interfere two single beams on a symmetric 50/50 beamsplitter."""
    cm1.require_modes(1)
    cm2.require_modes(1)
    v = np.zeros((4, 4))
    v[:2, :2] = cm1.entries
    v[2:, 2:] = cm2.entries
    return CovarianceMatrix(_BEAMSPLITTER @ v @ _BEAMSPLITTER.T)


def entangle(cm1: CovarianceMatrix, cm2: CovarianceMatrix, relative_phase: float = math.pi / 2) -> CovarianceMatrix:
    """Two beams out of the 50/50 beamsplitter, the phase applied to input 2 first."""
    require_physical(cm1, "input 1")
    require_physical(cm2, "input 2")
    return beamsplitter(cm1, rotate(cm2, relative_phase))


def apply_loss(cm: CovarianceMatrix, channel: LossChannel) -> CovarianceMatrix:
    """V′ = H V H + (I − H²) with H = diag(√ηₓ, √ηₓ, √ηᵧ, √ηᵧ)."""
    cm.require_modes(2)
    eta = np.array([channel.eta_x, channel.eta_x, channel.eta_y, channel.eta_y])
    h = np.sqrt(eta)
    return CovarianceMatrix(h[:, None] * cm.entries * h[None, :] + np.diag(1 - eta))


def add_noise(cm: CovarianceMatrix, variances: Sequence[float]) -> CovarianceMatrix:
    """Add classical, uncorrelated excess noise to each quadrature."""
    extra = np.asarray(variances, dtype=np.float64)
    if extra.shape != (cm.entries.shape[0],):
        raise ValueError(f"expected {cm.entries.shape[0]} noise variances, got {extra.shape}")
    if np.any(extra < 0):
        raise ValueError("excess noise variances must be non-negative")
    return CovarianceMatrix(cm.entries + np.diag(extra))


def single_mode(cm: CovarianceMatrix, beam: Beam) -> CovarianceMatrix:
    return CovarianceMatrix(cm.block(beam))


def photon_number(cm: CovarianceMatrix, beam: Beam = "x") -> float:
    """Mean sideband photon number n̄ = (Δ²X⁺ + Δ²X⁻ − 2)/4 of one beam."""
    return (cm.variance(beam, "+") + cm.variance(beam, "-") - 2) / 4


def entangled_pair(spec: SqueezerSpec, eta: float = 1.0) -> CovarianceMatrix:
    """Two identical sources entangled at π/2, then symmetric loss η on both beams."""
    source = squeezed_state(spec)
    return apply_loss(entangle(source, source, math.pi / 2), LossChannel.symmetric(eta))
