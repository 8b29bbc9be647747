"""Full hermitean eigendecomposition, extreme-eigenpair extraction and
eigenvector phase continuity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_square_matrix

__all__ = [
    "NonHermitianError",
    "EigenSolverError",
    "PhaseContinuityError",
    "EigenDecomposition",
    "hermitian_eig",
    "extreme_pair",
    "phase_align",
]


class NonHermitianError(ValueError):
    """Input matrix is not hermitean within tolerance."""


class EigenSolverError(RuntimeError):
    """The eigensolver failed to converge within its iteration cap."""


class PhaseContinuityError(RuntimeError):
    """Consecutive eigenvectors are nearly orthogonal; the tracked eigenpath
    is discontinuous (typically an eigenvalue crossing)."""


@dataclass(frozen=True)
class EigenDecomposition:
    """Eigenvalues (ascending) and matching orthonormal eigenvector columns
    of a hermitean matrix."""

    values: np.ndarray
    vectors: np.ndarray


def hermitian_eig(m) -> EigenDecomposition:
    """Full eigendecomposition of a hermitean matrix.

    The input is checked against ``||m - m*||_F <= 1e-12 * ||m||_F`` and
    symmetrized as ``(m + m*)/2`` before factorization.  Eigenvalues come
    back sorted ascending with unit, mutually orthonormal eigenvectors;
    residuals are at the level of the backward-stable factorization.
    """
    m = as_square_matrix(m)
    scale = np.linalg.norm(m)
    defect = np.linalg.norm(m - m.conj().T)
    if defect > 1e-12 * max(scale, 1e-300):
        raise NonHermitianError(
            f"matrix is not hermitean: ||m - m*||_F = {defect:.3e} vs scale {scale:.3e}"
        )
    m = (m + m.conj().T) / 2.0
    try:
        values, vectors = np.linalg.eigh(m)
    except np.linalg.LinAlgError as exc:
        raise EigenSolverError(f"eigendecomposition did not converge: {exc}") from exc
    return EigenDecomposition(values=values, vectors=vectors)


def extreme_pair(d: EigenDecomposition, which: str = "max"):
    """Return ``(lam, x)`` for the largest (``"max"``) or smallest
    (``"min"``) eigenvalue of a decomposition."""
    if which == "max":
        j = len(d.values) - 1
    elif which == "min":
        j = 0
    else:
        raise ValueError(f"which must be 'max' or 'min', got {which!r}")
    return float(d.values[j]), d.vectors[:, j].copy()


def phase_align(x_prev, x_new) -> np.ndarray:
    """Rotate the unit phase of ``x_new`` so its overlap with ``x_prev`` is
    real and nonnegative.

    Eigenvectors carry an arbitrary unit phase factor; fixing it against the
    previous vector keeps a sampled eigenvector path smooth.  An overlap
    magnitude below 1e-8 means the two vectors are essentially orthogonal
    and the path is discontinuous.
    """
    x_prev = np.asarray(x_prev, dtype=complex)
    x_new = np.asarray(x_new, dtype=complex)
    if x_prev.shape != x_new.shape:
        raise ValueError("vectors must have the same length")
    overlap = np.vdot(x_prev, x_new)
    mag = abs(overlap)
    if mag < 1e-8:
        raise PhaseContinuityError(
            f"eigenvector overlap {mag:.3e} below continuity threshold"
        )
    return x_new * (overlap.conjugate() / mag)
