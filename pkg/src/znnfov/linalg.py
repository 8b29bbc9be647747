"""Dense complex linear algebra: hermitean splitting, trigonometric matrix
flows, pivoted linear solves and normality detection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

__all__ = [
    "SingularSystemError",
    "HermitianFlow",
    "ConstantHermitianFlow",
    "as_square_matrix",
    "hermitian_split",
    "constant_flow",
    "solve_linear",
    "is_normal",
]

_EPS = np.finfo(float).eps


class SingularSystemError(np.linalg.LinAlgError):
    """Linear system is singular to working precision.

    Attributes
    ----------
    pivot : float
        Magnitude of the smallest pivot encountered during elimination.
    """

    def __init__(self, msg, pivot=0.0):
        super().__init__(msg)
        self.pivot = float(pivot)


def as_square_matrix(a) -> np.ndarray:
    """Validate and return ``a`` as a square, finite complex matrix."""
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    if a.shape[0] < 1:
        raise ValueError("matrix must be at least 1x1")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix entries must be finite")
    return a


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class HermitianFlow:
    """The hermitean matrix family ``cos(t)*h + sin(t)*k`` generated by a
    square matrix ``a = h + i*k``.

    ``h`` and ``k`` are the hermitean and skew parts of ``a``; the flow value
    is hermitean at every angle ``t``, and its extreme eigenvectors trace the
    boundary of the field of values of ``a``.
    """

    a: np.ndarray
    h: np.ndarray
    k: np.ndarray
    n: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "a", _readonly(self.a))
        object.__setattr__(self, "h", _readonly(self.h))
        object.__setattr__(self, "k", _readonly(self.k))
        object.__setattr__(self, "n", self.a.shape[0])

    def value_at(self, t: float, out=None) -> np.ndarray:
        """Flow value ``cos(t)*h + sin(t)*k`` at angle ``t`` (radians)."""
        out = np.multiply(self.h, np.cos(t), out=out)
        out += np.sin(t) * self.k
        return out

    def derivative_at(self, t: float, out=None) -> np.ndarray:
        """Angle derivative ``-sin(t)*h + cos(t)*k`` of the flow."""
        out = np.multiply(self.h, -np.sin(t), out=out)
        out += np.cos(t) * self.k
        return out


@dataclass(frozen=True)
class ConstantHermitianFlow(HermitianFlow):
    """A flow frozen at a single hermitean matrix: value ``h`` for every
    angle, derivative zero.  Useful for fixed-point and decay experiments
    where the target eigenpair does not move."""

    def value_at(self, t: float, out=None) -> np.ndarray:
        if out is None:
            return self.h.copy()
        out[...] = self.h
        return out

    def derivative_at(self, t: float, out=None) -> np.ndarray:
        if out is None:
            return np.zeros_like(self.h)
        out[...] = 0.0
        return out


def hermitian_split(a) -> HermitianFlow:
    """Split ``a`` into hermitean part ``h = (a + a*)/2`` and skew image
    ``k = (a - a*)/(2i)`` and return the generated flow.

    The reconstruction ``a = h + i*k`` holds to roundoff.
    """
    a = as_square_matrix(a)
    ah = a.conj().T
    h = (a + ah) / 2.0
    k = (a - ah) / 2.0j
    return HermitianFlow(a=a, h=h, k=k)


def constant_flow(m) -> ConstantHermitianFlow:
    """Wrap a hermitean matrix ``m`` as a constant-in-angle flow."""
    m = as_square_matrix(m)
    defect = np.linalg.norm(m - m.conj().T)
    if defect > 1e-12 * max(np.linalg.norm(m), 1.0):
        raise ValueError("constant flow requires a hermitean matrix")
    m = (m + m.conj().T) / 2.0
    return ConstantHermitianFlow(a=m, h=m, k=np.zeros_like(m))


def _min_pivot(p: np.ndarray) -> float:
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, _ = scipy.linalg.lu_factor(p, check_finite=False)
    return float(np.min(np.abs(np.diagonal(lu))))


def solve_linear(p, q) -> np.ndarray:
    """Solve ``p @ x = q`` by LU elimination with partial pivoting.

    Raises
    ------
    SingularSystemError
        If ``p`` is singular to working precision; the error carries the
        magnitude of the offending pivot.
    """
    p = as_square_matrix(p)
    q = np.asarray(q, dtype=complex)
    if q.shape != (p.shape[0],):
        raise ValueError(f"right-hand side shape {q.shape} does not match matrix {p.shape}")
    try:
        x = np.linalg.solve(p, q)
    except np.linalg.LinAlgError:
        raise SingularSystemError(
            "singular system: zero pivot in elimination", pivot=_min_pivot(p)
        ) from None
    if not np.all(np.isfinite(x)):
        raise SingularSystemError(
            "singular system: solve overflowed (pivot below working precision)",
            pivot=_min_pivot(p),
        )
    return x


def is_normal(a, tol: float = 1e-12) -> bool:
    """True iff ``a*a - aa*`` vanishes relative to ``tol * ||a||_F**2``.

    Normal matrices have polygonal fields of values spanned by their
    eigenvalues, so callers may prefer a direct eigenvalue hull for them.
    """
    a = as_square_matrix(a)
    ah = a.conj().T
    commutator = ah @ a - a @ ah
    scale = np.linalg.norm(a) ** 2
    return bool(np.linalg.norm(commutator) <= tol * scale)
