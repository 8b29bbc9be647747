"""Look-ahead finite-difference schemes: normalization, consistency
coefficients, characteristic-polynomial roots and zero-stability checks.

A scheme advances the state through

    z_{k+1} = beta * tau * zdot_k - sum_{j=1..N} a_j * z_{k+1-j}

where ``(1, a_1, ..., a_N)`` are the coefficients of its normalized
characteristic polynomial (descending powers, degree ``N = m + s``) and
``beta = p'(1)``.  The update is convergent iff the polynomial is zero
stable and ``p(1) = 0``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "SchemeError",
    "InconsistentSchemeError",
    "UnstableSchemeError",
    "SchemeSpec",
    "StabilityReport",
    "normalize",
    "consistency_coefficient",
    "find_roots",
    "check_zero_stability",
    "builtin_schemes",
    "get_scheme",
    "read_scheme_file",
    "load_scheme_file",
]

VERDICT_CONVERGENT = "convergent"
VERDICT_NOT_ZERO_STABLE = "not_zero_stable"
VERDICT_INCONSISTENT = "inconsistent"

# |p(1)| relative to the 1-norm of the coefficients
_CONSISTENCY_TOL = 1e-10
# root separation below which unit-circle roots count as repeated
_ROOT_SEPARATION = 1e-6


class SchemeError(ValueError):
    """Invalid finite-difference scheme."""


class InconsistentSchemeError(SchemeError):
    """p(1) != 0: the update cannot reproduce constants."""


class UnstableSchemeError(SchemeError):
    """Scheme rejected by the zero-stability check."""


@dataclass(frozen=True)
class SchemeSpec:
    """A normalized look-ahead difference scheme.

    ``coeffs`` holds the characteristic polynomial in descending powers with
    leading coefficient 1; ``polyrest`` is ``coeffs[1:]``.  ``beta`` is the
    consistency coefficient ``p'(1)`` (``None`` when p(1) != 0 and no
    consistent update exists).  ``m`` and ``s`` are the history/look-ahead
    step labels of the ``m_s`` naming convention; the number of history
    states the update consumes equals the polynomial degree ``m + s``.
    """

    name: str
    m: int
    s: int
    coeffs: tuple
    truncation_order: int
    beta: float | None
    polyrest: tuple

    @property
    def n_history(self) -> int:
        """History length N = degree of the characteristic polynomial."""
        return len(self.coeffs) - 1

    def with_name(self, name: str) -> "SchemeSpec":
        return replace(self, name=name)


@dataclass(frozen=True)
class StabilityReport:
    """Roots of a scheme's characteristic polynomial and the verdict of the
    convergence test (zero stability plus consistency)."""

    roots: np.ndarray
    max_interior_modulus: float
    boundary_roots: tuple
    verdict: str

    @property
    def convergent(self) -> bool:
        return self.verdict == VERDICT_CONVERGENT


def _p1_defect(coeffs) -> float:
    coeffs = np.asarray(coeffs, dtype=float)
    return abs(coeffs.sum()) / np.abs(coeffs).sum()


def consistency_coefficient(spec_or_coeffs) -> float:
    """Consistency coefficient ``beta = p'(1)`` of a normalized scheme.

    First-order Taylor expansion of the update forces ``p(1) = 0`` and makes
    ``p'(1)`` the unique weight on ``tau * zdot`` that reproduces linear
    motion; a usable scheme needs ``beta > 0``.
    """
    if isinstance(spec_or_coeffs, SchemeSpec):
        coeffs = np.asarray(spec_or_coeffs.coeffs, dtype=float)
    else:
        coeffs = np.asarray(spec_or_coeffs, dtype=float)
    if _p1_defect(coeffs) > _CONSISTENCY_TOL:
        raise InconsistentSchemeError(
            f"p(1) = {coeffs.sum():.3e} is not zero: scheme is inconsistent"
        )
    n = len(coeffs) - 1
    beta = float(sum(coeffs[j] * (n - j) for j in range(n + 1)))
    if beta <= 0.0:
        raise SchemeError(f"consistency coefficient beta = {beta:.3e} must be positive")
    return beta


def normalize(raw_coeffs, *, name="custom", m=None, s=None, truncation_order=None) -> SchemeSpec:
    """Build a ``SchemeSpec`` from raw characteristic-polynomial coefficients.

    Coefficients are given in descending powers and divided by the leading
    one.  ``beta`` is filled via :func:`consistency_coefficient` when the
    normalized polynomial satisfies p(1) = 0, else left ``None`` so stability
    checking can still report an inconsistent scheme.
    """
    raw = np.asarray(raw_coeffs, dtype=float)
    if raw.ndim != 1 or len(raw) < 2:
        raise SchemeError("scheme needs at least two coefficients")
    if not np.all(np.isfinite(raw)):
        raise SchemeError("scheme coefficients must be finite")
    if raw[0] == 0.0:
        raise SchemeError("degenerate scheme: leading coefficient is zero")
    coeffs = raw / raw[0]
    degree = len(coeffs) - 1
    if m is None or s is None:
        # unlabeled scheme: attribute the whole history to m
        m, s = degree, 0
    if m + s != degree:
        raise SchemeError(f"m + s = {m + s} must equal the polynomial degree {degree}")
    try:
        beta = consistency_coefficient(coeffs)
    except SchemeError:
        beta = None
    if truncation_order is None:
        truncation_order = 2
    return SchemeSpec(
        name=name,
        m=int(m),
        s=int(s),
        coeffs=tuple(float(c) for c in coeffs),
        truncation_order=int(truncation_order),
        beta=beta,
        polyrest=tuple(float(c) for c in coeffs[1:]),
    )


def find_roots(coeffs) -> np.ndarray:
    """All roots of the polynomial with the given descending coefficients.

    Uses companion-matrix eigenvalues; for real input the roots come in
    exactly conjugate pairs.  Backward error of the reconstructed monic
    polynomial is at the 1e-8 level or better for the low degrees used here.
    """
    coeffs = np.asarray(coeffs, dtype=float)
    if len(coeffs) < 2:
        raise SchemeError("polynomial must have degree >= 1")
    if coeffs[0] == 0.0:
        raise SchemeError("leading coefficient must be nonzero")
    if not np.all(np.isfinite(coeffs)):
        raise SchemeError("polynomial coefficients must be finite")
    try:
        roots = np.roots(coeffs)
    except np.linalg.LinAlgError as exc:
        raise SchemeError(f"root finding failed: {exc}") from exc
    # deterministic order: by real part, then imaginary
    order = np.lexsort((roots.imag, roots.real))
    return roots[order]


def _boundary_multiplicities(boundary):
    """Cluster near-unit-circle roots into (representative, multiplicity)."""
    out = []
    used = np.zeros(len(boundary), dtype=bool)
    for i, r in enumerate(boundary):
        if used[i]:
            continue
        cluster = [r]
        used[i] = True
        for j in range(i + 1, len(boundary)):
            if not used[j] and abs(boundary[j] - r) <= _ROOT_SEPARATION:
                cluster.append(boundary[j])
                used[j] = True
        out.append((complex(np.mean(cluster)), len(cluster)))
    return tuple(out)


def check_zero_stability(spec: SchemeSpec, tol: float = 1e-9) -> StabilityReport:
    """Convergence test for a scheme's characteristic polynomial.

    Convergent iff every root has modulus at most ``1 + tol``, all roots
    with modulus at least ``1 - tol`` are simple (pairwise separation above
    1e-6), and p(1) = 0.  ``tol`` absorbs the double-precision truncation of
    printed coefficients without admitting genuinely unstable schemes.
    """
    coeffs = np.asarray(spec.coeffs, dtype=float)
    roots = find_roots(coeffs)
    moduli = np.abs(roots)
    on_boundary = moduli >= 1.0 - tol
    interior = moduli[~on_boundary]
    max_interior = float(interior.max()) if interior.size else 0.0
    boundary_roots = _boundary_multiplicities(roots[on_boundary])

    if _p1_defect(coeffs) > _CONSISTENCY_TOL:
        verdict = VERDICT_INCONSISTENT
    elif np.any(moduli > 1.0 + tol):
        verdict = VERDICT_NOT_ZERO_STABLE
    elif any(mult > 1 for _, mult in boundary_roots):
        verdict = VERDICT_NOT_ZERO_STABLE
    else:
        verdict = VERDICT_CONVERGENT
    return StabilityReport(
        roots=roots,
        max_interior_modulus=max_interior,
        boundary_roots=boundary_roots,
        verdict=verdict,
    )


# Raw (non-normalized) characteristic polynomials, descending powers.
_EULER_RAW = (1.0, -1.0)
_P4_RAW = (8.0, 1.0, -6.0, -5.0, 2.0)
_P9_RAW = (
    -1.632891580619644,
    -1.084874852377588,
    1.514338299609167,
    2.121238162639099,
    -0.3010929138446914,
    -0.9393487657815317,
    0.06714730122560907,
    0.3319027505915695,
    -0.04244088319409350,
    -0.03397751824789656,
)

_BUILTINS = None


def builtin_schemes() -> dict:
    """Registry of the bundled convergent schemes.

    ``euler`` is the classical one-step rule (labeled truncation order 2
    here); ``2_2b`` has truncation order 4 and ``4_5a`` order 6.  All three
    pass :func:`check_zero_stability`.
    """
    global _BUILTINS
    if _BUILTINS is None:
        _BUILTINS = {
            "euler": normalize(_EULER_RAW, name="euler", m=1, s=0, truncation_order=2),
            "2_2b": normalize(_P4_RAW, name="2_2b", m=2, s=2, truncation_order=4),
            "4_5a": normalize(_P9_RAW, name="4_5a", m=4, s=5, truncation_order=6),
        }
    return dict(_BUILTINS)


def read_scheme_file(path):
    """Parse a scheme text file into ``(name, m, s, order, raw_coeffs)``.

    Format: optional ``#`` comment lines, then a header line
    ``name m s order`` and one line of whitespace-separated raw coefficients
    in descending powers.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = [ln.strip() for ln in fh]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    if len(lines) < 2:
        raise SchemeError(f"{path}: expected a header line and a coefficient line")
    header = lines[0].split()
    if len(header) != 4:
        raise SchemeError(f"{path}: header must be 'name m s order', got {lines[0]!r}")
    name = header[0]
    try:
        m, s, order = int(header[1]), int(header[2]), int(header[3])
    except ValueError as exc:
        raise SchemeError(f"{path}: bad header integers: {exc}") from None
    try:
        raw = [float(tok) for tok in lines[1].split()]
    except ValueError as exc:
        raise SchemeError(f"{path}: bad coefficient: {exc}") from None
    return name, m, s, order, raw


def load_scheme_file(path, allow_unstable: bool = False) -> SchemeSpec:
    """Load, normalize and stability-check a scheme file.

    Non-convergent schemes are rejected unless ``allow_unstable`` is set.
    """
    name, m, s, order, raw = read_scheme_file(path)
    spec = normalize(raw, name=name, m=m, s=s, truncation_order=order)
    report = check_zero_stability(spec)
    if not report.convergent and not allow_unstable:
        raise UnstableSchemeError(
            f"{path}: scheme {name!r} is {report.verdict}, refusing to load"
        )
    return spec


def get_scheme(name_or_path) -> SchemeSpec:
    """Look up a builtin scheme by name, else load it as a file path."""
    builtins = builtin_schemes()
    key = str(name_or_path)
    if key in builtins:
        return builtins[key]
    if os.path.exists(key):
        return load_scheme_file(key)
    raise SchemeError(f"unknown scheme {key!r}: not a builtin name or readable file")
