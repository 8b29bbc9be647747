"""Boundary analysis: per-angle eigendecomposition oracle, the accurate-digits
metric against it, and geometric diagnostics of computed point sets."""

from __future__ import annotations

import numpy as np

from .linalg import HermitianFlow
from .results import BoundaryPoint, DigitsStats, SweepResult

__all__ = [
    "GridMismatchError",
    "oracle_sweep",
    "oracle_arrays",
    "accurate_digits",
    "compare_sweeps",
    "convex_hull",
    "convexity_defect",
    "polygon_area",
]

_DIGITS_FLOOR = 1e-300
_DIGITS_CAP = 16.0
_EIG_CHUNK = 4096


class GridMismatchError(ValueError):
    """Two sweeps do not share the same angle grid."""


def oracle_arrays(flow: HermitianFlow, angles, which: str = "max"):
    """Per-angle direct eigensolve of the flow, batched over ``angles``.

    Returns ``(lambdas, vectors, values, residuals)`` where ``values[k]`` is
    the boundary point ``x* a x`` of the extreme eigenvector at
    ``angles[k]``.  Accuracy is that of the dense hermitean eigensolver, 14
    to 15 leading digits.
    """
    if which not in ("max", "min"):
        raise ValueError(f"which must be 'max' or 'min', got {which!r}")
    angles = np.atleast_1d(np.asarray(angles, dtype=float))
    a = flow.a
    n = flow.n
    col = n - 1 if which == "max" else 0
    lams = np.empty(len(angles))
    vecs = np.empty((len(angles), n), dtype=complex)
    resid = np.empty(len(angles))
    for lo in range(0, len(angles), _EIG_CHUNK):
        chunk = angles[lo:lo + _EIG_CHUNK]
        at = (np.cos(chunk)[:, None, None] * flow.h
              + np.sin(chunk)[:, None, None] * flow.k)
        w, v = np.linalg.eigh(at)
        lams[lo:lo + len(chunk)] = w[:, col]
        x = v[:, :, col]
        vecs[lo:lo + len(chunk)] = x
        r = np.einsum("kij,kj->ki", at, x) - w[:, col, None] * x
        resid[lo:lo + len(chunk)] = np.linalg.norm(r, axis=1)
    values = np.einsum("ki,ij,kj->k", vecs.conj(), a, vecs)
    return lams, vecs, values, resid


def oracle_sweep(flow: HermitianFlow, angles, which: str = "max") -> list:
    """Boundary points from per-angle eigendecompositions (the reference
    method the predictive sweep is judged against)."""
    lams, _, values, _ = oracle_arrays(flow, angles, which)
    return [
        BoundaryPoint(t=float(t), value=complex(p), lam=float(l))
        for t, p, l in zip(np.atleast_1d(angles), values, lams)
    ]


def accurate_digits(p_znn, p_oracle):
    """Accurate decimal digits of ``p_znn`` relative to ``p_oracle``.

    ``min(16, -log10(|p_znn - p_oracle| / max(|p_oracle|, tiny)))``, clamped
    to ``[0, 16]``; an exact match counts as 16 (the double-precision
    ceiling).  Scale-invariant by construction.  Accepts scalars or arrays.
    """
    p_znn = np.asarray(p_znn, dtype=complex)
    p_oracle = np.asarray(p_oracle, dtype=complex)
    rel = np.abs(p_znn - p_oracle) / np.maximum(np.abs(p_oracle), _DIGITS_FLOOR)
    with np.errstate(divide="ignore"):
        digits = np.clip(-np.log10(rel), 0.0, _DIGITS_CAP)
    if digits.ndim == 0:
        return float(digits)
    return digits


def _oracle_values_and_t(oracle):
    if isinstance(oracle, (list, tuple)):
        t = np.array([p.t for p in oracle])
        vals = np.array([p.value for p in oracle], dtype=complex)
        return t, vals
    raise TypeError("oracle must be a list of BoundaryPoint")


def compare_sweeps(znn: SweepResult, oracle) -> DigitsStats:
    """Pointwise accurate digits of a predictive sweep against oracle points
    on the same angle grid.

    The per-point digits cover the whole grid and are attached back to
    ``znn.digits``; the aggregate statistics cover only the predictive
    points (startup states are oracle data themselves).
    """
    t_oracle, vals_oracle = _oracle_values_and_t(oracle)
    if len(t_oracle) != len(znn.t) or np.max(np.abs(t_oracle - znn.t), initial=0.0) > 1e-12:
        raise GridMismatchError("oracle and sweep angle grids differ")
    per_point = accurate_digits(znn.values, vals_oracle)
    znn.digits = per_point
    tail = per_point[znn.startup_count:]
    return DigitsStats(
        mean=float(tail.mean()),
        min=float(tail.min()),
        max=float(tail.max()),
        per_point=per_point,
    )


def _as_xy(points) -> np.ndarray:
    """Coerce boundary points / complex values / SweepResult to (N, 2)."""
    if isinstance(points, SweepResult):
        vals = points.values
    elif isinstance(points, np.ndarray) and np.iscomplexobj(points):
        vals = points
    elif len(points) and isinstance(points[0], BoundaryPoint):
        vals = np.array([p.value for p in points], dtype=complex)
    else:
        vals = np.asarray(points, dtype=complex)
    return np.column_stack([vals.real, vals.imag])


def convex_hull(points) -> np.ndarray:
    """Convex hull vertices (counter-clockwise) by monotone chain.

    Ties are broken lexicographically on (Re, Im); collinear points are not
    kept as hull vertices.  Degenerate inputs may yield fewer than 3
    vertices.
    """
    xy = np.unique(_as_xy(points), axis=0)  # sorts lexicographically
    if len(xy) <= 2:
        return xy

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    def half(pts):
        chain = []
        for pt in pts:
            while len(chain) >= 2 and cross(chain[-2], chain[-1], pt) <= 0.0:
                chain.pop()
            chain.append(pt)
        return chain

    lower = half(xy)
    upper = half(xy[::-1])
    return np.asarray(lower[:-1] + upper[:-1])


def _segment_distances(pts, seg_a, seg_b):
    """Distance of each point in ``pts`` to segment (seg_a, seg_b)."""
    d = seg_b - seg_a
    dd = float(d @ d)
    rel = pts - seg_a
    if dd == 0.0:
        return np.hypot(rel[:, 0], rel[:, 1])
    proj = np.clip((rel @ d) / dd, 0.0, 1.0)
    foot = seg_a + proj[:, None] * d
    return np.hypot(pts[:, 0] - foot[:, 0], pts[:, 1] - foot[:, 1])


def convexity_defect(points) -> float:
    """Largest distance from any point to the boundary of the convex hull of
    all points.

    Boundary points of a convex region lie in convex position, so a correct
    sweep has defect at roundoff level; interior stragglers show up as a
    positive defect (their distance to the hull polygon).
    """
    xy = _as_xy(points)
    if len(xy) < 3:
        raise ValueError("convexity defect needs at least 3 points")
    hull = convex_hull(points)
    if len(hull) == 1:
        return float(np.max(np.hypot(*(xy - hull[0]).T)))
    best = np.full(len(xy), np.inf)
    m = len(hull)
    for i in range(m if m > 2 else 1):
        seg_a = hull[i]
        seg_b = hull[(i + 1) % m]
        np.minimum(best, _segment_distances(xy, seg_a, seg_b), out=best)
    return float(best.max())


def polygon_area(points) -> float:
    """Absolute shoelace area of the closed polygon through the points in
    their given (angle) order."""
    xy = _as_xy(points)
    if len(xy) < 3:
        raise ValueError("polygon area needs at least 3 points")
    x, y = xy[:, 0], xy[:, 1]
    return float(abs(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))) / 2.0)
