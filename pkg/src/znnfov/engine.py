"""Predictive eigenpair tracking: assemble the augmented hermitean system,
solve for the state derivative and advance with a look-ahead scheme.

The tracked state is ``z = [x; lam]`` for one extreme eigenpair of the flow
``A(t)``.  Stipulating exponential decay of the eigen-residual
``A(t)x - lam*x`` (rate ``eta``) and of the norm defect ``x*x - 1`` (rate
``mu``) turns the eigenpair path into the ODE ``P(t) zdot = q(t)`` with

    P = [[A(t) - lam*I, -x],  q = [(-eta*(A(t) - lam*I) - Adot(t)) @ x,
         [-x*,           0]]       mu/2 * (x*x - 1)]

which a convergent look-ahead scheme integrates one angle step ahead of the
data it consumes.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import lapack as _lapack

from .eigensolver import extreme_pair, hermitian_eig, phase_align
from .linalg import HermitianFlow
from .results import SweepResult
from .schemes import SchemeSpec, UnstableSchemeError, check_zero_stability

__all__ = [
    "TWO_PI",
    "ZnnParams",
    "EigenPairState",
    "HistoryWindow",
    "StepFailureError",
    "DivergenceError",
    "SweepFailure",
    "angle_grid",
    "assemble_system",
    "state_residual",
    "startup",
    "znn_step",
    "sweep",
]

TWO_PI = 2.0 * math.pi

# accepted eigenvector norm band; the mu-row pins ||x|| near 1, leaving the
# band is a divergence signal
_NORM_LO, _NORM_HI = 0.5, 2.0
_IMAG_DRIFT_TOL = 1e-8


class StepFailureError(RuntimeError):
    """A single predictive step failed (singular system matrix)."""


def _gesv(p, q):
    """LU solve used in the step loop; returns None on a singular pivot."""
    _, _, x, info = _lapack.zgesv(p, q)
    if info > 0:
        return None
    if info < 0:
        raise ValueError(f"illegal argument {-info} to the LU solver")
    return x


class DivergenceError(RuntimeError):
    """The iterate left the accepted norm band and is diverging."""


class SweepFailure(RuntimeError):
    """A sweep aborted mid-run.

    Attributes
    ----------
    index : int
        Grid index of the failed step.
    partial : SweepResult
        The completed portion of the sweep.
    """

    def __init__(self, msg, index, partial):
        super().__init__(msg)
        self.index = int(index)
        self.partial = partial


@dataclass(frozen=True)
class ZnnParams:
    """Sampling gap, decay constants and angle interval of a sweep.

    ``mu`` defaults to ``3 * eta``, which speeds up convergence of the
    eigenvector to unit length.  ``h = eta * tau`` is the dimensionless
    tuning constant; useful values sit well below 1 for this problem.
    """

    tau: float
    eta: float
    mu: float | None = None
    t_start: float = 0.0
    t_final: float = TWO_PI
    restart_threshold: float | None = None

    def __post_init__(self):
        if not (self.tau > 0.0):
            raise ValueError("tau must be positive")
        if not (self.eta > 0.0):
            raise ValueError("eta must be positive")
        if self.mu is None:
            object.__setattr__(self, "mu", 3.0 * self.eta)
        if not (self.mu > 0.0):
            raise ValueError("mu must be positive")
        if not (self.t_final > self.t_start):
            raise ValueError("t_final must exceed t_start")

    @property
    def h(self) -> float:
        return self.eta * self.tau


@dataclass(frozen=True, slots=True)
class EigenPairState:
    """Eigenpair iterate ``z = [x; lam]`` attached to angle ``t``."""

    x: np.ndarray
    lam: complex
    t: float


@dataclass(frozen=True)
class HistoryWindow:
    """The most recent scheme-history states, oldest first."""

    states: tuple

    def __len__(self) -> int:
        return len(self.states)

    @property
    def newest(self) -> EigenPairState:
        return self.states[-1]

    def as_matrix(self) -> np.ndarray:
        """Stack states into columns, newest first: shape (n+1, N)."""
        cols = [np.concatenate([s.x, [s.lam]]) for s in reversed(self.states)]
        return np.column_stack(cols)

    def advanced(self, state: EigenPairState) -> "HistoryWindow":
        """Shift the window one step: drop the oldest, append ``state``."""
        return HistoryWindow(states=self.states[1:] + (state,))


def angle_grid(tau: float, t_start: float = 0.0, t_final: float = TWO_PI) -> np.ndarray:
    """Fixed sampling grid ``t_k = t_start + k*tau`` over the half-open
    interval ``[t_start, t_final)``; ``floor((t_final - t_start)/tau)``
    points in total."""
    if not (tau > 0.0 and t_final > t_start):
        raise ValueError("need tau > 0 and t_final > t_start")
    total = int(math.floor((t_final - t_start) / tau + 1e-9))
    return t_start + tau * np.arange(total)


def assemble_system(a_t, a_dot_t, state: EigenPairState, params: ZnnParams):
    """Build the bordered system ``P zdot = q`` at one angle.

    ``P`` is hermitean whenever ``state.lam`` is real; it shares its top-left
    block with the eigen-residual, so an exact eigenpair of a frozen flow
    gives ``q = 0``.
    """
    a_t = np.asarray(a_t, dtype=complex)
    a_dot_t = np.asarray(a_dot_t, dtype=complex)
    n = a_t.shape[0]
    x = state.x
    lam = state.lam
    p = np.empty((n + 1, n + 1), dtype=complex)
    p[:n, :n] = a_t
    p[:n, :n].flat[:: n + 1] -= lam
    p[:n, n] = -x
    p[n, :n] = -x.conj()
    p[n, n] = 0.0
    q = np.empty(n + 1, dtype=complex)
    q[:n] = -params.eta * (a_t @ x - lam * x) - a_dot_t @ x
    q[n] = 0.5 * params.mu * (np.vdot(x, x).real - 1.0)
    return p, q


def state_residual(flow: HermitianFlow, state: EigenPairState):
    """Eigen-residual ``||A(t)x - lam*x||_2`` and norm defect ``|x*x - 1|``."""
    a_t = flow.value_at(state.t)
    r = a_t @ state.x - state.lam * state.x
    return float(np.linalg.norm(r)), float(abs(np.vdot(state.x, state.x).real - 1.0))


def _eig_state(flow, t, which, x_prev=None) -> EigenPairState:
    lam, x = extreme_pair(hermitian_eig(flow.value_at(t)), which)
    if x_prev is not None:
        x = phase_align(x_prev, x)
    return EigenPairState(x=x, lam=complex(lam), t=float(t))


def startup(flow: HermitianFlow, scheme: SchemeSpec, params: ZnnParams,
            which: str = "max") -> HistoryWindow:
    """Direct eigensolves for the first ``N = m + s`` grid angles.

    Eigenvector phases are chained so consecutive startup vectors have real
    nonnegative overlap; a continuity failure here means the flow has an
    eigenvalue crossing inside the startup window.
    """
    n_hist = scheme.n_history
    states = []
    x_prev = None
    for k in range(n_hist):
        state = _eig_state(flow, params.t_start + k * params.tau, which, x_prev)
        states.append(state)
        x_prev = state.x
    return HistoryWindow(states=tuple(states))


def znn_step(flow: HermitianFlow, history: HistoryWindow, scheme: SchemeSpec,
             params: ZnnParams) -> EigenPairState:
    """Advance the eigenpair one angle step from a full history window.

    Solves ``P zdot = q`` at the newest state and combines

        z_new = beta * tau * zdot - sum_j polyrest[j] * z_(newest-j)

    so the returned state estimates the eigenpair at ``t + tau`` using data
    at angles ``<= t`` only.
    """
    if scheme.beta is None:
        raise UnstableSchemeError(f"scheme {scheme.name!r} has no consistency coefficient")
    if len(history) != scheme.n_history:
        raise ValueError(
            f"history holds {len(history)} states, scheme {scheme.name!r} "
            f"needs {scheme.n_history}"
        )
    newest = history.newest
    t_k = newest.t
    p, q = assemble_system(flow.value_at(t_k), flow.derivative_at(t_k), newest, params)
    zdot = _gesv(p, q)
    if zdot is None or not np.all(np.isfinite(zdot)):
        raise StepFailureError(f"singular system matrix at t = {t_k:.6f}")
    z = history.as_matrix()
    znew = scheme.beta * params.tau * zdot - z @ np.asarray(scheme.polyrest, dtype=complex)
    n = len(newest.x)
    xn = znew[:n]
    nrm = np.linalg.norm(xn)
    if not (np.isfinite(nrm) and np.isfinite(znew[n])
            and _NORM_LO <= nrm <= _NORM_HI):
        raise DivergenceError(f"|x| = {nrm:.3e} left [{_NORM_LO}, {_NORM_HI}] at t = {t_k:.6f}")
    return EigenPairState(x=xn, lam=complex(znew[n]), t=t_k + params.tau)


def _reseed_window(flow, angles, which, x_prev):
    """Fresh eigensolve states for the given angles, phase-chained."""
    states = []
    for t in angles:
        state = _eig_state(flow, t, which, x_prev)
        states.append(state)
        x_prev = state.x
    return states


def sweep(flow: HermitianFlow, scheme: SchemeSpec, params: ZnnParams,
          which: str = "max") -> SweepResult:
    """Track one extreme eigenpair over the whole angle grid.

    The first ``N`` grid points come from direct eigensolves (startup); every
    later point is predicted by :func:`znn_step` before its angle's data is
    used.  Per point the boundary value ``x* a x`` (original matrix ``a``),
    the eigenvalue estimate, the eigen-residual and the norm defect are
    recorded.

    With ``params.restart_threshold`` set, a step whose residual exceeds the
    threshold (or fails outright) is replaced by a direct re-seed of the
    history and the step index is logged in ``step_failures``; otherwise a
    failing step aborts the sweep with :class:`SweepFailure` carrying the
    completed part.
    """
    if which not in ("max", "min"):
        raise ValueError(f"which must be 'max' or 'min', got {which!r}")
    report = check_zero_stability(scheme)
    if not report.convergent or scheme.beta is None:
        raise UnstableSchemeError(
            f"scheme {scheme.name!r} is {report.verdict}; refusing to sweep"
        )
    t0 = time.perf_counter()
    n_hist = scheme.n_history
    angles = angle_grid(params.tau, params.t_start, params.t_final)
    total = len(angles)
    if total < n_hist + 1:
        raise ValueError(
            f"grid has {total} points but scheme {scheme.name!r} needs "
            f"{n_hist} startup values plus at least one predictive step"
        )
    a = flow.a
    n = flow.n
    eta, mu, tau = params.eta, params.mu, params.tau
    beta_tau = scheme.beta * tau
    polyrest = np.asarray(scheme.polyrest, dtype=complex)

    values = np.empty(total, dtype=complex)
    lambdas = np.empty(total, dtype=complex)
    residuals = np.empty(total)
    norm_defects = np.empty(total)
    step_failures: list[int] = []
    suspect: set[int] = set()

    def record(k, x, lam, a_at_k):
        values[k] = np.vdot(x, a @ x)
        lambdas[k] = lam
        r = a_at_k @ x - lam * x
        residuals[k] = np.linalg.norm(r)
        norm_defects[k] = abs(np.vdot(x, x).real - 1.0)
        if abs(lam.imag) > _IMAG_DRIFT_TOL * (1.0 + abs(lam)):
            suspect.add(k)
        else:
            suspect.discard(k)
        return residuals[k]

    def partial(upto):
        return SweepResult(
            t=angles[:upto].copy(), values=values[:upto].copy(),
            lambdas=lambdas[:upto].copy(), residuals=residuals[:upto].copy(),
            norm_defects=norm_defects[:upto].copy(), scheme_name=scheme.name,
            params=params, which=which, startup_count=n_hist,
            step_failures=list(step_failures), suspect_steps=sorted(suspect),
            wall_time=time.perf_counter() - t0,
        )

    window = startup(flow, scheme, params, which)
    z = window.as_matrix()  # columns newest first
    for k, state in enumerate(window.states):
        record(k, state.x, state.lam, flow.value_at(state.t))

    # hot-loop buffers; every expression below mirrors assemble_system /
    # znn_step term for term so the two paths agree bitwise
    a_cur = flow.value_at(angles[n_hist - 1])
    a_nxt = np.empty_like(a_cur)
    a_dot = np.empty_like(a_cur)
    p = np.empty((n + 1, n + 1), dtype=complex)
    q = np.empty(n + 1, dtype=complex)
    znew = np.empty(n + 1, dtype=complex)
    zsum = np.empty(n + 1, dtype=complex)
    tmp = np.empty(n, dtype=complex)
    ax = a_cur @ z[:n, 0]  # flow-times-eigenvector, reused across iterations
    ax_new = np.empty(n, dtype=complex)
    lo2, hi2 = _NORM_LO ** 2, _NORM_HI ** 2
    thresh = params.restart_threshold
    qn = q[:n]

    for k in range(n_hist - 1, total - 1):
        x = z[:n, 0]
        lam = z[n, 0]
        flow.derivative_at(angles[k], out=a_dot)
        p[:n, :n] = a_cur
        p[:n, :n].flat[:: n + 1] -= lam
        p[:n, n] = -x
        p[n, :n] = -x.conj()
        p[n, n] = 0.0
        # q[:n] = -eta*(A x - lam x) - Adot x
        np.multiply(x, lam, out=qn)
        np.subtract(ax, qn, out=qn)
        qn *= -eta
        qn -= np.dot(a_dot, x, out=tmp)
        q[n] = 0.5 * mu * (np.vdot(x, x).real - 1.0)

        failed = None
        zdot = _gesv(p, q)
        if zdot is None:
            failed = "singular system (zero pivot)"

        flow.value_at(angles[k + 1], out=a_nxt)
        if failed is None:
            # z_new = beta*tau*zdot - Z @ polyrest
            np.dot(z, polyrest, out=zsum)
            np.multiply(zdot, beta_tau, out=znew)
            znew -= zsum
            xn = znew[:n]
            lam_new = znew[n]
            nrm2 = np.vdot(xn, xn).real
            if not (np.isfinite(nrm2) and np.isfinite(lam_new)
                    and lo2 <= nrm2 <= hi2):
                failed = f"divergence: |x|^2 = {nrm2:.3e}"
            else:
                np.dot(a_nxt, xn, out=ax_new)
                np.multiply(xn, lam_new, out=tmp)
                np.subtract(ax_new, tmp, out=tmp)
                resid = math.sqrt(np.vdot(tmp, tmp).real)
                residuals[k + 1] = resid
                values[k + 1] = np.vdot(xn, np.dot(a, xn, out=tmp))
                lambdas[k + 1] = lam_new
                norm_defects[k + 1] = abs(nrm2 - 1.0)
                if abs(lam_new.imag) > _IMAG_DRIFT_TOL * (1.0 + abs(lam_new)):
                    suspect.add(k + 1)
                if thresh is not None and resid > thresh:
                    failed = f"residual {resid:.3e} above restart threshold"

        if failed is not None:
            if thresh is None:
                raise SweepFailure(f"step {k + 1} failed: {failed}", k + 1, partial(k + 1))
            lo = k + 2 - n_hist
            states = _reseed_window(flow, angles[lo:k + 2], which, z[:n, 0])
            z = HistoryWindow(states=tuple(states)).as_matrix()
            record(k + 1, states[-1].x, states[-1].lam, a_nxt)
            step_failures.append(k + 1)
            np.dot(a_nxt, z[:n, 0], out=ax_new)
        else:
            z[:, 1:] = z[:, :-1]
            z[:, 0] = znew
        ax, ax_new = ax_new, ax
        a_cur, a_nxt = a_nxt, a_cur

    return partial(total)
