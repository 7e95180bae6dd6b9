"""Gauss-Newton correction of a predicted pseudospectral abscissa point.

A rightmost point sigma + j*omega of the epsilon-pseudospectrum satisfies a
nonlinear eigenvalue system: the doubled matrix

    H(lam, sigma, xi) = [[F_sigma(lam), -xi^{-2} I], [I, -F_sigma(lam)*]]

(with F_sigma the characteristic matrix of the sigma-shifted system and
xi = 1/(eps * w(sigma)) the target resolvent singular value) must be
singular at lam = j*omega, and the active singular value curve must be at
an extremum in omega.  Packing a null vector [u; v], omega and sigma into
one real unknown vector gives 4n+2 degrees of freedom constrained by 4n+3
real equations (null vector, anchor normalization, extremality), solved by
Gauss-Newton with the analytic Jacobian.  Starts come straight from the
predictor's frequency list.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import numerics
from .model import check_pair, eval_weight, weight_slope, shift_system

__all__ = [
    "AllStartsFailedError",
    "CorrectorState",
    "GaussNewtonResult",
    "StartOutcome",
    "CorrectionResult",
    "sv_threshold",
    "build_nleig",
    "start_vector",
    "residual",
    "jacobian",
    "gauss_newton",
    "correct",
]


class AllStartsFailedError(Exception):
    """No Gauss-Newton start converged; the prediction cannot be corrected."""


def sv_threshold(pert, system, sigma):
    """Target singular value xi(sigma) = 1/(eps*w(sigma)) and its slope.

    w is strictly decreasing when a delayed weight is finite, so xi is
    nondecreasing in sigma; dxi/dsigma = -xi * w'(sigma)/w(sigma) >= 0.
    """
    w = eval_weight(pert, system, sigma)
    xi = 1.0 / (pert.epsilon * w)
    dxi = -xi * weight_slope(pert, system, sigma) / w
    return xi, dxi


def _shifted(system, sigma):
    """Matrices of the system shifted by sigma; A_{sigma,0} = A_0 - sigma*I."""
    mats = [system.matrices[0] - sigma * np.eye(system.n)]
    for tau, a in zip(system.delays[1:], system.matrices[1:]):
        mats.append(a * math.exp(-sigma * tau))
    return mats


def build_nleig(shifted_system, lam, xi):
    """Doubled nonlinear eigenvalue matrix H(lam, sigma, xi), 2n x 2n.

    shifted_system carries the sigma-shifted matrices (see model.shift_system
    for the weight half; only the matrices matter here).  Blocks:
    top-left F_sigma(lam), top-right -xi^{-2} I, bottom-left I, bottom-right
    lam I + A_{sigma,0}* + sum_i A_{sigma,i}* exp(+lam*tau_i).
    """
    n = shifted_system.n
    lam = complex(lam)
    eye = np.eye(n)
    tl = lam * eye.astype(complex) - shifted_system.matrices[0]
    br = lam * eye.astype(complex) + shifted_system.matrices[0].T
    for tau, a in zip(shifted_system.delays[1:], shifted_system.matrices[1:]):
        tl -= a * np.exp(-lam * tau)
        br += a.T * np.exp(lam * tau)
    h = np.zeros((2 * n, 2 * n), dtype=complex)
    h[:n, :n] = tl
    h[:n, n:] = -(xi ** -2) * eye
    h[n:, :n] = eye
    h[n:, n:] = br
    return h


def start_vector(nleig_matrix):
    """Unit-norm smallest right singular vector, phase-fixed for reproducibility.

    The entry of largest magnitude is rotated to the positive real axis so
    reruns produce the same anchor.
    """
    sv = numerics.svd_complex(nleig_matrix, vectors=True)
    x = sv.right_h[-1].conj()
    k = int(np.argmax(np.abs(x)))
    phase = x[k] / abs(x[k])
    x = x / phase
    return x / np.linalg.norm(x)


@dataclass
class CorrectorState:
    """Unknowns of the extremality system plus the fixed anchor vector."""

    u: np.ndarray
    v: np.ndarray
    omega: float
    sigma: float
    anchor: np.ndarray

    def pack(self):
        return np.concatenate([
            self.u.real, self.u.imag, self.v.real, self.v.imag,
            [self.omega, self.sigma],
        ])

    def apply_step(self, step):
        n = len(self.u)
        self.u = self.u + step[0:n] + 1j * step[n : 2 * n]
        self.v = self.v + step[2 * n : 3 * n] + 1j * step[3 * n : 4 * n]
        self.omega = float(self.omega + step[4 * n])
        self.sigma = float(self.sigma + step[4 * n + 1])

    def fold(self):
        """Conjugate-fold to omega >= 0 (the mirror state solves the same system)."""
        if self.omega < 0.0:
            self.u = self.u.conj()
            self.v = self.v.conj()
            self.anchor = self.anchor.conj()
            self.omega = -self.omega


def _extremality_factor(shifted_system, omega, order=1):
    """sum_i tau_i^order A_{sigma,i} exp(-j*omega*tau_i), plus I for order 1."""
    n = shifted_system.n
    out = np.eye(n, dtype=complex) if order == 1 else np.zeros((n, n), complex)
    for tau, a in zip(shifted_system.delays[1:], shifted_system.matrices[1:]):
        out += (tau ** order) * a * np.exp(-1j * omega * tau)
    return out


def residual(system, pert, state):
    """Real residual vector, length 4n+3.

    Rows: Re/Im of H(j*omega) [u; v] (4n), Re/Im of anchor* [u; v] - 1 (2),
    and the extremality condition Im{ v* (I + sum tau_i A_{sigma,i}
    e^{-j omega tau_i}) u } (1).
    """
    check_pair(system, pert)
    shifted, _ = shift_system(system, pert, state.sigma)
    xi, _ = sv_threshold(pert, system, state.sigma)
    h = build_nleig(shifted, 1j * state.omega, xi)
    x = np.concatenate([state.u, state.v])
    hx = h @ x
    norm_res = state.anchor.conj() @ x - 1.0
    p = _extremality_factor(shifted, state.omega)
    g = float(np.imag(state.v.conj() @ (p @ state.u)))
    return np.concatenate([
        hx.real, hx.imag, [norm_res.real, norm_res.imag], [g],
    ])


def jacobian(system, pert, state):
    """Analytic Jacobian of `residual` in (Re u, Im u, Re v, Im v, omega, sigma).

    Shape (4n+3, 4n+2).  The omega column uses dH/domega = j*diag(P, P*) and
    the sigma column chains through the shifted matrices (dA_{sigma,i}/dsigma
    = -tau_i A_{sigma,i}, dA_{sigma,0}/dsigma = -I) and through xi(sigma).
    """
    check_pair(system, pert)
    n = system.n
    shifted, _ = shift_system(system, pert, state.sigma)
    xi, dxi = sv_threshold(pert, system, state.sigma)
    h = build_nleig(shifted, 1j * state.omega, xi)
    x = np.concatenate([state.u, state.v])
    p = _extremality_factor(shifted, state.omega)
    q = _extremality_factor(shifted, state.omega, order=2)

    dh_domega = np.zeros((2 * n, 2 * n), dtype=complex)
    dh_domega[:n, :n] = 1j * p
    dh_domega[n:, n:] = 1j * p.conj().T

    # d(xi^-2)/dsigma = -2 xi^-3 dxi
    dxi2inv = -2.0 * xi ** -3 * dxi
    dh_dsigma = np.zeros((2 * n, 2 * n), dtype=complex)
    dh_dsigma[:n, :n] = p
    dh_dsigma[:n, n:] = -dxi2inv * np.eye(n)
    dh_dsigma[n:, n:] = -p.conj().T

    jac = np.zeros((4 * n + 3, 4 * n + 2))
    hu = h[:, :n]
    hv = h[:, n:]
    jac[: 2 * n, 0:n] = hu.real
    jac[2 * n : 4 * n, 0:n] = hu.imag
    jac[: 2 * n, n : 2 * n] = -hu.imag
    jac[2 * n : 4 * n, n : 2 * n] = hu.real
    jac[: 2 * n, 2 * n : 3 * n] = hv.real
    jac[2 * n : 4 * n, 2 * n : 3 * n] = hv.imag
    jac[: 2 * n, 3 * n : 4 * n] = -hv.imag
    jac[2 * n : 4 * n, 3 * n : 4 * n] = hv.real

    hw = dh_domega @ x
    hs = dh_dsigma @ x
    jac[: 2 * n, 4 * n] = hw.real
    jac[2 * n : 4 * n, 4 * n] = hw.imag
    jac[: 2 * n, 4 * n + 1] = hs.real
    jac[2 * n : 4 * n, 4 * n + 1] = hs.imag

    cu = state.anchor[:n]
    cv = state.anchor[n:]
    jac[4 * n, 0:n] = cu.real
    jac[4 * n, n : 2 * n] = cu.imag
    jac[4 * n, 2 * n : 3 * n] = cv.real
    jac[4 * n, 3 * n : 4 * n] = cv.imag
    jac[4 * n + 1, 0:n] = -cu.imag
    jac[4 * n + 1, n : 2 * n] = cu.real
    jac[4 * n + 1, 2 * n : 3 * n] = -cv.imag
    jac[4 * n + 1, 3 * n : 4 * n] = cv.real

    # g = Im(v* P u) = Im(q_vec* u) with q_vec = P* v
    q_vec = p.conj().T @ state.v
    p_vec = p @ state.u
    jac[4 * n + 2, 0:n] = -q_vec.imag
    jac[4 * n + 2, n : 2 * n] = q_vec.real
    jac[4 * n + 2, 2 * n : 3 * n] = p_vec.imag
    jac[4 * n + 2, 3 * n : 4 * n] = -p_vec.real
    jac[4 * n + 2, 4 * n] = float(np.imag(state.v.conj() @ ((-1j * q) @ state.u)))
    jac[4 * n + 2, 4 * n + 1] = float(np.imag(state.v.conj() @ ((-q) @ state.u)))
    return jac


@dataclass(frozen=True)
class GaussNewtonResult:
    state: CorrectorState
    converged: bool
    status: str  # converged | max-iterations | diverged | rank-deficient | stalled
    iterations: int
    residual_norms: tuple


def gauss_newton(system, pert, start, gn_tol=None, max_iter=50, damped=False):
    """Solve the extremality system from a CorrectorState start.

    Full-step Gauss-Newton through a dense least-squares solve; optional
    backtracking damping halves a step while it would increase the residual.
    Stops when ||r|| <= gn_tol * (1 + scale) with scale = max ||A_i||_2
    (gn_tol defaults to 1e-10), when the step collapses below 1e-14, after
    max_iter iterations, or on three consecutive residual increases.
    """
    state = CorrectorState(
        u=start.u.astype(complex).copy(),
        v=start.v.astype(complex).copy(),
        omega=float(start.omega),
        sigma=float(start.sigma),
        anchor=start.anchor.astype(complex).copy(),
    )
    scale = max(np.linalg.norm(a, 2) for a in system.matrices)
    threshold = (1e-10 if gn_tol is None else float(gn_tol)) * (1.0 + scale)
    norms = []
    grew = 0
    status = "max-iterations"
    converged = False
    iterations = 0
    for iterations in range(max_iter + 1):
        r = residual(system, pert, state)
        rn = float(np.linalg.norm(r))
        norms.append(rn)
        if rn <= threshold:
            status = "converged"
            converged = True
            break
        if len(norms) >= 2 and rn > norms[-2]:
            grew += 1
            if grew >= 3:
                status = "diverged"
                break
        else:
            grew = 0
        if iterations == max_iter:
            break
        try:
            step = numerics.least_squares_real(jacobian(system, pert, state), r)
        except numerics.RankDeficientError:
            status = "rank-deficient"
            break
        if damped:
            alpha = 1.0
            for _ in range(25):
                trial = CorrectorState(state.u, state.v, state.omega,
                                       state.sigma, state.anchor)
                trial.apply_step(alpha * step)
                if np.linalg.norm(residual(system, pert, trial)) < rn:
                    break
                alpha *= 0.5
            step = alpha * step
        state.apply_step(step)
        if np.linalg.norm(step) < 1e-14 * (1.0 + np.linalg.norm(state.pack())):
            r = residual(system, pert, state)
            rn = float(np.linalg.norm(r))
            norms.append(rn)
            converged = rn <= threshold
            status = "converged" if converged else "stalled"
            iterations += 1
            break
    if converged:
        state.fold()
    return GaussNewtonResult(state, converged, status, iterations, tuple(norms))


@dataclass(frozen=True)
class StartOutcome:
    """Per-start record: where the iteration went and how it ended."""

    converged: bool
    sigma: float
    omega: float
    iterations: int
    residual_norm: float
    status: str
    residual_norms: tuple = field(repr=False, default=())


@dataclass(frozen=True)
class CorrectionResult:
    """Corrected abscissa (max over converged starts) and diagnostics."""

    alpha_eps: float
    omega_eps: float
    per_start: tuple
    warnings: tuple = ()

    def distinct_solutions(self, tol=1e-8):
        """Converged (sigma, omega) pairs deduplicated within tol-relative."""
        out = []
        for s in self.per_start:
            if not s.converged:
                continue
            if not any(
                abs(s.sigma - a) <= tol * (1.0 + abs(a))
                and abs(s.omega - b) <= tol * (1.0 + abs(b))
                for a, b in out
            ):
                out.append((s.sigma, s.omega))
        return out


def correct(system, pert, prediction, gn_tol=None, max_iter=50, damped=False):
    """Correct a prediction: one Gauss-Newton run per predicted frequency.

    Start vectors are the smallest singular vectors of the doubled matrix at
    (j*omega_i, alpha_pred); each converged run lands on an extremal point
    of the pseudospectrum boundary, and the corrected abscissa is the
    largest corrected sigma.  Raises AllStartsFailedError when nothing
    converges; warns when the correction moves further than 10 x the
    prediction bracket width.
    """
    check_pair(system, pert)
    freqs = np.atleast_1d(np.asarray(prediction.frequencies, dtype=float))
    if freqs.size == 0:
        raise ValueError("prediction carries no frequencies to correct")
    sigma0 = float(prediction.alpha_pred)
    shifted0, _ = shift_system(system, pert, sigma0)
    xi0, _ = sv_threshold(pert, system, sigma0)
    outcomes = []
    for omega0 in freqs:
        x0 = start_vector(build_nleig(shifted0, 1j * omega0, xi0))
        n = system.n
        state0 = CorrectorState(u=x0[:n], v=x0[n:], omega=float(omega0),
                                sigma=sigma0, anchor=x0.copy())
        run = gauss_newton(system, pert, state0, gn_tol=gn_tol,
                           max_iter=max_iter, damped=damped)
        outcomes.append(StartOutcome(
            converged=run.converged,
            sigma=run.state.sigma,
            omega=run.state.omega,
            iterations=run.iterations,
            residual_norm=run.residual_norms[-1],
            status=run.status,
            residual_norms=run.residual_norms,
        ))
    winners = [s for s in outcomes if s.converged]
    if not winners:
        raise AllStartsFailedError(
            "no Gauss-Newton start converged; retry with a finer prediction "
            "(smaller tol or larger N) or enable damping"
        )
    best = max(winners, key=lambda s: s.sigma)
    warnings = []
    lo, hi = prediction.bracket
    width = hi - lo if math.isfinite(hi) else math.inf
    if math.isfinite(width) and abs(best.sigma - prediction.alpha_pred) > 10.0 * width:
        warnings.append(
            "correction moved more than 10x the prediction bracket width; "
            "consider a smaller bisection tol or a larger mesh order N"
        )
    failed = len(outcomes) - len(winners)
    if failed:
        warnings.append(f"{failed} of {len(outcomes)} correction starts did not converge")
    return CorrectionResult(
        alpha_eps=float(best.sigma),
        omega_eps=float(best.omega),
        per_start=tuple(outcomes),
        warnings=tuple(warnings),
    )
