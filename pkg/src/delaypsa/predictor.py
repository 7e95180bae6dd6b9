"""Level-set prediction of the pseudospectral abscissa via Hamiltonian bisection.

For the discretized system the weighted resolvent norm along a vertical
line Re lam = sigma can be tested against the threshold 1/epsilon without
scanning frequencies: the test matrix

    H(sigma) = [[A_N - sigma I,  (w(sigma) eps) B_N B_N^T],
                [-(w(sigma) eps) B_N B_N^T,  -(A_N - sigma I)^T]]

has imaginary-axis eigenvalues exactly when the line still meets the
approximate pseudospectrum.  Bisection on sigma (with exponential search
for the initial upper bound) yields the predicted abscissa together with
the frequencies where the line touches the level set; both seed the
corrector.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import numerics
from .discretization import assemble, spectral_abscissa_approx
from .model import char_matrix, char_matrix_slope, eval_weight, shift_system

__all__ = [
    "PredictionError",
    "SpectralAbscissa",
    "PredictionResult",
    "spectral_abscissa_exact",
    "hamiltonian",
    "imaginary_axis_frequencies",
    "bisect",
    "predict",
]


class PredictionError(Exception):
    """Bisection failed (iteration budget, or no boundary frequencies found)."""


@dataclass(frozen=True)
class SpectralAbscissa:
    """Rightmost-root estimate: value, the converged roots, fallback flag."""

    value: float
    roots: tuple
    fallback: bool


@dataclass(frozen=True)
class PredictionResult:
    """Predicted abscissa, boundary frequencies and bisection diagnostics.

    alpha_pred and the bracket are reported in the original (unshifted)
    spectral coordinates; shift_used records the recentering applied before
    discretization. Frequencies are folded to omega >= 0, sorted, and
    deduplicated within 1e-8 * (1 + omega).
    """

    alpha_pred: float
    frequencies: np.ndarray
    iterations: int
    bracket: tuple
    shift_used: float
    warnings: tuple = ()


def _newton_root(system, lam0, tol, max_iter):
    """Newton iteration on [F(lam) v; c* v - 1] = 0 from a starting guess."""
    n = system.n
    f = char_matrix(system, lam0)
    sv = numerics.svd_complex(f, vectors=True)
    v = sv.right_h[-1].conj()
    c = v.copy()
    lam = complex(lam0)
    for _ in range(max_iter):
        f = char_matrix(system, lam)
        res_top = f @ v
        res_norm = math.hypot(
            float(np.linalg.norm(res_top)), abs(c.conj() @ v - 1.0)
        )
        if res_norm <= tol:
            return lam, True
        jac = np.zeros((n + 1, n + 1), dtype=complex)
        jac[:n, :n] = f
        jac[:n, n] = char_matrix_slope(system, lam) @ v
        jac[n, :n] = c.conj()
        rhs = np.concatenate([-res_top, [1.0 - c.conj() @ v]])
        try:
            step = numerics.solve_complex(jac, rhs)
        except numerics.SingularMatrixError:
            return lam, False
        v = v + step[:n]
        lam = lam + step[n]
        if not (math.isfinite(lam.real) and math.isfinite(lam.imag)):
            return lam, False
    return lam, False


def spectral_abscissa_exact(system, disc, newton_tol=1e-12, max_starts=10,
                            max_iter=40):
    """Spectral abscissa of the true characteristic matrix.

    Newton-corrects the rightmost eigenvalues of the collocation matrix on
    the exact root equations F(lam) v = 0, c* v = 1.  Falls back to the
    discretized abscissa (with the fallback flag set) if no start converges.
    """
    vals = numerics.eig_real(disc.state_matrix).eigenvalues
    order = np.argsort(-vals.real)
    starts = vals[order][: min(max_starts, len(vals))]
    scale = 1.0 + max(np.linalg.norm(a, 2) for a in system.matrices)
    roots = []
    for lam0 in starts:
        lam, ok = _newton_root(system, lam0, tol=newton_tol * scale,
                               max_iter=max_iter)
        if ok:
            if not any(abs(lam - r) <= 1e-8 * (1.0 + abs(r)) for r in roots):
                roots.append(lam)
    if not roots:
        return SpectralAbscissa(spectral_abscissa_approx(disc), (), True)
    value = max(r.real for r in roots)
    roots.sort(key=lambda r: (-r.real, abs(r.imag)))
    return SpectralAbscissa(float(value), tuple(roots), False)


def hamiltonian(disc, pert, sigma):
    """Level-set test matrix at abscissa sigma for the discretized system."""
    w = eval_weight(pert, disc.system, sigma)
    coupling = (w * pert.epsilon) * (disc.input_matrix @ disc.input_matrix.T)
    shifted = disc.state_matrix - sigma * np.eye(disc.state_matrix.shape[0])
    return np.block([[shifted, coupling], [-coupling, -shifted.T]])


def imaginary_axis_frequencies(ham, tol_im=None):
    """Nonnegative frequencies of the (numerically) imaginary eigenvalues.

    An eigenvalue lam counts as imaginary when |Re lam| <= tol_im * max(1, |lam|);
    tol_im defaults to 1e-8 scaled by the row norm of the matrix.  Frequencies
    are folded to omega >= 0, sorted, and merged within 1e-8 * (1 + omega).
    """
    if tol_im is None:
        tol_im = 1e-8 * max(1.0, np.linalg.norm(ham, np.inf))
    vals = numerics.eig_real(ham).eigenvalues
    mask = np.abs(vals.real) <= tol_im * np.maximum(1.0, np.abs(vals))
    omegas = np.sort(np.abs(vals[mask].imag))
    merged = []
    for w in omegas:
        if not merged or w - merged[-1] > 1e-8 * (1.0 + w):
            merged.append(float(w))
    return np.array(merged)


def bisect(disc, pert, tol, max_iter=100, delta_init=None, tol_im=None,
           shift=0.0):
    """Bracket the discretized pseudospectral abscissa to width tol.

    Starts from sigma_lo = alpha(A_N) with the upper end at infinity; the
    step doubles while no finite upper bound exists, then ordinary
    bisection takes over.  The imaginary-axis test of `hamiltonian` decides
    which side of the level set a trial sigma is on.  The returned
    alpha_pred is the final lower end (inside the level set); frequencies
    are read off the test matrix there.  `shift` only relabels the output
    coordinates (sigma -> sigma + shift).
    """
    if not tol > 0.0:
        raise ValueError("tol must be positive")
    sigma_lo = spectral_abscissa_approx(disc)
    sigma_hi = math.inf
    delta = tol if delta_init is None else float(delta_init)
    iterations = 0
    while sigma_hi - sigma_lo > tol:
        if iterations >= max_iter:
            raise PredictionError(
                f"bisection did not reach width {tol} in {max_iter} iterations"
            )
        if math.isinf(sigma_hi):
            delta *= 2.0
            sigma_mid = sigma_lo + delta
        else:
            sigma_mid = 0.5 * (sigma_lo + sigma_hi)
        ham = hamiltonian(disc, pert, sigma_mid)
        if imaginary_axis_frequencies(ham, tol_im).size:
            sigma_lo = sigma_mid
        else:
            sigma_hi = sigma_mid
        iterations += 1
    freqs = imaginary_axis_frequencies(hamiltonian(disc, pert, sigma_lo), tol_im)
    if freqs.size == 0:
        raise PredictionError(
            "no boundary frequencies at the final lower bound; "
            "the imaginary-axis tolerance is too tight for this problem"
        )
    return PredictionResult(
        alpha_pred=shift + sigma_lo,
        frequencies=freqs,
        iterations=iterations,
        bracket=(shift + sigma_lo, shift + sigma_hi),
        shift_used=shift,
    )


def predict(system, pert, N=15, tol=1e-3, max_iter=100, delta_init=None,
            tol_im=None):
    """Predict the pseudospectral abscissa at mesh order N.

    Recenter the system at its exact spectral abscissa (so the
    discretization is most accurate where the level set is resolved), run
    the Hamiltonian bisection there, and report in original coordinates.
    """
    disc0 = assemble(system, N)
    sa = spectral_abscissa_exact(system, disc0)
    shifted_sys, shifted_pert = shift_system(system, pert, sa.value)
    disc = assemble(shifted_sys, N)
    result = bisect(disc, shifted_pert, tol, max_iter=max_iter,
                    delta_init=delta_init, tol_im=tol_im, shift=sa.value)
    if sa.fallback:
        result = replace(result, warnings=result.warnings + (
            "spectral abscissa: Newton correction failed for every start; "
            "using the discretized abscissa as the shift",
        ))
    return result
