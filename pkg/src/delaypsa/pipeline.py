"""End-to-end pseudospectral abscissa computation: predict, then correct."""

from __future__ import annotations

from dataclasses import dataclass

from .corrector import CorrectionResult, correct
from .predictor import PredictionResult, predict

__all__ = ["PsaResult", "compute_psa"]


@dataclass(frozen=True)
class PsaResult:
    """Combined result: corrected abscissa plus both stage records."""

    alpha_eps: float
    omega_eps: float
    prediction: PredictionResult
    correction: CorrectionResult

    @property
    def warnings(self):
        return self.prediction.warnings + self.correction.warnings


def compute_psa(system, pert, N=15, tol=1e-3, gn_tol=None,
                max_iter_bisect=100, max_iter_gn=50, damped=False):
    """Compute the epsilon-pseudospectral abscissa of a retarded system.

    Runs the Hamiltonian bisection predictor at mesh order N to bracket the
    abscissa within tol, then Gauss-Newton corrects every predicted
    boundary frequency on the exact extremality equations.  Returns a
    PsaResult; raises corrector.AllStartsFailedError when no correction
    start converges.
    """
    prediction = predict(system, pert, N=N, tol=tol,
                         max_iter=max_iter_bisect)
    correction = correct(system, pert, prediction, gn_tol=gn_tol,
                         max_iter=max_iter_gn, damped=damped)
    return PsaResult(
        alpha_eps=correction.alpha_eps,
        omega_eps=correction.omega_eps,
        prediction=prediction,
        correction=correction,
    )
