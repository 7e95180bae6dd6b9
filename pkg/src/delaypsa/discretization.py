"""Spectral discretization of a retarded delay system on a Chebyshev mesh.

The delay system is collocated at Chebyshev extremal points of
[-tau_max, 0], giving a matrix pair (A_N, B_N) whose transfer function
B_N^T (lam I - A_N)^{-1} B_N reproduces the inverse characteristic matrix
of the system with each exp(-lam*tau) replaced by a rational interpolant
p_N(-tau; lam).  The rational approximation is spectrally accurate near
the origin, so the rightmost eigenvalues of A_N approximate the rightmost
characteristic roots.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import numerics
from .model import TimeDelaySystem

__all__ = [
    "SingularResolventError",
    "Mesh",
    "Discretization",
    "chebyshev_mesh",
    "differentiation_matrix",
    "lagrange_values",
    "assemble",
    "rational_exp_nodes",
    "rational_exp",
    "char_matrix_approx",
    "transfer_function",
    "spectral_abscissa_approx",
]


class SingularResolventError(Exception):
    """The interpolation resolvent (lam I - D11) is singular at this lam."""


@dataclass(frozen=True)
class Mesh:
    """Interpolation nodes on [-span, 0], ascending, with barycentric weights."""

    points: np.ndarray
    bary_weights: np.ndarray

    @property
    def N(self):
        return len(self.points) - 1

    @property
    def span(self):
        return -float(self.points[0])


def chebyshev_mesh(N, tau_max):
    """Chebyshev extremal mesh with N+1 points on [-tau_max, 0].

    Node k (k = 0..N) sits at (tau_max/2) * (cos((k - N) pi / N) - 1); the
    first node is -tau_max, the last is exactly 0.  Barycentric weights are
    (-1)^k, halved at both endpoints (any common scaling is immaterial).
    """
    if N < 1:
        raise ValueError("invalid N: mesh needs N >= 1")
    if not tau_max > 0.0:
        raise ValueError("invalid span: tau_max must be > 0")
    i = np.arange(-N, 1, dtype=float)
    points = 0.5 * tau_max * (np.cos(i * np.pi / N) - 1.0)
    points[-1] = 0.0
    points[0] = -tau_max
    bary = np.ones(N + 1)
    bary[1::2] = -1.0
    bary[0] *= 0.5
    bary[-1] *= 0.5
    return Mesh(points, bary)


def differentiation_matrix(mesh):
    """Dense differentiation matrix d[i, k] = l_k'(points[i]).

    Off-diagonal entries come from the barycentric form; diagonal entries
    are the negative row sums, which makes every row sum exactly zero so
    constants differentiate to machine zero.
    """
    x = mesh.points
    w = mesh.bary_weights
    diff = x[:, None] - x[None, :]
    np.fill_diagonal(diff, 1.0)
    d = (w[None, :] / w[:, None]) / diff
    np.fill_diagonal(d, 0.0)
    np.fill_diagonal(d, -d.sum(axis=1))
    return d


def lagrange_values(mesh, t):
    """Values of all Lagrange cardinal polynomials at t in [-span, 0].

    Exact unit vector when t hits a node; otherwise the barycentric second
    form, which sums to 1 identically.
    """
    x = mesh.points
    if t < x[0] - 1e-12 * mesh.span or t > 1e-12 * mesh.span:
        raise ValueError(f"t={t} outside the mesh interval [{x[0]}, 0]")
    d = t - x
    exact = d == 0.0
    if exact.any():
        out = np.zeros(len(x))
        out[np.argmax(exact)] = 1.0
        return out
    vals = mesh.bary_weights / d
    return vals / vals.sum()


@dataclass(frozen=True)
class Discretization:
    """Collocation matrices for one system: mesh, D, state/input matrices."""

    system: TimeDelaySystem
    mesh: Mesh
    D: np.ndarray
    state_matrix: np.ndarray  # (N+1)n x (N+1)n
    input_matrix: np.ndarray  # (N+1)n x n, unit block in the last block row

    @property
    def N(self):
        return self.mesh.N

    @property
    def n(self):
        return self.system.n


def assemble(system, N):
    """Build the collocation pair (A_N, B_N) for a system at mesh order N.

    The top N block rows replicate the differentiation matrix (d[i, k] I);
    the bottom block row applies the delay matrices through the Lagrange
    values at the delay points, splicing the derivative condition at 0 into
    the mesh.  Delay-free systems admit N = 0 (A_N = A_0, B_N = I); for
    m >= 1 the mesh spans [-tau_max, 0].
    """
    n = system.n
    if N == 0:
        if system.m != 0:
            raise ValueError("invalid N: N = 0 is only valid for delay-free systems")
        mesh = Mesh(np.zeros(1), np.ones(1))
        return Discretization(
            system, mesh, np.zeros((1, 1)),
            system.matrices[0].copy(), np.eye(n),
        )
    if N < 0:
        raise ValueError("invalid N: must be >= 0")
    # delay-free systems carry the mesh on a dummy unit interval; all the
    # delayed couplings below vanish so only spurious differentiation modes
    # are added, and those sit far in the left half plane
    span = system.tau_max if system.m else 1.0
    mesh = chebyshev_mesh(N, span)
    d = differentiation_matrix(mesh)
    dim = (N + 1) * n
    state = np.zeros((dim, dim))
    state[: N * n, :] = np.kron(d[:N, :], np.eye(n))
    gamma = [np.zeros((n, n)) for _ in range(N + 1)]
    gamma[N] += system.matrices[0]
    for tau, a in zip(system.delays[1:], system.matrices[1:]):
        lv = lagrange_values(mesh, -tau)
        for k in range(N + 1):
            if lv[k]:
                gamma[k] = gamma[k] + a * lv[k]
    for k in range(N + 1):
        state[N * n :, k * n : (k + 1) * n] = gamma[k]
    inp = np.zeros((dim, n))
    inp[N * n :, :] = np.eye(n)
    return Discretization(system, mesh, d, state, inp)


def rational_exp_nodes(disc, lam):
    """Interior-node values of the rational exponential interpolant at lam.

    Solves (lam I - D11) c = D12 where D11 drops the last mesh row/column;
    entry k is p_N(points[k]; lam) for the N interior (leftmost) nodes.
    """
    N = disc.N
    if N == 0:
        return np.zeros(0, dtype=complex)
    d11 = disc.D[:N, :N]
    d12 = disc.D[:N, N]
    try:
        return numerics.solve_complex(
            lam * np.eye(N) - d11, d12.astype(complex)
        )
    except numerics.SingularMatrixError as exc:
        raise SingularResolventError(
            f"lam={lam} is a pole of the rational exponential approximation"
        ) from exc


def rational_exp(disc, tau, lam):
    """Rational approximation p_N(-tau; lam) of exp(-lam*tau), 0 <= tau <= span.

    p_N is the degree-N polynomial (in the mesh variable) interpolating the
    exponential's collocation conditions; p_N(0; lam) = 1 for every lam and
    p_N -> 0 as Re lam -> +inf like a proper rational function of lam.
    """
    if tau == 0.0:
        return 1.0 + 0.0j
    lv = lagrange_values(disc.mesh, -tau)
    nodes = rational_exp_nodes(disc, lam)
    return complex(lv[-1] + lv[:-1] @ nodes)


def char_matrix_approx(disc, lam):
    """Approximate characteristic matrix with exp(-lam*tau_i) -> p_N(-tau_i; lam).

    Exact (lam I - A_0) for delay-free systems.  One interior-node solve is
    shared by all delays.
    """
    system = disc.system
    lam = complex(lam)
    f = lam * np.eye(system.n, dtype=complex) - system.matrices[0]
    if system.m == 0:
        return f
    nodes = rational_exp_nodes(disc, lam)
    for tau, a in zip(system.delays[1:], system.matrices[1:]):
        lv = lagrange_values(disc.mesh, -tau)
        p = lv[-1] + lv[:-1] @ nodes
        f -= a * p
    return f


def transfer_function(disc, lam):
    """B_N^T (lam I - A_N)^{-1} B_N, the n x n transfer function at lam.

    Equals the inverse of char_matrix_approx(disc, lam) wherever both are
    defined; raises SingularMatrixError when lam is an eigenvalue of A_N.
    """
    dim = disc.state_matrix.shape[0]
    x = numerics.solve_complex(
        lam * np.eye(dim) - disc.state_matrix,
        disc.input_matrix.astype(complex),
    )
    return disc.input_matrix.T @ x


def spectral_abscissa_approx(disc):
    """Largest real part over the eigenvalues of the collocation matrix A_N."""
    vals = numerics.eig_real(disc.state_matrix).eigenvalues
    return float(vals.real.max())
