"""Independent grid oracles: dense level-function evaluation, a brute-force
pseudospectral abscissa, frequency profiles of the discretized level
function, and contour extraction for plotting.

Everything here avoids the predictor/corrector machinery on purpose: the
only ingredients are the characteristic matrix, the weight, and dense
singular value sweeps, so results can cross-check the fast path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .discretization import char_matrix_approx, SingularResolventError
from .model import check_pair, eval_weight

__all__ = [
    "RegionTooSmallError",
    "EmptyPseudospectrumError",
    "GridRegion",
    "GridPsaResult",
    "ContourSet",
    "grid_level",
    "grid_psa",
    "level_sup_profile",
    "frequency_bound",
    "contours",
]

_CHUNK = 200_000  # grid points per batched SVD call, bounds memory


class RegionTooSmallError(Exception):
    """The level set reaches the right edge of the search region."""


class EmptyPseudospectrumError(Exception):
    """No grid node reached the level; region or resolution is off."""


@dataclass(frozen=True)
class GridRegion:
    """Rectangle [re_min, re_max] x [im_min, im_max] sampled n_re x n_im."""

    re_min: float
    re_max: float
    im_min: float
    im_max: float
    n_re: int
    n_im: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise ValueError("empty region: need re_min < re_max and im_min < im_max")
        if self.n_re < 2 or self.n_im < 2:
            raise ValueError("need at least 2 samples per axis")

    def re_axis(self):
        return np.linspace(self.re_min, self.re_max, self.n_re)

    def im_axis(self):
        return np.linspace(self.im_min, self.im_max, self.n_im)


def _smallest_singular_grid(system, region):
    """sigma_min(F(lam)) on the grid, shape (n_im, n_re), evaluated in chunks."""
    re = region.re_axis()
    im = region.im_axis()
    lam = (re[None, :] + 1j * im[:, None]).ravel()
    n = system.n
    eye = np.eye(n, dtype=complex)
    out = np.empty(lam.size)
    for start in range(0, lam.size, max(1, _CHUNK // (n * n))):
        chunk = lam[start : start + max(1, _CHUNK // (n * n))]
        mats = chunk[:, None, None] * eye
        for tau, a in zip(system.delays, system.matrices):
            mats = mats - np.exp(-chunk * tau)[:, None, None] * a
        out[start : start + len(chunk)] = numerics.singular_values(mats)[:, -1]
    return out.reshape(region.n_im, region.n_re)


def grid_level(system, pert, region):
    """Level function f on the grid, shape (n_im, n_re); +inf at roots."""
    check_pair(system, pert)
    smin = _smallest_singular_grid(system, region)
    w = np.array([eval_weight(pert, system, s) for s in region.re_axis()])
    with np.errstate(divide="ignore"):
        return w[None, :] / smin


@dataclass(frozen=True)
class GridPsaResult:
    """Brute-force abscissa: value, achieved resolution, maximizer location."""

    value: float
    resolution: float
    location: complex


def grid_psa(system, pert, region, refine_iters=3):
    """Rightmost grid node inside the pseudospectrum, with local refinement.

    Finds max Re lam over nodes with f >= 1/eps, then re-grids a one-cell
    window around the maximizer at 10x resolution, refine_iters times.  The
    right edge of the region must stay outside the level set, otherwise the
    region cannot contain the rightmost point and RegionTooSmallError is
    raised.  Reported resolution is the final cell width along Re.
    """
    check_pair(system, pert)
    level = 1.0 / pert.epsilon
    f = grid_level(system, pert, region)
    if (f[:, -1] >= level).any():
        raise RegionTooSmallError(
            "level set reaches the right edge; extend re_max"
        )
    mask = f >= level
    if not mask.any():
        raise EmptyPseudospectrumError(
            "no grid node reaches the level; enlarge the region or refine the grid"
        )
    re = region.re_axis()
    im = region.im_axis()
    cols = np.where(mask.any(axis=0))[0]
    j = cols.max()
    i = int(np.argmax(np.where(mask[:, j], f[:, j], -np.inf)))
    best_re, best_im = re[j], im[i]
    cell_re = (region.re_max - region.re_min) / (region.n_re - 1)
    cell_im = (region.im_max - region.im_min) / (region.n_im - 1)
    for _ in range(refine_iters):
        sub = GridRegion(
            best_re - cell_re, best_re + cell_re,
            best_im - cell_im, best_im + cell_im,
            21, 21,
        )
        f = grid_level(system, pert, sub)
        mask = f >= level
        # the previous maximizer is the center node, so the mask is nonempty
        re = sub.re_axis()
        im = sub.im_axis()
        cols = np.where(mask.any(axis=0))[0]
        j = cols.max()
        i = int(np.argmax(np.where(mask[:, j], f[:, j], -np.inf)))
        best_re, best_im = re[j], im[i]
        cell_re /= 10.0
        cell_im /= 10.0
    return GridPsaResult(float(best_re), float(cell_re),
                         complex(best_re, best_im))


def _disc_level(disc, pert, sigma, omega):
    """f_N(sigma + j*omega) for a discretization, via the rational matrix."""
    lam = complex(sigma, omega)
    try:
        fmat = char_matrix_approx(disc, lam)
    except SingularResolventError:
        # poles of the rational interpolant are isolated; nudge off of one
        fmat = char_matrix_approx(disc, lam + 1e-9 * (1.0 + abs(lam)))
    smin = numerics.svd_complex(fmat).values[-1]
    w = eval_weight(pert, disc.system, sigma)
    if smin == 0.0:
        return math.inf
    return w / smin


def level_sup_profile(disc, pert, sigmas, omega_max, n_omega=400):
    """sup over omega >= 0 of f_N(sigma + j*omega), one value per sigma.

    Scans a uniform frequency grid on [0, omega_max] augmented with the
    imaginary parts of the eigenvalues of the collocation matrix (the sup
    turns into a narrow resonance spike as sigma approaches the discretized
    spectral abscissa, and the eigenvalue frequencies sit at those spikes),
    then sharpens the best candidate with golden-section search.
    """
    check_pair(disc.system, pert)
    eig_im = np.abs(numerics.eig_real(disc.state_matrix).eigenvalues.imag)
    seeds = eig_im[eig_im <= omega_max]
    base = np.linspace(0.0, omega_max, n_omega)
    candidates = np.unique(np.concatenate([base, seeds]))
    out = []
    for sigma in np.atleast_1d(np.asarray(sigmas, dtype=float)):
        vals = np.array([_disc_level(disc, pert, sigma, w) for w in candidates])
        k = int(np.argmax(vals))
        lo = candidates[max(k - 1, 0)]
        hi = candidates[min(k + 1, len(candidates) - 1)]
        out.append(_golden_max(
            lambda w: _disc_level(disc, pert, sigma, w), lo, hi, vals[k]
        ))
    return np.array(out)


def _golden_max(fun, lo, hi, best_val):
    """Golden-section maximization on [lo, hi]; returns max(found, best_val)."""
    if hi <= lo:
        return best_val
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fun(c), fun(d)
    for _ in range(80):
        if b - a < 1e-12 * (1.0 + abs(a)):
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fun(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fun(d)
    return max(best_val, fc, fd)


def frequency_bound(system, pert, sigma_min):
    """Upper bound on |lam| over pseudospectrum points with Re lam >= sigma_min.

    Any lam there satisfies |lam| <= sum_i ||A_i||_2 exp(-sigma_min tau_i)
    + eps * w(sigma_min); useful for sizing oracle regions.
    """
    check_pair(system, pert)
    total = pert.epsilon * eval_weight(pert, system, sigma_min)
    for tau, a in zip(system.delays, system.matrices):
        total += np.linalg.norm(a, 2) * math.exp(-sigma_min * tau)
    return float(total)


@dataclass(frozen=True)
class ContourSet:
    """Polylines of the boundary level set f = level (level = 1/eps)."""

    level: float
    polylines: tuple  # complex ndarrays, ordered for plotting


def contours(system, pert, region):
    """Marching-squares extraction of the pseudospectrum boundary.

    The level set f = 1/eps is extracted as the epsilon level set of the
    reciprocal field sigma_min(F)/w, which is finite at characteristic
    roots (f is not), so linear edge interpolation stays well conditioned.
    Saddle cells are disambiguated with the cell-center average.  Chains
    are stitched on shared grid edges; closed loops repeat their first
    vertex at the end.
    """
    check_pair(system, pert)
    smin = _smallest_singular_grid(system, region)
    w = np.array([eval_weight(pert, system, s) for s in region.re_axis()])
    g = smin / w[None, :]
    level = pert.epsilon
    re = region.re_axis()
    im = region.im_axis()
    inside = g < level

    def interp(i0, j0, i1, j1):
        ga, gb = g[i0, j0], g[i1, j1]
        t = 0.5 if gb == ga else (level - ga) / (gb - ga)
        t = min(max(t, 0.0), 1.0)
        x = re[j0] + t * (re[j1] - re[j0])
        y = im[i0] + t * (im[i1] - im[i0])
        return complex(x, y)

    # edge keys: ("h", i, j) joins (i, j)-(i, j+1); ("v", i, j) joins (i, j)-(i+1, j)
    points = {}
    segments = []

    def edge_point(kind, i, j):
        key = (kind, i, j)
        if key not in points:
            if kind == "h":
                points[key] = interp(i, j, i, j + 1)
            else:
                points[key] = interp(i, j, i + 1, j)
        return key

    for i in range(region.n_im - 1):
        for j in range(region.n_re - 1):
            # bool() casts matter: numpy bools add as logical or
            b00 = bool(inside[i, j])
            b10 = bool(inside[i, j + 1])
            b11 = bool(inside[i + 1, j + 1])
            b01 = bool(inside[i + 1, j])
            count = int(b00) + int(b10) + int(b11) + int(b01)
            if count in (0, 4):
                continue
            bottom = ("h", i, j)
            top = ("h", i + 1, j)
            left = ("v", i, j)
            right = ("v", i, j + 1)
            if count in (1, 3):
                flag = count == 1
                if b00 == flag:
                    pairs = [(left, bottom)]
                elif b10 == flag:
                    pairs = [(bottom, right)]
                elif b11 == flag:
                    pairs = [(right, top)]
                else:
                    pairs = [(top, left)]
            elif b00 == b10:  # horizontal split
                pairs = [(left, right)]
            elif b00 == b01:  # vertical split
                pairs = [(bottom, top)]
            else:  # saddle; connect according to the center sample
                center_inside = 0.25 * (
                    g[i, j] + g[i, j + 1] + g[i + 1, j] + g[i + 1, j + 1]
                ) < level
                if b00 and b11:
                    pairs = ([(bottom, right), (top, left)] if center_inside
                             else [(left, bottom), (right, top)])
                else:
                    pairs = ([(left, bottom), (right, top)] if center_inside
                             else [(bottom, right), (top, left)])
            for a, b in pairs:
                segments.append((edge_point(*a), edge_point(*b)))

    return ContourSet(1.0 / pert.epsilon, tuple(_stitch(segments, points)))


def _stitch(segments, points):
    """Join segments sharing grid edges into polylines (closed loops repeat
    the first vertex)."""
    adj = {}
    for idx, (a, b) in enumerate(segments):
        adj.setdefault(a, []).append(idx)
        adj.setdefault(b, []).append(idx)
    used = [False] * len(segments)
    polylines = []
    for start in range(len(segments)):
        if used[start]:
            continue
        used[start] = True
        chain = list(segments[start])
        # extend forward then backward
        for endpos in (True, False):
            while True:
                tip = chain[-1] if endpos else chain[0]
                nxt = None
                for idx in adj[tip]:
                    if not used[idx]:
                        nxt = idx
                        break
                if nxt is None:
                    break
                used[nxt] = True
                a, b = segments[nxt]
                other = b if a == tip else a
                if endpos:
                    chain.append(other)
                else:
                    chain.insert(0, other)
        # closed loops revisit their head edge, so chain[0] == chain[-1] there
        polylines.append(np.array([points[k] for k in chain]))
    polylines.sort(key=lambda p: (p[0].real, p[0].imag, len(p)))
    return polylines
