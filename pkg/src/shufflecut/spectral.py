"""Spectral data for the nearest-neighbor walk on a segment, and the bounds
built from it: expected-height decay, mixing-time upper bounds, survival of a
killed pair of walkers, and a second-moment lower bound on distance.
"""

from __future__ import annotations

import math
from functools import lru_cache

import numpy as np

from .exact import DistributionVector
from .inequalities import scaled_heights
from .paths import LatticePath
from .perms import Permutation, height_field

__all__ = [
    "gap_eigenvalue",
    "eigenvalue",
    "spectrum",
    "sine_eigenvector",
    "heat_profile",
    "heat_profile_direct",
    "expected_surface_profile",
    "expected_path_profile",
    "surface_upper_bound",
    "surface_lower_bound_identity",
    "particle_mean_bound",
    "wilson_upper_bound",
    "wilson_upper_bound_particles",
    "killed_pair_survival",
    "killed_pair_survival_direct",
    "pair_survival_bound",
    "fourier_statistic",
    "uniform_fourier_variance",
    "fourier_moments",
    "chebyshev_tv_lower",
]


def gap_eigenvalue(n: int) -> float:
    """Smallest positive eigenvalue of the negated walk generator."""
    return 2.0 * (1.0 - math.cos(math.pi / n))


def eigenvalue(n: int, i: int) -> float:
    if not 1 <= i <= n - 1:
        raise ValueError("index out of range")
    return 2.0 * (1.0 - math.cos(i * math.pi / n))


def spectrum(n: int) -> np.ndarray:
    return 2.0 * (1.0 - np.cos(np.arange(1, n) * math.pi / n))


def sine_eigenvector(n: int, i: int) -> np.ndarray:
    """Unit eigenvector over interior sites x = 1..n-1."""
    x = np.arange(1, n)
    return math.sqrt(2.0 / n) * np.sin(i * math.pi * x / n)


@lru_cache(maxsize=32)
def _sine_matrix(n: int) -> np.ndarray:
    grid = np.outer(np.arange(1, n), np.arange(1, n)) * (math.pi / n)
    return np.sin(grid)


def heat_profile(n: int, init: np.ndarray, t: float) -> np.ndarray:
    """Solution at time t of df/dt = f(x+1) + f(x-1) - 2f(x) on x = 1..n-1
    with f(0) = f(n) = 0, from the given interior profile."""
    init = np.asarray(init, dtype=float)
    if init.shape != (n - 1,):
        raise ValueError("init must cover interior sites 1..n-1")
    s = _sine_matrix(n)
    coeffs = s @ init
    return (2.0 / n) * (s @ (np.exp(-spectrum(n) * t) * coeffs))


def _dirichlet_laplacian(n: int) -> np.ndarray:
    m = np.zeros((n - 1, n - 1))
    idx = np.arange(n - 1)
    m[idx, idx] = -2.0
    m[idx[:-1], idx[:-1] + 1] = 1.0
    m[idx[:-1] + 1, idx[:-1]] = 1.0
    return m


def heat_profile_direct(n: int, init: np.ndarray, t: float) -> np.ndarray:
    """Same solution via the matrix exponential, as an independent route."""
    from scipy.linalg import expm

    init = np.asarray(init, dtype=float)
    return expm(t * _dirichlet_laplacian(n)) @ init


def expected_surface_profile(n: int, y: int, t: float,
                             start: Permutation) -> np.ndarray:
    """E[h_t(x, y)] over x = 1..n-1: the mean surface obeys the segment heat
    equation in x level by level."""
    init = height_field(start).scaled[1:n, y] / n
    return heat_profile(n, init, t)


def expected_path_profile(n: int, k: int, t: float,
                          start: LatticePath) -> np.ndarray:
    """E[eta_t(x)] over x = 1..n-1 for the k-particle dynamics."""
    init = np.asarray(start.scaled[1:n], dtype=float) / n
    return heat_profile(n, init, t)


def surface_upper_bound(n: int, y: int, t: float) -> float:
    """Uniform-in-x bound on |E[h_t(x, y)]| from any start."""
    return 4.0 * min(y, n - y) * math.exp(-gap_eigenvalue(n) * t)


def surface_lower_bound_identity(n: int, x: int, y: int, t: float) -> float:
    """Matching lower bound for the start with the maximal surface."""
    return (min(y, n - y) / math.pi) * math.sin(math.pi * x / n) \
        * math.exp(-gap_eigenvalue(n) * t)


def particle_mean_bound(n: int, k: int, t: float) -> float:
    """max_x E[eta_t(x)] <= 4k exp(-gap t) from any start."""
    return 4.0 * k * math.exp(-gap_eigenvalue(n) * t)


def wilson_upper_bound(n: int, t: float) -> float:
    """Upper bound on the worst-start distance to uniform for permutations."""
    return min(1.0, 10.0 * n * math.exp(-gap_eigenvalue(n) * t))


def wilson_upper_bound_particles(n: int, k: int, t: float) -> float:
    return min(1.0, 10.0 * k * math.exp(-gap_eigenvalue(n) * t))


# --- killed pair of walkers ------------------------------------------------
#
# Two tagged positions perform independent +-1 jumps at rate 1 each, blocked
# at the ends of {1..n}, and the pair is killed when one jumps onto the
# other.  Reflection eigenvectors cos(i pi (x - 1/2) / n) antisymmetrize into
# eigenfunctions of the killed pair (strictly ordered walkers cannot cross
# without colliding first).

def _reflecting_eigenvector(n: int, i: int) -> np.ndarray:
    x = np.arange(1, n + 1)
    return np.cos(i * math.pi * (x - 0.5) / n)


def killed_pair_survival(n: int, x0: int, y0: int, t: float) -> float:
    """P[not yet killed at t] for the pair started at x0 < y0, closed form."""
    if not 1 <= x0 < y0 <= n:
        raise ValueError("need 1 <= x0 < y0 <= n")
    phi = np.array([_reflecting_eigenvector(n, i) for i in range(n)])
    lam = 2.0 * (1.0 - np.cos(np.arange(n) * math.pi / n))
    total = 0.0
    for i in range(n):
        for j in range(i + 1, n):
            # u(x, y) = phi_i(x) phi_j(y) - phi_i(y) phi_j(x) over x < y
            u = np.outer(phi[i], phi[j]) - np.outer(phi[j], phi[i])
            upper = np.triu(u, k=1)
            norm_sq = n * n * (2.0 if i == 0 else 1.0) / 4.0
            weight = u[x0 - 1, y0 - 1] * upper.sum() / norm_sq
            total += weight * math.exp(-(lam[i] + lam[j]) * t)
    return total


def _pair_states(n: int) -> list[tuple[int, int]]:
    return [(x, y) for x in range(1, n + 1) for y in range(x + 1, n + 1)]


def killed_pair_generator(n: int) -> tuple[list[tuple[int, int]], np.ndarray]:
    """Sub-Markov generator on ordered pairs; collision moves leak mass."""
    states = _pair_states(n)
    pos = {s: i for i, s in enumerate(states)}
    q = np.zeros((len(states), len(states)))
    for s, i in pos.items():
        x, y = s
        for nx, ny in ((x - 1, y), (x + 1, y), (x, y - 1), (x, y + 1)):
            if not (1 <= nx <= n and 1 <= ny <= n):
                continue  # blocked at the boundary: no rate spent
            q[i, i] -= 1.0
            if nx < ny:
                q[i, pos[(nx, ny)]] += 1.0
            # nx == ny is the killing event: diagonal only
    return states, q


def killed_pair_survival_direct(n: int, x0: int, y0: int, t: float) -> float:
    """Survival via the matrix exponential of the explicit generator."""
    from scipy.linalg import expm

    states, q = killed_pair_generator(n)
    row = states.index((x0, y0))
    return float(expm(t * q)[row].sum())


def pair_survival_bound(n: int, t: float) -> float:
    """Claimed uniform bound on pair survival."""
    return min(1.0, 10.0 * math.exp(-gap_eigenvalue(n) * t))


# --- Fourier statistic on particle paths ------------------------------------

def fourier_statistic(path: LatticePath, i: int = 1) -> float:
    """a_i(eta) = sum over interior x of eta(x) sin(i pi x / n)."""
    vals = np.asarray(path.scaled[1:path.n], dtype=float) / path.n
    x = np.arange(1, path.n)
    return float(vals @ np.sin(i * math.pi * x / path.n))


def uniform_fourier_variance(n: int, k: int, i: int = 1) -> float:
    """Variance of a_i under the uniform law on k-particle configurations.

    Cov(eta(x), eta(x')) = k (n-k) x (n-x') / (n^2 (n-1)) for x <= x'.
    """
    x = np.arange(1, n)
    w = np.sin(i * math.pi * x / n)
    cov = np.minimum.outer(x, x) * (n - np.maximum.outer(x, x))
    cov = cov * (k * (n - k) / (n * n * (n - 1.0)))
    return float(w @ cov @ w)


def fourier_moments(dist: DistributionVector, i: int = 1) -> tuple[float, float]:
    """Mean and variance of a_i under a law on a configuration space."""
    space = dist.space
    if space.model != "sep":
        raise ValueError("fourier statistic lives on configuration spaces")
    n = space.n
    heights = scaled_heights(space)[:, : n - 1] / n
    w = np.sin(i * math.pi * np.arange(1, n) / n)
    vals = heights @ w
    mean = float(vals @ dist.probs)
    var = float(((vals - mean) ** 2) @ dist.probs)
    return mean, var


def chebyshev_tv_lower(mean_p: float, var_p: float, var_mu: float) -> float:
    """Lower bound on TV distance from a statistic with zero uniform mean:
    1 - 2 (var_p + var_mu) / mean_p^2, clamped to [0, 1]."""
    if mean_p == 0.0:
        return 0.0
    val = 1.0 - 2.0 * (var_p + var_mu) / (mean_p * mean_p)
    return max(0.0, min(1.0, val))
