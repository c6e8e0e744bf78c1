"""Lattice paths for the exclusion process with k particles on n sites.

A configuration gamma in {0,1}^n with k ones is encoded by the path

    eta(x) = sum_{z <= x} gamma(z) - x*k/n,   0 <= x <= n,

stored exactly as the integer vector ``n*eta`` (increments are n-k at an
occupied site and -k at an empty one).  Paths are compared pointwise: the top
extremal path carries all particles packed to the left and the bottom one all
particles packed to the right.  Pointwise min and max of two paths are again
paths (the path space is a distributive lattice), which is checked on
construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

__all__ = [
    "LatticePath",
    "extremal_paths",
    "lattice_min",
    "lattice_max",
    "path_leq",
    "hypergeometric_marginal",
    "eta_variance",
    "BadSetVerdict",
    "in_bad_set",
    "bad_window_length",
    "skeleton_path",
    "parse_path",
    "format_path",
]


@dataclass(frozen=True)
class LatticePath:
    """Integer vector n*eta(0..n) for a k-particle configuration on n sites."""

    n: int
    k: int
    scaled: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.scaled) != self.n + 1 or self.scaled[0] != 0 or self.scaled[-1] != 0:
            raise ValueError("path must have n+1 entries pinned to 0 at both ends")
        for x in range(self.n):
            step = self.scaled[x + 1] - self.scaled[x]
            if step not in (self.n - self.k, -self.k):
                raise ValueError(f"increment {step} at x={x + 1} is not in "
                                 f"{{{self.n - self.k}, {-self.k}}}")

    @staticmethod
    def from_occupancy(gamma: tuple[int, ...]) -> "LatticePath":
        n = len(gamma)
        k = sum(gamma)
        scaled = [0]
        for x, g in enumerate(gamma, start=1):
            scaled.append(scaled[-1] + (n - k if g else -k))
        return LatticePath(n=n, k=k, scaled=tuple(scaled))

    def occupancy(self) -> tuple[int, ...]:
        # increments degenerate to 0 for k in {0, n}; compare against n-k
        # rather than 0 so the full configuration survives the round trip
        if self.k == 0:
            return (0,) * self.n
        return tuple(1 if self.scaled[x + 1] - self.scaled[x] == self.n - self.k
                     else 0 for x in range(self.n))

    def value(self, x: int) -> Fraction:
        return Fraction(self.scaled[x], self.n)

    def float_values(self) -> np.ndarray:
        return np.asarray(self.scaled, dtype=np.float64) / self.n


def extremal_paths(n: int, k: int) -> tuple[LatticePath, LatticePath]:
    """(top, bottom): n*top(x) = min((n-k)x, k(n-x)), n*bottom(x) = -n*top(n-x) mirrored.

    The top path packs the particles on the left, the bottom on the right.
    """
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    top = tuple(min((n - k) * x, k * (n - x)) for x in range(n + 1))
    bottom = tuple(max(-k * x, (n - k) * (x - n)) for x in range(n + 1))
    return (LatticePath(n=n, k=k, scaled=top), LatticePath(n=n, k=k, scaled=bottom))


def _check_compatible(a: LatticePath, b: LatticePath) -> None:
    if (a.n, a.k) != (b.n, b.k):
        raise ValueError("paths live in different spaces")


def lattice_min(a: LatticePath, b: LatticePath) -> LatticePath:
    """Pointwise minimum; membership in the path space is revalidated."""
    _check_compatible(a, b)
    return LatticePath(n=a.n, k=a.k,
                       scaled=tuple(min(u, v) for u, v in zip(a.scaled, b.scaled)))


def lattice_max(a: LatticePath, b: LatticePath) -> LatticePath:
    """Pointwise maximum; membership in the path space is revalidated."""
    _check_compatible(a, b)
    return LatticePath(n=a.n, k=a.k,
                       scaled=tuple(max(u, v) for u, v in zip(a.scaled, b.scaled)))


def path_leq(a: LatticePath, b: LatticePath) -> bool:
    """True iff ``a`` lies pointwise at or below ``b``."""
    _check_compatible(a, b)
    return all(u <= v for u, v in zip(a.scaled, b.scaled))


def hypergeometric_marginal(n: int, k: int, x: int) -> list[tuple[Fraction, Fraction]]:
    """Exact law of eta(x) under the uniform measure.

    Under uniform occupancy the prefix count m = #particles in 1..x is
    hypergeometric, P(m) = C(x,m) C(n-x,k-m) / C(n,k), and eta(x) = m - x*k/n.
    Returns (eta value, probability) pairs in increasing value order.
    """
    if not 0 <= x <= n:
        raise ValueError(f"need 0 <= x <= n, got x={x}")
    denom = math.comb(n, k)
    rows = []
    for m in range(max(0, x - (n - k)), min(x, k) + 1):
        prob = Fraction(math.comb(x, m) * math.comb(n - x, k - m), denom)
        rows.append((Fraction(n * m - x * k, n), prob))
    return rows


def write_marginal_csv(rows: list[tuple[Fraction, Fraction]], path) -> None:
    with open(path, "w") as fh:
        fh.write("value,numerator,denominator\n")
        for value, prob in rows:
            fh.write(f"{float(value)!r},{prob.numerator},{prob.denominator}\n")


def eta_variance(n: int, k: int, x: int) -> Fraction:
    """Exact Var(eta(x)) under uniform occupancy: x k (n-x)(n-k) / (n^2 (n-1))."""
    return Fraction(x * k * (n - x) * (n - k), n * n * (n - 1))


def bad_window_length(n: int, k: int) -> int:
    """ceil(2 (n/k) (log k)^2), the affine-window length of the bad set (natural log)."""
    return math.ceil(2.0 * (n / k) * math.log(k) ** 2)


@dataclass(frozen=True)
class BadSetVerdict:
    bad: bool
    reason: str | None
    # the witness is a site for the height clause, a window [a, b] for the
    # affine clause, and None otherwise
    witness: tuple[int, ...] | None = None


def in_bad_set(path: LatticePath, *, threshold_scale: float = 1.0) -> BadSetVerdict:
    """Membership in the bad set of atypically flat or tall paths.

    A path is bad if max_x |eta(x)| >= sqrt(k) log k, or if some closed window
    [a, a + w] with w = ceil(2 (n/k)(log k)^2) has all increments equal.
    Windows longer than the path cannot fire.  For k < 2 both thresholds
    degenerate (log k <= 0), so every path is reported bad with an explicit
    reason rather than raising.
    """
    n, k = path.n, path.k
    if k < 2:
        return BadSetVerdict(bad=True, reason="k < 2: height threshold sqrt(k) log k "
                                               "is nonpositive, every path is bad")
    height = math.sqrt(k) * math.log(k) * threshold_scale
    vals = np.abs(np.asarray(path.scaled, dtype=np.float64)) / n
    x_star = int(np.argmax(vals))
    if vals[x_star] >= height:
        return BadSetVerdict(bad=True, reason="height", witness=(x_star,))
    w = bad_window_length(n, k)
    if w <= n:
        steps = np.diff(np.asarray(path.scaled))
        for a in range(0, n - w + 1):
            window = steps[a : a + w]
            if (window == window[0]).all():
                return BadSetVerdict(bad=True, reason="affine", witness=(a, a + w))
    return BadSetVerdict(bad=False, reason=None)


def skeleton_path(path: LatticePath, cuts: tuple[int, ...]) -> tuple[int, ...]:
    """Scaled values n*eta(x_i) at the cut positions."""
    return tuple(path.scaled[x] for x in cuts)


def parse_path(text: str) -> LatticePath:
    """Parse an occupancy string such as ``"0101"``."""
    if not text or any(c not in "01" for c in text):
        raise ValueError(f"not an occupancy string: {text!r}")
    return LatticePath.from_occupancy(tuple(int(c) for c in text))


def format_path(path: LatticePath) -> str:
    return "".join(str(g) for g in path.occupancy())
