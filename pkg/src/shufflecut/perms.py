"""Permutations of {1..n}, their height fields, and the induced partial order.

A permutation sigma is stored in one-line notation: ``line[x-1]`` is the label
occupying position ``x`` (positions and labels are 1-based in all formulas,
0-based in storage).

The height field of sigma is

    h(x, y) = #{z <= x : sigma(z) <= y} - x*y/n,   0 <= x, y <= n,

stored exactly as the integer grid ``n*h``.  The partial order used throughout
this package compares height surfaces pointwise:

    a <= b  iff  h_a(x, y) <= h_b(x, y) for all (x, y),

so "larger" means "higher surface".  The identity has the pointwise highest
surface (h_id(x,y) = min(x,y) - xy/n) and is the unique maximum; the reversal
x -> n+1-x has the pointwise lowest surface and is the unique minimum.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .paths import LatticePath

__all__ = [
    "Permutation",
    "HeightField",
    "Comparison",
    "BlockPartition",
    "SkeletonGrid",
    "SemiSkeleton",
    "height_field",
    "compare",
    "leq",
    "skeleton",
    "semi_skeleton",
    "block_sort",
    "interpolated_semi_skeleton",
    "to_exclusion",
    "volume",
    "parse_permutation",
    "format_permutation",
]


@dataclass(frozen=True)
class Permutation:
    """A permutation of {1..n} in one-line notation.

    >>> Permutation((3, 1, 4, 2))(1)
    3
    """

    line: tuple[int, ...]

    def __post_init__(self) -> None:
        n = len(self.line)
        if sorted(self.line) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {self.line}")

    @property
    def n(self) -> int:
        return len(self.line)

    def __call__(self, position: int) -> int:
        """Label at 1-based ``position``."""
        return self.line[position - 1]

    @staticmethod
    def identity(n: int) -> "Permutation":
        return Permutation(tuple(range(1, n + 1)))

    @staticmethod
    def reversal(n: int) -> "Permutation":
        """The minimum of the order: position x holds label n+1-x."""
        return Permutation(tuple(range(n, 0, -1)))

    def sorted_at(self, site: int) -> "Permutation":
        """Labels at positions site, site+1 put in increasing order."""
        a, b = self.line[site - 1], self.line[site]
        if a <= b:
            return self
        new = list(self.line)
        new[site - 1], new[site] = b, a
        return Permutation(tuple(new))

    def reverse_sorted_at(self, site: int) -> "Permutation":
        """Labels at positions site, site+1 put in decreasing order."""
        a, b = self.line[site - 1], self.line[site]
        if a >= b:
            return self
        new = list(self.line)
        new[site - 1], new[site] = b, a
        return Permutation(tuple(new))

    def swapped_at(self, site: int) -> "Permutation":
        """Labels at positions site, site+1 exchanged."""
        new = list(self.line)
        new[site - 1], new[site] = new[site], new[site - 1]
        return Permutation(tuple(new))


class Comparison(Enum):
    LESS = "less"
    EQUAL = "equal"
    GREATER = "greater"
    INCOMPARABLE = "incomparable"


@dataclass(frozen=True)
class HeightField:
    """Integer grid of n*h(x, y) for x, y in 0..n."""

    n: int
    scaled: np.ndarray  # shape (n+1, n+1), int64, read-only

    def value(self, x: int, y: int) -> Fraction:
        return Fraction(int(self.scaled[x, y]), self.n)

    def float_grid(self) -> np.ndarray:
        return self.scaled / self.n

    def to_permutation(self) -> Permutation:
        """Invert via the second-difference identity.

        h(x,y) - h(x,y-1) - h(x-1,y) + h(x-1,y-1) + 1/n equals 1 exactly when
        sigma(x) = y and 0 otherwise, so the grid determines sigma.
        """
        s = self.scaled
        second = s[1:, 1:] - s[1:, :-1] - s[:-1, 1:] + s[:-1, :-1]  # n*(...) = n-1 or -1
        pos, lab = np.nonzero(second == self.n - 1)
        line = np.empty(self.n, dtype=np.int64)
        line[pos] = lab + 1
        return Permutation(tuple(int(v) for v in line))

    def to_csv(self, path) -> None:
        np.savetxt(path, self.scaled, fmt="%d", delimiter=",")


def height_field(p: Permutation) -> HeightField:
    """The height field of ``p`` as the exact integer grid of n*h."""
    n = p.n
    line = np.asarray(p.line)
    occ = (line[:, None] <= np.arange(1, n + 1)[None, :]).astype(np.int64)
    counts = np.zeros((n + 1, n + 1), dtype=np.int64)
    counts[1:, 1:] = np.cumsum(occ, axis=0)
    grid = n * counts - np.outer(np.arange(n + 1), np.arange(n + 1))
    grid.setflags(write=False)
    return HeightField(n=n, scaled=grid)


def compare(a: Permutation, b: Permutation) -> Comparison:
    """Four-way comparison in the pointwise height-surface order.

    ``LESS`` means the surface of ``a`` is everywhere at or below that of
    ``b`` (and not equal); the identity is the maximum of this order.
    """
    if a.n != b.n:
        raise ValueError("sizes differ")
    diff = height_field(a).scaled - height_field(b).scaled
    above = bool((diff > 0).any())
    below = bool((diff < 0).any())
    if not above and not below:
        return Comparison.EQUAL
    if not above:
        return Comparison.LESS
    if not below:
        return Comparison.GREATER
    return Comparison.INCOMPARABLE


def leq(a: Permutation, b: Permutation) -> bool:
    """True iff the height surface of ``a`` is pointwise at or below ``b``'s."""
    return compare(a, b) in (Comparison.LESS, Comparison.EQUAL)


@dataclass(frozen=True)
class BlockPartition:
    """Cut positions x_i = ceil(i*n/K) for i = 0..K, partitioning 1..n into K blocks."""

    n: int
    num_blocks: int

    def __post_init__(self) -> None:
        if not 1 <= self.num_blocks <= self.n:
            raise ValueError(f"need 1 <= K <= n, got K={self.num_blocks}, n={self.n}")

    @property
    def cuts(self) -> tuple[int, ...]:
        k = self.num_blocks
        return tuple(-((-i * self.n) // k) for i in range(k + 1))

    @property
    def block_sizes(self) -> tuple[int, ...]:
        c = self.cuts
        return tuple(c[i + 1] - c[i] for i in range(self.num_blocks))

    def blocks(self) -> list[range]:
        """1-based position ranges (x_{i-1}, x_i]."""
        c = self.cuts
        return [range(c[i] + 1, c[i + 1] + 1) for i in range(self.num_blocks)]


@dataclass(frozen=True)
class SkeletonGrid:
    """Integer grid of n*h(x_i, x_j) for i, j in 0..K (boundary rows are zero)."""

    n: int
    partition: BlockPartition
    scaled: np.ndarray  # shape (K+1, K+1), int64

    def to_csv(self, path) -> None:
        np.savetxt(path, self.scaled, fmt="%d", delimiter=",")


@dataclass(frozen=True)
class SemiSkeleton:
    """Integer grid of n*h(x, x_j) for x in 0..n, j in 0..K."""

    n: int
    partition: BlockPartition
    scaled: np.ndarray  # shape (n+1, K+1), int64

    def to_csv(self, path) -> None:
        np.savetxt(path, self.scaled, fmt="%d", delimiter=",")


def skeleton(p: Permutation, bp: BlockPartition) -> SkeletonGrid:
    if p.n != bp.n:
        raise ValueError("sizes differ")
    cuts = np.asarray(bp.cuts)
    grid = height_field(p).scaled[np.ix_(cuts, cuts)].copy()
    grid.setflags(write=False)
    return SkeletonGrid(n=p.n, partition=bp, scaled=grid)


def semi_skeleton(p: Permutation, bp: BlockPartition) -> SemiSkeleton:
    if p.n != bp.n:
        raise ValueError("sizes differ")
    cuts = np.asarray(bp.cuts)
    grid = height_field(p).scaled[:, cuts].copy()
    grid.setflags(write=False)
    return SemiSkeleton(n=p.n, partition=bp, scaled=grid)


def volume(sk: SkeletonGrid) -> Fraction:
    """Sum of the interior skeleton heights, an exact rational."""
    interior = sk.scaled[1:-1, 1:-1]
    return Fraction(int(interior.sum()), sk.n)


def block_sort(p: Permutation, bp: BlockPartition) -> Permutation:
    """Sort the labels within each position block, keeping block contents.

    The result is the maximum of the order among permutations with the same
    label multiset in every position block (equivalently, the same height
    columns h(x_i, .) at the cut positions): listing each block's labels
    increasingly maximizes every prefix count at once.
    """
    line = list(p.line)
    for blk in bp.blocks():
        lo, hi = blk.start - 1, blk.stop - 1
        line[lo:hi] = sorted(line[lo:hi])
    return Permutation(tuple(line))


def interpolated_semi_skeleton(bp: BlockPartition, sk: SkeletonGrid) -> SemiSkeleton:
    """Closed form for the semi-skeleton of the block-sorted permutation.

    For x in [x_{i-1}, x_i] the column-j height is the minimum of two linear
    interpolations anchored at the neighbouring skeleton values:

        n*h(x, x_j) = min((n - x_j)(x - x_{i-1}) + s[i-1, j],
                          x_j (x_i - x)          + s[i, j]).

    Since one step can move h(., x_j) up by at most (n - x_j)/n and down by
    at most x_j/n, this grid is also the pointwise upper envelope of the
    semi-skeletons of all permutations sharing the skeleton ``sk``.
    """
    n, cuts, s = bp.n, bp.cuts, sk.scaled
    kk = bp.num_blocks
    out = np.zeros((n + 1, kk + 1), dtype=np.int64)
    for j in range(kk + 1):
        xj = cuts[j]
        for i in range(1, kk + 1):
            lo, hi = cuts[i - 1], cuts[i]
            xs = np.arange(lo, hi + 1, dtype=np.int64)
            left = (n - xj) * (xs - lo) + s[i - 1, j]
            right = xj * (hi - xs) + s[i, j]
            out[lo : hi + 1, j] = np.minimum(left, right)
    out.setflags(write=False)
    return SemiSkeleton(n=n, partition=bp, scaled=out)


def to_exclusion(p: Permutation, k: int) -> LatticePath:
    """Project to the occupancy of the k smallest labels.

    gamma(x) = 1 iff sigma(x) <= k; the resulting lattice path is row y = k of
    the height field, so the projection is monotone for the surface orders.
    """
    if not 0 <= k <= p.n:
        raise ValueError(f"need 0 <= k <= n, got k={k}")
    return LatticePath.from_occupancy(tuple(1 if v <= k else 0 for v in p.line))


def parse_permutation(text: str) -> Permutation:
    """Parse one-line notation, e.g. ``"3 1 4 2"``."""
    return Permutation(tuple(int(tok) for tok in text.split()))


def format_permutation(p: Permutation) -> str:
    return " ".join(str(v) for v in p.line)


def all_permutations(n: int):
    """All permutations of {1..n} in lexicographic order of one-line notation."""
    for line in itertools.permutations(range(1, n + 1)):
        yield Permutation(line)
