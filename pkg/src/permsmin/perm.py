"""Permutations on {1..N}: cycle decomposition, the block-ordering
conjugator, uniform sampling, and the cycle-length functional.

The public data model is 1-based: a permutation is its image line
(sigma(1), ..., sigma(N)), which is also the serialization format
("2 1 3" for the transposition of 1 and 2 in S_3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class PermutationError(ValueError):
    """Invalid permutation data (non-bijection, bad index, empty)."""


@dataclass(frozen=True)
class Permutation:
    """A permutation stored by its 1-based image tuple."""

    image: tuple[int, ...]

    def __post_init__(self):
        n = len(self.image)
        if n == 0:
            raise PermutationError("empty permutation")
        seen = [False] * (n + 1)
        for v in self.image:
            if not isinstance(v, int) or not (1 <= v <= n):
                raise PermutationError(f"image value {v!r} outside 1..{n}")
            if seen[v]:
                raise PermutationError(f"not a bijection: index {v} appears twice")
            seen[v] = True

    @property
    def n(self) -> int:
        return len(self.image)

    def __call__(self, i: int) -> int:
        return self.image[i - 1]

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    @classmethod
    def from_cycles(cls, n: int, cycles) -> "Permutation":
        """Build sigma from explicit cycles; unmentioned points are fixed.

        >>> Permutation.from_cycles(3, [(1, 2)]).image
        (2, 1, 3)
        """
        img = list(range(1, n + 1))
        for cyc in cycles:
            for a, b in zip(cyc, tuple(cyc[1:]) + (cyc[0],)):
                img[a - 1] = b
        p = cls(tuple(img))
        return p

    @classmethod
    def from_line(cls, text: str) -> "Permutation":
        """Parse the single-line space-separated image format."""
        parts = text.split()
        if not parts:
            raise PermutationError("empty permutation line")
        try:
            img = tuple(int(p) for p in parts)
        except ValueError as exc:
            raise PermutationError(f"non-integer image entry: {exc}") from exc
        return cls(img)

    def to_line(self) -> str:
        return " ".join(str(v) for v in self.image)

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for i, v in enumerate(self.image, start=1):
            inv[v - 1] = i
        return Permutation(tuple(inv))

    def compose(self, other: "Permutation") -> "Permutation":
        """(self . other)(i) = self(other(i))."""
        if self.n != other.n:
            raise PermutationError("size mismatch in composition")
        return Permutation(tuple(self.image[v - 1] for v in other.image))


@dataclass(frozen=True)
class CycleDecomposition:
    """Cycles of a permutation, each stored in orbit order from its
    smallest element, ranked by decreasing length with ties going to the
    smallest start index."""

    cycles: tuple[tuple[int, ...], ...]
    lengths: tuple[int, ...]
    starts: tuple[int, ...]

    @property
    def n(self) -> int:
        return sum(self.lengths)

    @property
    def count(self) -> int:
        return len(self.cycles)


def decompose(sigma: Permutation) -> CycleDecomposition:
    """Orbit-trace the cycles of sigma.

    >>> decompose(Permutation((2, 1, 3))).cycles
    ((1, 2), (3,))
    """
    n = sigma.n
    seen = [False] * (n + 1)
    cycles = []
    for start in range(1, n + 1):
        if seen[start]:
            continue
        orbit = [start]
        seen[start] = True
        nxt = sigma(start)
        while nxt != start:
            orbit.append(nxt)
            seen[nxt] = True
            nxt = sigma(nxt)
        cycles.append(tuple(orbit))
    cycles.sort(key=lambda c: (-len(c), c[0]))
    return CycleDecomposition(
        cycles=tuple(cycles),
        lengths=tuple(len(c) for c in cycles),
        starts=tuple(c[0] for c in cycles),
    )


def ordering_permutation(dec: CycleDecomposition) -> Permutation:
    """The conjugator tau that lists the cycles block by block: position
    p maps to the p-th element of the concatenated orbit listing, so
    conjugating by tau turns sigma into the canonical block-cyclic
    permutation with the same length profile."""
    flat = tuple(v for cyc in dec.cycles for v in cyc)
    return Permutation(flat)


def ordered_shift(dec: CycleDecomposition) -> Permutation:
    """The canonical block-cyclic permutation with dec's length profile:
    (1..N1)(N1+1..N1+N2)... in consecutive blocks."""
    img = []
    offset = 0
    for ln in dec.lengths:
        img.extend(list(range(offset + 2, offset + ln + 1)) + [offset + 1])
        offset += ln
    return Permutation(tuple(img))


def sample_uniform(n: int, rng: np.random.Generator) -> Permutation:
    """Uniform draw from S_n via the back-to-front exchange shuffle of
    the generator; deterministic given the stream state."""
    if n < 1:
        raise PermutationError("sample_uniform needs n >= 1")
    img = rng.permutation(n) + 1
    return Permutation(tuple(int(v) for v in img))


def l_functional(dec: CycleDecomposition, k: float) -> float:
    """sum of exp(-k * cycle length) over the cycles; lies in (0, K] and
    between K * exp(-k N / K) and the cycle count K."""
    if not (k > 0):
        raise ValueError("l_functional needs k > 0")
    return float(sum(math.exp(-k * ln) for ln in dec.lengths))


def apply(sigma: Permutation, x) -> np.ndarray:
    """Left-multiply by the permutation matrix: row i picks x[sigma(i)]."""
    x = np.asarray(x)
    if x.shape != (sigma.n,):
        raise ValueError(f"vector length {x.shape} does not match size {sigma.n}")
    idx = np.asarray(sigma.image, dtype=int) - 1
    return x[idx]
