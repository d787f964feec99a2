"""Log-magnitude/phase arithmetic and stable exponential sums.

Products of cycle entries reach magnitudes like exp(+-O(N)), which
overflows doubles well before cycle length 1000.  Everything that
multiplies entries therefore carries (log-magnitude, phase) pairs, and
sums of nonnegative exponentials go through log-sum-exp with an explicit
running maximum.  A log-magnitude of -inf encodes an exact zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TAU = 2.0 * math.pi
NEG_INF = -math.inf


def wrap_phase(phi: float) -> float:
    """Reduce an angle to the interval (-pi, pi]."""
    p = math.remainder(phi, TAU)
    if p <= -math.pi:
        p += TAU
    return p


@dataclass(frozen=True)
class LogComplex:
    """A complex number stored as (log|z|, arg z).

    log_mag == -inf encodes zero; the phase of a zero is kept at 0.0.
    Multiplication adds log-magnitudes and wraps phases, so chained
    products of thousands of factors never overflow.
    """

    log_mag: float
    phase: float

    @classmethod
    def from_complex(cls, z: complex) -> "LogComplex":
        z = complex(z)
        if z == 0:
            return cls(NEG_INF, 0.0)
        return cls(math.log(abs(z)), math.atan2(z.imag, z.real))

    def to_complex(self) -> complex:
        if self.log_mag == NEG_INF:
            return 0j
        m = math.exp(self.log_mag)
        return complex(m * math.cos(self.phase), m * math.sin(self.phase))

    def __mul__(self, other: "LogComplex") -> "LogComplex":
        if self.log_mag == NEG_INF or other.log_mag == NEG_INF:
            return LogComplex(NEG_INF, 0.0)
        return LogComplex(
            self.log_mag + other.log_mag, wrap_phase(self.phase + other.phase)
        )

    def conjugate(self) -> "LogComplex":
        return LogComplex(self.log_mag, wrap_phase(-self.phase))

    @property
    def abs_sq_log(self) -> float:
        """log |z|^2."""
        return 2.0 * self.log_mag


def logsumexp(values) -> float:
    """log(sum(exp(values))) over a 1-d array; -inf for an empty sum."""
    a = np.asarray(values, dtype=float)
    if a.size == 0:
        return NEG_INF
    m = float(np.max(a))
    if m == NEG_INF or m == math.inf:
        return m
    return m + math.log(float(np.sum(np.exp(a - m))))


def logaddexp(a: float, b: float) -> float:
    """Scalar log(exp(a) + exp(b)) without intermediate overflow."""
    if a == NEG_INF:
        return b
    if b == NEG_INF:
        return a
    hi, lo = (a, b) if a >= b else (b, a)
    return hi + math.log1p(math.exp(lo - hi))


def log1p_exp(a: float) -> float:
    """log(1 + exp(a)), i.e. logaddexp(0, a)."""
    return logaddexp(0.0, a)


def log_abs2_one_minus(log_mag: float, phase: float) -> float:
    """log |1 - z|^2 for z in log-magnitude/phase form.

    Written with expm1 and a half-angle sine so near-cancellation
    (z close to 1) keeps full relative precision; exact cancellation
    returns -inf.
    """
    if log_mag == NEG_INF:
        return 0.0
    if log_mag > 0.0:
        # |1 - z|^2 = |z|^2 * |1 - 1/z|^2
        return 2.0 * log_mag + log_abs2_one_minus(-log_mag, -phase)
    phase = math.remainder(phase, TAU)  # exact cancellation needs arg 0
    r = math.expm1(log_mag)  # |z| - 1, exact as |z| -> 1
    s = math.sin(0.5 * phase)
    v = r * r + 4.0 * math.exp(log_mag) * s * s
    return math.log(v) if v > 0.0 else NEG_INF


def log_one_minus(log_mag: float, phase: float) -> LogComplex:
    """1 - z as a LogComplex, stable for |z| far from 1 on either side."""
    if log_mag == NEG_INF:
        return LogComplex(0.0, 0.0)
    if log_mag > 0.0:
        # 1 - z = (-z) * (1 - 1/z)
        inner = log_one_minus(-log_mag, -phase)
        return LogComplex(log_mag, wrap_phase(math.pi + phase)) * inner
    phase = math.remainder(phase, TAU)
    half = 0.5 * log_abs2_one_minus(log_mag, phase)
    if half == NEG_INF:
        return LogComplex(NEG_INF, 0.0)
    s = math.sin(0.5 * phase)
    re = -math.expm1(log_mag) + 2.0 * math.exp(log_mag) * s * s
    im = -math.exp(log_mag) * math.sin(phase)
    return LogComplex(half, math.atan2(im, re))


def scaled_complex_sum(log_mags: np.ndarray, units: np.ndarray) -> tuple[float, complex]:
    """Sum of exp(log_mags[j]) * units[j] as (log_scale, mantissa).

    The represented value is exp(log_scale) * mantissa.  units carries
    the phases (and is allowed to carry sub-unit magnitudes); terms more
    than ~700 nats below the largest underflow harmlessly.
    """
    log_mags = np.asarray(log_mags, dtype=float)
    if log_mags.size == 0:
        return NEG_INF, 0j
    m = float(np.max(log_mags))
    if m == NEG_INF:
        return NEG_INF, 0j
    mant = complex(np.sum(np.exp(log_mags - m) * units))
    return m, mant


def log_t_scan(xi) -> float:
    """log of sum_{1<=k<=m<=n} exp(xi[k] + ... + xi[m]) ... shifted form.

    Concretely: with partial sums S_m = xi[0] + ... + xi[m-1], returns
    log(sum over 1<=k<=m<=n of exp(S_m - S_{k-1} - xi-free...)).

    Implemented through the O(n) recursion Q_m = 1 + exp(xi_m) * Q_{m-1},
    accumulated entirely in the log domain, so walks drifting by
    thousands of nats stay finite.  Returns -inf for an empty walk.
    """
    lq = NEG_INF
    lt = NEG_INF
    for x in np.asarray(xi, dtype=float):
        lq = log1p_exp(x + lq)
        lt = logaddexp(lt, lq)
    return lt


def running_max_bands(log_mags: np.ndarray, width: float = 60.0) -> list[tuple[int, int, float]]:
    """Split indices into contiguous bands whose prefix-max log scale
    moves by at most `width`, for block-rescaled prefix sums.

    Returns (start, stop, scale) triples covering [0, n).
    """
    n = log_mags.size
    bands: list[tuple[int, int, float]] = []
    if n == 0:
        return bands
    prefmax = np.maximum.accumulate(log_mags)
    start = 0
    scale = float(prefmax[0])
    if scale == NEG_INF:
        # leading zeros: find the first finite scale, if any
        finite = np.nonzero(np.isfinite(prefmax))[0]
        if finite.size == 0:
            return [(0, n, 0.0)]
        scale = float(prefmax[finite[0]])
    for i in range(1, n):
        if prefmax[i] > scale + width:
            bands.append((start, i, scale))
            start = i
            scale = float(prefmax[i])
    bands.append((start, n, scale))
    return bands
