"""Random-walk functionals of the entry log-magnitudes.

The partial sums S_k of xi_l = 2 log|d_l| form a walk whose geometry
controls every bound on a cycle block: the maximal segmental gain M
drives the upper bound, the exponential segment sum T and the prefix
exponential sums U control the lower bound, and the ladder-epoch
excursion decomposition gives a pathwise bound on T.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .logdomain import NEG_INF, log1p_exp, log_t_scan, logaddexp, logsumexp
from .spectral import CycleDiagonal, SingularCycleError


@dataclass(frozen=True)
class WalkPath:
    """Partial sums S_0..S_N of a walk, with S_0 = 0."""

    s: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.s, dtype=float)
        if s.ndim != 1 or s.size < 1 or s[0] != 0.0:
            raise ValueError("walk needs a 1-d array starting at S_0 = 0")
        s.flags.writeable = False
        object.__setattr__(self, "s", s)

    @property
    def n(self) -> int:
        return self.s.size - 1

    @classmethod
    def from_increments(cls, xi) -> "WalkPath":
        xi = np.asarray(xi, dtype=float)
        s = np.zeros(xi.size + 1)
        np.cumsum(xi, out=s[1:])
        return cls(s)


@dataclass(frozen=True)
class ExcursionDecomposition:
    """Ladder epochs at depth c and the per-excursion data.

    epochs[i] is the i-th time the walk drops at least c below its value
    at the previous epoch; u_sums[i] is the exponential sum over the
    i-th completed excursion; r_max[m] is the running maximum excursion
    length; i_of[l] is the 1-based index of the excursion straddling l.
    An unfinished final excursion contributes no epoch.
    """

    c: float
    epochs: tuple[int, ...]
    u_sums: tuple[float, ...]
    r_max: tuple[int, ...]
    i_of: tuple[int, ...]


@dataclass(frozen=True)
class ExcursionBoundCheck:
    """Both sides of the pathwise excursion bound on the segment sum T.

    `vacuous` marks paths with no completed excursion, where the bound
    has nothing to say (reported as holding).
    """

    lhs: float
    rhs: float
    holds: bool
    vacuous: bool


def from_diagonal(d: CycleDiagonal) -> WalkPath:
    """The walk of one cycle block; shares the block's prefix array
    exactly, so exp(S_m - S_{k-1}) reproduces the squared products."""
    if d.has_zero:
        raise ValueError("walk undefined for zero entries")
    return WalkPath(np.array(d.log_prefix))


def m_functional(w: WalkPath) -> float:
    """Maximal segmental gain max_{1<=k<=m<=N} (S_m - S_k); nonnegative
    because k = m is allowed.  Single pass with a running minimum."""
    if w.n < 1:
        raise ValueError("empty walk")
    s1 = w.s[1:]
    return float(np.max(s1 - np.minimum.accumulate(s1)))


def t_functional_log(w: WalkPath) -> float:
    """log of the exponential segment sum over 1 <= k <= m <= N."""
    if w.n < 1:
        raise ValueError("empty walk")
    xi = np.diff(w.s)
    return log_t_scan(xi)


def t_functional(w: WalkPath) -> float:
    """sum over 1 <= k <= m <= N of exp(S_m - S_k), O(N) recursion."""
    return math.exp(t_functional_log(w))


def u_functionals(w: WalkPath) -> tuple[float, float]:
    """(U, U_hat): prefix exponential sum and its time reversal, both
    over l = 1..N-1.  They agree in law, not pathwise."""
    n = w.n
    if n < 1:
        return 0.0, 0.0
    body = w.s[1:n]
    lu = logsumexp(body)
    lu_hat = w.s[n] + logsumexp(-body) if n > 1 else NEG_INF
    u = math.exp(lu) if lu > NEG_INF else 0.0
    u_hat = math.exp(lu_hat) if lu_hat > NEG_INF else 0.0
    return u, u_hat


def x_functional_log(d: CycleDiagonal) -> float:
    """log of (1 + U)(1 + U_hat) / c0 for the cycle's walk; equals the
    rank-one inverse-norm functional rho1 exactly."""
    if d.singular:
        raise SingularCycleError("x functional undefined: singular cycle block")
    if d.has_zero:
        raise ValueError("x functional needs nonzero entries")
    n = d.n
    s = d.log_prefix
    body = s[1:n]
    lu = logsumexp(body) if n > 1 else NEG_INF
    lu_hat = s[n] + logsumexp(-body) if n > 1 else NEG_INF
    return log1p_exp(lu) + log1p_exp(lu_hat) - d.log_c0


def x_functional(d: CycleDiagonal) -> float:
    return math.exp(x_functional_log(d))


def ladder(w: WalkPath, c: float) -> ExcursionDecomposition:
    """Ladder-epoch decomposition at depth c >= 0.

    epoch i is the first time n > epoch_{i-1} with
    S_n - S_{epoch_{i-1}} <= -c (epoch_0 = 0); only epochs within 1..N
    count, so an unfinished final excursion is left open.
    """
    if c < 0:
        raise ValueError("ladder depth must be nonnegative")
    s = w.s
    n = w.n
    epochs: list[int] = []
    u_sums: list[float] = []
    r_max: list[int] = []
    last = 0
    best_len = 0
    while True:
        tail = s[last + 1 :] - s[last]
        hits = np.nonzero(tail <= -c)[0]
        if hits.size == 0:
            break
        k = last + 1 + int(hits[0])
        seg = s[last:k] - s[last]  # l = last .. k-1, includes exp(0)
        u_sums.append(math.exp(logsumexp(seg)))
        epochs.append(k)
        best_len = max(best_len, k - last)
        r_max.append(best_len)
        last = k
    bounds = np.asarray(epochs, dtype=int)
    i_of = tuple(int(v) for v in np.searchsorted(bounds, np.arange(1, n + 1), side="right") + 1)
    return ExcursionDecomposition(
        c=float(c),
        epochs=tuple(epochs),
        u_sums=tuple(u_sums),
        r_max=tuple(r_max),
        i_of=i_of,
    )


def k_constant(c: float) -> float:
    """The excursion-bound constant exp(-c)/(1 - exp(-c)) + exp(c)."""
    if not (c > 0):
        raise ValueError("k_constant needs c > 0")
    e = math.exp(-c)
    return e / (1.0 - e) + math.exp(c)


def excursion_bound_check(w: WalkPath, c: float) -> ExcursionBoundCheck:
    """Evaluate T <= K(c) * R * sum(U_i) pathwise.

    The unfinished final excursion contributes its partial exponential
    sum through N, and the running maximum R counts the gap from the
    last epoch to N as the final excursion's length.  Paths with no
    completed excursion are vacuous.
    """
    if not (c > 0):
        raise ValueError("excursion bound needs c > 0")
    log_t = t_functional_log(w)
    lhs = math.exp(log_t) if log_t < 709.0 else math.inf
    dec = ladder(w, c)
    if not dec.epochs:
        return ExcursionBoundCheck(lhs=lhs, rhs=math.inf, holds=True, vacuous=True)
    s = w.s
    n = w.n
    last = dec.epochs[-1]
    log_us = [math.log(u) for u in dec.u_sums]
    log_us.append(logsumexp(s[last : n + 1] - s[last]))  # partial, through N
    r = max(dec.r_max[-1], n - last)
    log_rhs = math.log(k_constant(c)) + math.log(r) + logsumexp(np.asarray(log_us))
    rhs = math.exp(log_rhs) if log_rhs < 709.0 else math.inf
    holds = log_t <= log_rhs + 1e-9  # additive log slack = relative slack
    return ExcursionBoundCheck(lhs=lhs, rhs=rhs, holds=bool(holds), vacuous=False)
