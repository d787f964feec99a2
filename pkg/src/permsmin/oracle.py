"""Independent dense reference implementations, for verification only.

Everything here works on explicit dense matrices in plain (non-log)
arithmetic and shares no code with the structured spectral module; a
size cap keeps the plain products inside double range.  The singular
value solver is a one-sided rotation scheme that diagonalizes the Gram
matrix implicitly, with the rotations applied in disjoint batches so a
sweep is a handful of vectorized operations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import perm as permmod
from .spectral import CycleDiagonal

DEFAULT_CAP = 256


class OracleCapExceeded(ValueError):
    """The dense oracle refuses matrices above its size cap."""


class OracleNonConvergence(RuntimeError):
    """The rotation sweep did not converge within the iteration cap."""


def _check_cap(n: int, cap: int = DEFAULT_CAP):
    if n > cap:
        raise OracleCapExceeded(f"dense oracle capped at {cap}, got n={n}")


def assemble(sigma: permmod.Permutation, d_full, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Dense D + M_sigma: A[i, j] = d_i [i == j] + [sigma(i) == j]."""
    n = sigma.n
    _check_cap(n, cap)
    d = np.asarray(d_full, dtype=complex)
    if d.shape != (n,):
        raise ValueError("diagonal length mismatch")
    a = np.diag(d).astype(complex)
    rows = np.arange(n)
    cols = np.asarray(sigma.image, dtype=int) - 1
    a[rows, cols] += 1.0
    return a


def assemble_cycle(d: CycleDiagonal, cap: int = DEFAULT_CAP) -> np.ndarray:
    """Dense single-cycle block D + U for a cycle diagonal."""
    n = d.n
    _check_cap(n, cap)
    sigma = permmod.Permutation(tuple(list(range(2, n + 1)) + [1]))
    return assemble(sigma, d.entries, cap=cap)


def _round_robin_pairs(n: int):
    """Round-robin tournament schedule: n-1 rounds of disjoint pairs
    covering every unordered pair exactly once (n padded to even)."""
    m = n + (n % 2)
    seats = list(range(m))
    for _ in range(m - 1):
        pairs = []
        for i in range(m // 2):
            a, b = seats[i], seats[m - 1 - i]
            if a < n and b < n:
                pairs.append((min(a, b), max(a, b)))
        yield pairs
        seats = [seats[0]] + [seats[-1]] + seats[1:-1]


def dense_smin(a: np.ndarray, cap: int = DEFAULT_CAP, max_sweeps: int = 60) -> float:
    """Smallest singular value by one-sided rotations on the columns.

    Column pairs are rotated until every scaled Gram off-diagonal entry
    |<ci, cj>| / (|ci| |cj|) falls below 1e-15, which keeps even tiny
    singular values at full relative accuracy.  Column norms are then
    the singular values.
    """
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("dense_smin needs a square matrix")
    _check_cap(n, cap)
    if n == 1:
        return float(abs(a[0, 0]))
    tol = 1e-15
    for _ in range(max_sweeps):
        worst = 0.0
        for pairs in _round_robin_pairs(n):
            if not pairs:
                continue
            p = np.array([i for i, _ in pairs])
            q = np.array([j for _, j in pairs])
            cp = a[:, p]
            cq = a[:, q]
            app = np.sum(np.abs(cp) ** 2, axis=0)
            aqq = np.sum(np.abs(cq) ** 2, axis=0)
            apq = np.sum(np.conj(cp) * cq, axis=0)
            denom = np.sqrt(app * aqq)
            active = denom > 0.0
            scaled = np.zeros_like(denom)
            scaled[active] = np.abs(apq[active]) / denom[active]
            worst = max(worst, float(np.max(scaled, initial=0.0)))
            rot = active & (np.abs(apq) > 0.0)
            if not np.any(rot):
                continue
            g = apq[rot]
            absg = np.abs(g)
            u = np.where(absg > 0, g / np.where(absg > 0, absg, 1.0), 1.0)
            tau = (aqq[rot] - app[rot]) / (2.0 * absg)
            t = np.sign(tau) / (np.abs(tau) + np.hypot(1.0, tau))
            t = np.where(tau == 0.0, 1.0, t)  # equal norms: 45 degrees
            cth = 1.0 / np.hypot(1.0, t)
            sth = t * cth
            # unitary 2x2: [[c, s u],[ -s conj(u), c]] applied on the right
            jp = p[rot]
            jq = q[rot]
            colp = a[:, jp]
            colq = a[:, jq]
            newp = cth * colp - (sth * np.conj(u)) * colq
            newq = (sth * u) * colp + cth * colq
            a[:, jp] = newp
            a[:, jq] = newq
        if worst < tol:
            norms = np.sqrt(np.sum(np.abs(a) ** 2, axis=0))
            return float(np.min(norms))
    raise OracleNonConvergence(f"rotation sweeps did not converge for n={n}")


def dense_singular_values(a: np.ndarray, cap: int = DEFAULT_CAP, max_sweeps: int = 60) -> np.ndarray:
    """All singular values, descending, by the same one-sided scheme."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    _check_cap(n, cap)
    if n == 1:
        return np.array([abs(a[0, 0])])
    tol = 1e-15
    for _ in range(max_sweeps):
        worst = 0.0
        for pairs in _round_robin_pairs(n):
            if not pairs:
                continue
            for i, j in pairs:
                ci = a[:, i]
                cj = a[:, j]
                app = float(np.sum(np.abs(ci) ** 2))
                aqq = float(np.sum(np.abs(cj) ** 2))
                apq = complex(np.sum(np.conj(ci) * cj))
                denom = math.sqrt(app * aqq)
                if denom == 0.0 or abs(apq) == 0.0:
                    continue
                worst = max(worst, abs(apq) / denom)
                u = apq / abs(apq)
                tau = (aqq - app) / (2.0 * abs(apq))
                t = 1.0 if tau == 0.0 else math.copysign(1.0, tau) / (
                    abs(tau) + math.hypot(1.0, tau)
                )
                cth = 1.0 / math.hypot(1.0, t)
                sth = t * cth
                newi = cth * ci - (sth * np.conj(u)) * cj
                newj = (sth * u) * ci + cth * cj
                a[:, i] = newi
                a[:, j] = newj
        if worst < tol:
            norms = np.sqrt(np.sum(np.abs(a) ** 2, axis=0))
            return np.sort(norms)[::-1]
    raise OracleNonConvergence(f"rotation sweeps did not converge for n={n}")


def dense_bc(d: CycleDiagonal, cap: int = DEFAULT_CAP) -> tuple[np.ndarray, np.ndarray]:
    """Explicit inverse parts of one cycle block, built from plain
    products: B is strictly lower triangular with entry products of -d,
    C is the rank-one closure term.  (D + U)(B + C) = I."""
    n = d.n
    _check_cap(n, cap)
    e = -np.asarray(d.entries)  # products use -d throughout
    # beta[k, m] = product of e[k-1 .. m-1] (1-based k..m), empty = 1
    b = np.zeros((n, n), dtype=complex)
    for j in range(1, n):  # column index 1-based j, rows i >= j+1
        prod = 1.0 + 0j
        for i in range(j + 1, n + 1):
            b[i - 1, j - 1] = prod  # beta_{j+1, i-1}
            prod *= e[i - 1]
    ecol = np.empty(n, dtype=complex)
    prod = 1.0 + 0j
    for i in range(1, n + 1):
        ecol[i - 1] = prod  # beta_{1, i-1}
        prod *= e[i - 1]
    total = prod  # product of all -d
    fcol = np.empty(n, dtype=complex)
    prod = 1.0 + 0j
    for j in range(n, 0, -1):
        fcol[j - 1] = prod  # beta_{j+1, n}
        prod *= e[j - 1]
    cmat = np.outer(ecol, fcol) / (1.0 - total)
    return b, cmat


def dense_det(a: np.ndarray, cap: int = DEFAULT_CAP) -> complex:
    """Determinant by elimination with partial pivoting."""
    a = np.array(a, dtype=complex)
    n = a.shape[0]
    _check_cap(n, cap)
    det = 1.0 + 0j
    for k in range(n):
        piv = k + int(np.argmax(np.abs(a[k:, k])))
        if a[piv, k] == 0:
            return 0j
        if piv != k:
            a[[k, piv]] = a[[piv, k]]
            det = -det
        det *= a[k, k]
        if k + 1 < n:
            factors = a[k + 1 :, k] / a[k, k]
            a[k + 1 :, k:] -= np.outer(factors, a[k, k:])
    return complex(det)


def toeplitz_form(r: float, a) -> float:
    """|sum over m <= m' of r^(m'-m) a_m conj(a_m')| for 0 < r < 1;
    bounded by (1/(1-r)) * sum |a_m|^2."""
    if not (0.0 < r < 1.0):
        raise ValueError("toeplitz_form needs 0 < r < 1")
    a = np.asarray(a, dtype=complex)
    n = a.size
    idx = np.arange(n)
    expo = idx[None, :] - idx[:, None]  # m' - m
    mask = expo >= 0
    weights = np.where(mask, r ** np.where(mask, expo, 0), 0.0)
    val = complex(np.einsum("i,ij,j->", a, weights, np.conj(a)))
    return abs(val)


@dataclass(frozen=True)
class SpotCheck:
    """Outcome of a dense cross-check of a structured value."""

    structured: float
    dense: float

    @property
    def rel_err(self) -> float:
        scale = max(abs(self.dense), 1e-300)
        return abs(self.structured - self.dense) / scale
