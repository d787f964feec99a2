"""Cycle-block spectral quantities against brute-force and dense oracles."""

import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_cycle, random_perm_instance
from permsmin import oracle
from permsmin.logdomain import LogComplex, log_abs2_one_minus
from permsmin.perm import Permutation, decompose, sample_uniform
from permsmin.spectral import (
    CycleDiagonal,
    SingularCycleError,
    beta_sq,
    bounds_cycle,
    bounds_global,
    c0,
    cycle_diagonals,
    dual_hat,
    eps_bound,
    gamma,
    is_invertible,
    phi,
    rayleigh,
    rho1,
    rho2,
    smin_exact,
    smin_global_exact,
    smin_scalar,
    solve,
    solve_adjoint,
    solve_residual,
    test_vector_bound as anchor_quotient,
    u_root,
)


def gamma_brute(d: np.ndarray) -> tuple[float, int]:
    """Literal cyclic row sums: row k adds the squared magnitudes of the
    products of j = 0..n-1 consecutive entries starting at position k,
    wrapping around the orbit; ties go to the smallest k."""
    d = np.asarray(d)
    n = d.size
    best, bk = -1.0, 0
    for k in range(1, n + 1):
        tot, prod = 0.0, 1.0
        for j in range(n):
            tot += prod
            prod *= abs(d[(k - 1 + j) % n]) ** 2
        if tot > best * (1 + 1e-12):
            best, bk = tot, k
    return best, bk


def assemble_full_cycle(entries) -> np.ndarray:
    return oracle.assemble_cycle(CycleDiagonal(np.asarray(entries, dtype=complex)))


class TestLogComplex:
    def test_multiplication_matches_complex(self):
        a = LogComplex.from_complex(1.5 - 2.0j)
        b = LogComplex.from_complex(-0.25 + 0.1j)
        prod = (a * b).to_complex()
        assert prod == pytest.approx((1.5 - 2.0j) * (-0.25 + 0.1j), rel=1e-14)

    def test_zero_absorbs(self):
        z = LogComplex.from_complex(0)
        assert (z * LogComplex.from_complex(5 + 1j)).to_complex() == 0

    @settings(max_examples=200, deadline=None)
    @given(
        st.floats(min_value=-300.0, max_value=300.0),
        st.floats(min_value=-math.pi + 1e-9, max_value=math.pi),
    )
    def test_magnitude_roundtrip_within_ulp(self, log_mag, phase):
        z = LogComplex(log_mag, phase)
        back = LogComplex.from_complex(z.to_complex())
        assert back.log_mag == pytest.approx(log_mag, abs=1e-12, rel=1e-13)

    def test_one_minus_near_cancellation(self):
        # |1 - z|^2 for z = exp(1e-9): full relative precision required
        got = log_abs2_one_minus(1e-9, 0.0)
        assert got == pytest.approx(2 * math.log(math.expm1(1e-9)), rel=1e-9)


class TestC0:
    @pytest.mark.parametrize("n", [1, 2, 5])
    def test_all_zero_entries(self, n):
        assert c0(CycleDiagonal(np.zeros(n, dtype=complex))) == pytest.approx(1.0)

    def test_even_cycle_of_ones_is_singular(self):
        assert c0(CycleDiagonal(np.ones(2, dtype=complex))) == 0.0

    def test_odd_cycle_of_ones(self):
        assert c0(CycleDiagonal(np.ones(3, dtype=complex))) == pytest.approx(4.0)

    def test_matches_dense_determinant(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 14))
            blk = random_cycle(rng, n)
            det = oracle.dense_det(assemble_full_cycle(blk.entries))
            assert c0(blk) == pytest.approx(abs(det) ** 2, rel=1e-10)


class TestBetaSq:
    def test_empty_product_is_one(self, rng):
        blk = random_cycle(rng, 6)
        for k in range(2, 8):
            assert beta_sq(blk, k, k - 1) == 1.0

    def test_single_factor(self, rng):
        blk = random_cycle(rng, 6)
        for k in range(1, 7):
            assert beta_sq(blk, k, k) == pytest.approx(
                abs(blk.entries[k - 1]) ** 2, rel=1e-14
            )

    def test_constant_modulus_full_product(self):
        r = 0.8
        blk = CycleDiagonal(np.full(9, r + 0j))
        assert beta_sq(blk, 1, 9) == pytest.approx(r ** 18, rel=1e-13)

    def test_rejects_bad_indices(self, rng):
        blk = random_cycle(rng, 4)
        with pytest.raises(IndexError):
            beta_sq(blk, 0, 2)
        with pytest.raises(IndexError):
            beta_sq(blk, 3, 1)
        with pytest.raises(IndexError):
            beta_sq(blk, 1, 5)

    def test_walk_consistency(self, rng):
        blk = random_cycle(rng, 10)
        s = blk.log_prefix
        for k in range(1, 11):
            for m in range(k - 1, 11):
                assert beta_sq(blk, k, m) == pytest.approx(
                    math.exp(s[m] - s[k - 1]), rel=1e-13
                )


class TestGamma:
    def test_all_zero_entries(self):
        val, k = gamma(CycleDiagonal(np.zeros(5, dtype=complex)))
        assert val == pytest.approx(1.0)

    def test_constant_modulus_below_one(self):
        r, n = 0.7, 8
        val, k = gamma(CycleDiagonal(np.full(n, r + 0j)))
        # all cyclic rows coincide; ties resolve to the smallest index
        assert val == pytest.approx((1 - r ** (2 * n)) / (1 - r ** 2), rel=1e-12)
        assert k == 1

    def test_constant_modulus_above_one(self):
        r, n = 1.3, 6
        val, k = gamma(CycleDiagonal(np.full(n, r + 0j)))
        assert val == pytest.approx((r ** (2 * n) - 1) / (r ** 2 - 1), rel=1e-12)
        assert k == 1

    def test_n1(self):
        val, k = gamma(CycleDiagonal(np.array([2.0 + 0j])))
        assert val == pytest.approx(1.0)
        assert k == 1

    def test_matches_brute_force(self, rng):
        for _ in range(150):
            n = int(rng.integers(1, 12))
            blk = random_cycle(rng, n, mu=0.0, sigma=1.0)
            val, k = gamma(blk)
            bval, bk = gamma_brute(blk.entries)
            assert val == pytest.approx(bval, rel=1e-11)
            assert k == bk

    def test_brute_force_with_zero_entry(self, rng):
        for _ in range(40):
            n = int(rng.integers(2, 8))
            d = rng.normal(size=n) + 1j * rng.normal(size=n)
            d[rng.integers(0, n)] = 0.0
            val, k = gamma(CycleDiagonal(d))
            bval, bk = gamma_brute(d)
            assert val == pytest.approx(bval, rel=1e-11)
            assert k == bk


class TestRho:
    def test_rho1_all_zeros(self):
        for n in (1, 2, 4):
            blk = CycleDiagonal(np.zeros(n, dtype=complex))
            assert rho1(blk) == pytest.approx(1.0, rel=1e-12)

    def test_rho1_matches_dense_hs_norm(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 18))
            blk = random_cycle(rng, n, mu=0.0, sigma=0.9)
            if blk.singular:
                continue
            _, cmat = oracle.dense_bc(blk)
            assert rho1(blk) == pytest.approx(
                float(np.sum(np.abs(cmat) ** 2)), rel=1e-10
            )

    def test_rho1_rejects_singular(self):
        with pytest.raises(SingularCycleError):
            rho1(CycleDiagonal(np.ones(2, dtype=complex)))

    def test_rho2_n1_empty(self):
        assert rho2(CycleDiagonal(np.array([0.3 + 0.1j]))) == 0.0

    def test_rho2_all_zeros(self):
        for n in (2, 3, 6):
            assert rho2(CycleDiagonal(np.zeros(n, dtype=complex))) == pytest.approx(
                n - 1.0, rel=1e-12
            )

    def test_rho2_unit_modulus(self):
        n = 7
        d = np.exp(1j * np.linspace(0.1, 2.0, n))
        assert rho2(CycleDiagonal(d)) == pytest.approx(n * (n - 1) / 2, rel=1e-12)

    def test_rho2_matches_dense_hs_norm(self, rng):
        for _ in range(50):
            n = int(rng.integers(2, 18))
            blk = random_cycle(rng, n, mu=0.0, sigma=0.9)
            if blk.singular:
                continue
            bmat, _ = oracle.dense_bc(blk)
            assert rho2(blk) == pytest.approx(
                float(np.sum(np.abs(bmat) ** 2)), rel=1e-10
            )

    def test_rho2_at_most_n_gamma(self, rng):
        # the other half of the printed two-sided comparison fails on
        # explicit instances; see test_gamma_rho2_counterexample
        for _ in range(60):
            n = int(rng.integers(1, 16))
            blk = random_cycle(rng, n, mu=0.0, sigma=1.0)
            g, _ = gamma(blk)
            assert rho2(blk) <= n * g * (1 + 1e-10)

    def test_gamma_rho2_counterexample(self):
        # gamma <= rho2 is not a pathwise truth: a 2-cycle with one large
        # entry has rho2 = 1 but gamma = 1 + |d_2|^2
        blk = CycleDiagonal(np.array([0.0 + 0j, 3.0 + 0j]))
        g, _ = gamma(blk)
        assert rho2(blk) == pytest.approx(1.0)
        assert g > rho2(blk)


class TestBounds:
    def test_singular_two_cycle(self):
        rep = bounds_cycle(CycleDiagonal(np.ones(2, dtype=complex)), want_exact=True)
        assert rep.singular
        assert rep.lower == 0.0 and rep.upper == 0.0 and rep.exact == 0.0

    def test_n1_zero_entry(self):
        rep = bounds_cycle(CycleDiagonal(np.zeros(1, dtype=complex)), want_exact=True)
        assert rep.exact == pytest.approx(1.0, rel=1e-12)
        assert rep.lower <= 1.0 <= rep.upper

    def test_sandwich_against_dense(self, rng):
        for _ in range(60):
            n = int(rng.integers(2, 17))
            blk = random_cycle(rng, n, mu=rng.uniform(-0.8, 0.8), sigma=0.9)
            if blk.singular:
                continue
            rep = bounds_cycle(blk, want_exact=True)
            sd = oracle.dense_smin(assemble_full_cycle(blk.entries)) ** 2
            assert rep.lower <= sd * (1 + 1e-9)
            assert sd <= rep.upper * (1 + 1e-9)
            assert rep.exact == pytest.approx(sd, rel=1e-9)

    def test_report_serialization_keys(self, rng):
        rep = bounds_cycle(random_cycle(rng, 5), want_exact=True)
        d = rep.to_dict()
        assert set(d) == {"c0", "gamma", "rho1", "rho2", "lower", "upper",
                          "exact", "singular"}
        assert set(d["c0"]) == {"log", "value"}


class TestBoundsGlobal:
    def test_identity_permutation_blocks(self, rng):
        n = 6
        d = rng.normal(size=n) + 1j * rng.normal(size=n)
        rep = bounds_global(Permutation.identity(n), d, want_exact=True)
        assert rep.exact == pytest.approx(min(abs(v + 1) for v in d) ** 2, rel=1e-10)

    def test_single_cycle_matches_cycle_report(self, rng):
        n = 9
        blk = random_cycle(rng, n)
        sigma = Permutation(tuple(list(range(2, n + 1)) + [1]))
        rep = bounds_global(sigma, blk.entries, want_exact=True)
        single = bounds_cycle(blk, want_exact=True)
        assert rep.exact == pytest.approx(single.exact, rel=1e-12)
        assert rep.lower == pytest.approx(single.lower, rel=1e-12)

    def test_matches_dense_full_matrix(self, rng):
        for _ in range(15):
            n = int(rng.integers(2, 25))
            sigma, d = random_perm_instance(rng, n)
            rep = bounds_global(sigma, d, want_exact=True)
            a = oracle.assemble(sigma, d)
            sd = oracle.dense_smin(a) ** 2
            if rep.singular:
                assert sd < 1e-12
                continue
            assert rep.exact == pytest.approx(sd, rel=1e-8)
            assert rep.lower <= sd * (1 + 1e-9) and sd <= rep.upper * (1 + 1e-9)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            bounds_global(Permutation.identity(3), np.ones(4))

    def test_determinant_product_identity(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 20))
            sigma, d = random_perm_instance(rng, n)
            rep = bounds_global(sigma, d)
            det = oracle.dense_det(oracle.assemble(sigma, d))
            if abs(det) > 0:
                assert rep.log_det_sq == pytest.approx(
                    2 * math.log(abs(det)), abs=1e-8
                )


class TestInvertible:
    def test_even_cycle_of_ones(self):
        sigma = Permutation((2, 1))
        assert is_invertible(sigma, np.ones(2)) == [False]

    def test_all_inside_disk(self, rng):
        sigma, _ = random_perm_instance(rng, 12)
        d = 0.5 * np.exp(1j * rng.uniform(0, 2 * np.pi, 12))
        assert all(is_invertible(sigma, d))

    def test_all_outside_disk(self, rng):
        sigma, _ = random_perm_instance(rng, 12)
        d = 2.0 * np.exp(1j * rng.uniform(0, 2 * np.pi, 12))
        assert all(is_invertible(sigma, d))


class TestPhi:
    def test_u1(self):
        z = 0.3 - 0.7j
        assert phi(1, z) == pytest.approx(abs(z + 1), rel=1e-15)

    def test_minus_one_is_fourth_root(self):
        assert phi(4, 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_origin(self):
        assert phi(2, 0.0) == 1.0

    def test_rejects_n0(self):
        with pytest.raises(ValueError):
            phi(0, 1.0)

    def test_matches_enumeration(self, rng):
        for _ in range(300):
            n = int(rng.integers(1, 60))
            z = complex(rng.normal() * 2, rng.normal() * 2)
            brute = min(abs(cmath.exp(2j * math.pi * j / n) + z) for j in range(n))
            assert phi(n, z) == pytest.approx(brute, abs=1e-13)

    @settings(max_examples=100, deadline=None)
    @given(
        st.integers(min_value=1, max_value=40),
        st.floats(min_value=-3, max_value=3),
        st.floats(min_value=-3, max_value=3),
    )
    def test_elementary_estimate(self, n, re, im):
        z = complex(re, im)
        lo = abs(abs(z) - 1)
        hi = lo + 2 * min(abs(z), 1.0) * math.sin(math.pi / (2 * n))
        val = phi(n, z)
        assert lo - 1e-12 <= val <= hi + 1e-12

    def test_rotation_invariance(self, rng):
        for _ in range(50):
            n = int(rng.integers(1, 30))
            z = complex(rng.normal(), rng.normal())
            base = phi(n, z)
            for j in range(n):
                w = cmath.exp(2j * math.pi * j / n)
                assert phi(n, z * w) == pytest.approx(base, abs=1e-12)


class TestSminScalar:
    def test_zero_diagonal_unitary(self, rng):
        sigma, _ = random_perm_instance(rng, 10)
        assert smin_scalar(sigma, 0.0) == pytest.approx(1.0, rel=1e-15)

    def test_single_cycle_is_phi(self):
        n = 11
        sigma = Permutation(tuple(list(range(2, n + 1)) + [1]))
        d = 1.3 * cmath.exp(0.4j)
        assert smin_scalar(sigma, d) == pytest.approx(phi(n, d), rel=1e-15)

    def test_two_cycle_at_one_vanishes(self):
        assert smin_scalar(Permutation((2, 1)), 1.0) == pytest.approx(0.0, abs=1e-15)

    def test_matches_dense(self, rng):
        for _ in range(15):
            n = int(rng.integers(2, 20))
            sigma = sample_uniform(n, rng)
            d = complex(rng.normal(), rng.normal()) * 0.9
            a = oracle.assemble(sigma, np.full(n, d))
            assert smin_scalar(sigma, d) == pytest.approx(
                oracle.dense_smin(a), abs=1e-11
            )


class TestSolve:
    def test_pure_shift_two_cycle(self):
        blk = CycleDiagonal(np.zeros(2, dtype=complex))
        y = np.array([1.0 + 2j, -3.0 + 0.5j])
        x = solve(blk, y)
        assert np.allclose(x, np.array([y[1], y[0]]), rtol=1e-15)

    def test_n1(self):
        d1 = 0.7 - 0.2j
        blk = CycleDiagonal(np.array([d1]))
        y = np.array([2.0 + 1j])
        assert solve(blk, y)[0] == pytest.approx(y[0] / (d1 + 1), rel=1e-14)

    def test_matches_dense_inverse(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 17))
            blk = random_cycle(rng, n, mu=rng.uniform(-0.6, 0.6), sigma=0.9)
            if blk.singular:
                continue
            y = rng.normal(size=n) + 1j * rng.normal(size=n)
            bmat, cmat = oracle.dense_bc(blk)
            x_dense = (bmat + cmat) @ y
            x = solve(blk, y)
            assert np.linalg.norm(x - x_dense) <= 1e-10 * np.linalg.norm(x_dense)

    def test_residual_contract(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 40))
            blk = random_cycle(rng, n, mu=rng.uniform(-0.6, 0.6), sigma=0.9)
            if blk.singular:
                continue
            y = rng.normal(size=n) + 1j * rng.normal(size=n)
            x = solve(blk, y)
            cond_scale = np.linalg.norm(y) + np.linalg.norm(x) * (
                1 + float(np.max(np.abs(blk.entries)))
            )
            assert solve_residual(blk, x, y) <= 1e-12 * cond_scale

    def test_rejects_singular(self):
        with pytest.raises(SingularCycleError):
            solve(CycleDiagonal(np.ones(2, dtype=complex)), np.ones(2))

    def test_rejects_length_mismatch(self, rng):
        blk = random_cycle(rng, 4)
        with pytest.raises(ValueError):
            solve(blk, np.ones(5))

    def test_extreme_descending_walk(self, rng):
        # naive prefix products span exp(+-1600); solution stays bounded
        n = 400
        d = np.exp(-4.0 + 0.5 * rng.normal(size=n)) * np.exp(
            1j * rng.uniform(0, 2 * np.pi, n)
        )
        blk = CycleDiagonal(d)
        y = rng.normal(size=n) + 1j * rng.normal(size=n)
        x = solve(blk, y)
        assert solve_residual(blk, x, y) <= 1e-12 * np.linalg.norm(y)

    def test_extreme_rising_walk(self, rng):
        n = 400
        d = np.exp(+4.0 + 0.5 * rng.normal(size=n)) * np.exp(
            1j * rng.uniform(0, 2 * np.pi, n)
        )
        blk = CycleDiagonal(d)
        y = rng.normal(size=n) + 1j * rng.normal(size=n)
        x = solve(blk, y)
        assert solve_residual(blk, x, y) <= 1e-12 * np.linalg.norm(y)

    def test_zero_entries_recursion_path(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 10))
            d = rng.normal(size=n) + 1j * rng.normal(size=n)
            d[rng.integers(0, n)] = 0.0
            blk = CycleDiagonal(d)
            if blk.singular:
                continue
            y = rng.normal(size=n) + 1j * rng.normal(size=n)
            x = solve(blk, y)
            a = assemble_full_cycle(d)
            assert np.linalg.norm(a @ x - y) <= 1e-11 * np.linalg.norm(y)


class TestSolveAdjoint:
    def test_n1_conjugate(self):
        d1 = 0.4 + 0.9j
        blk = CycleDiagonal(np.array([d1]))
        y = np.array([1.0 - 1j])
        assert solve_adjoint(blk, y)[0] == pytest.approx(
            y[0] / (d1.conjugate() + 1), rel=1e-14
        )

    def test_matches_dense_adjoint_inverse(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 17))
            blk = random_cycle(rng, n, mu=rng.uniform(-0.6, 0.6), sigma=0.9)
            if blk.singular:
                continue
            y = rng.normal(size=n) + 1j * rng.normal(size=n)
            a = assemble_full_cycle(blk.entries)
            x_dense = np.linalg.solve(a.conj().T, y)
            x = solve_adjoint(blk, y)
            assert np.linalg.norm(x - x_dense) <= 1e-10 * np.linalg.norm(x_dense)

    def test_real_diagonal_conjugation_relation(self, rng):
        # for a real diagonal, the adjoint solve is the conjugate of the
        # plain solve of the conjugated data on the reversed system
        n = 8
        d = rng.normal(size=n).astype(complex)
        blk = CycleDiagonal(d)
        if blk.singular:
            pytest.skip("random instance singular")
        y = rng.normal(size=n) + 1j * rng.normal(size=n)
        a = assemble_full_cycle(d)
        expect = np.linalg.solve(a.conj().T, y)
        got = solve_adjoint(blk, y)
        assert np.allclose(got, expect, rtol=1e-11, atol=1e-13)


class TestSminExact:
    def test_pure_shift(self):
        blk = CycleDiagonal(np.zeros(8, dtype=complex))
        assert smin_exact(blk) == pytest.approx(1.0, rel=1e-12)

    def test_scalar_matches_phi(self, rng):
        for _ in range(25):
            n = int(rng.integers(1, 80))
            d = complex(rng.normal(), rng.normal())
            if abs(d) < 0.1:
                d *= 3
            blk = CycleDiagonal(np.full(n, d))
            if blk.singular:
                continue
            assert smin_exact(blk, tol=1e-12) == pytest.approx(
                phi(n, d), rel=1e-10, abs=1e-13
            )

    def test_scalar_adversarial_clustered(self):
        # moduli far from 1 cluster the whole inverse spectrum; the
        # geometric-tail stop must still deliver full accuracy
        for d, n in [(2.0 + 0j, 200), (0.45 + 0j, 160), (1.8 * cmath.exp(0.3j), 150)]:
            blk = CycleDiagonal(np.full(n, d))
            assert smin_exact(blk, tol=1e-12) == pytest.approx(
                phi(n, d), rel=5e-11
            )

    def test_random_n64_vs_dense(self, rng):
        for _ in range(10):
            blk = random_cycle(rng, 64, mu=rng.uniform(-0.5, 0.5), sigma=0.9)
            if blk.singular:
                continue
            sd = oracle.dense_smin(assemble_full_cycle(blk.entries))
            assert smin_exact(blk) == pytest.approx(sd, rel=1e-8)

    def test_rejects_singular(self):
        with pytest.raises(SingularCycleError):
            smin_exact(CycleDiagonal(np.ones(2, dtype=complex)))

    def test_smin_global_exact(self, rng):
        sigma, d = random_perm_instance(rng, 20)
        s, singular = smin_global_exact(sigma, d)
        if not singular:
            sd = oracle.dense_smin(oracle.assemble(sigma, d))
            assert s == pytest.approx(sd, rel=1e-8)


class TestInverseIdentity:
    def test_explicit_inverse_multiplies_to_identity(self, rng):
        # entrywise error scales with the inverse's entry magnitudes, so
        # the tolerance is relative to that scale (hot drifts blow it up)
        for _ in range(30):
            n = int(rng.integers(1, 33))
            blk = random_cycle(rng, n, mu=rng.uniform(-0.5, 0.5), sigma=0.9)
            if blk.singular:
                continue
            bmat, cmat = oracle.dense_bc(blk)
            a = assemble_full_cycle(blk.entries)
            err = np.max(np.abs(a @ (bmat + cmat) - np.eye(n)))
            # rising products make B and C cancel entrywise; what doubles
            # can deliver is relative to the pre-cancellation magnitudes
            scale = max(1.0, float(np.max(np.abs(bmat))), float(np.max(np.abs(cmat))))
            assert err < 1e-12 * n * scale

    def test_inverse_identity_absolute_under_negative_drift(self, rng):
        # with negative drift the inverse entries stay O(1) and the
        # identity holds to an absolute entrywise threshold
        for _ in range(30):
            n = int(rng.integers(1, 33))
            blk = random_cycle(rng, n, mu=-0.4, sigma=0.6)
            if blk.singular:
                continue
            bmat, cmat = oracle.dense_bc(blk)
            a = assemble_full_cycle(blk.entries)
            assert np.max(np.abs(a @ (bmat + cmat) - np.eye(n))) < 1e-10

    def test_c_part_is_rank_one(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 14))
            blk = random_cycle(rng, n)
            if blk.singular:
                continue
            _, cmat = oracle.dense_bc(blk)
            sv = oracle.dense_singular_values(cmat)
            assert sv[1] <= 1e-10 * sv[0]


class TestURoot:
    def test_scalar(self):
        d = 1.2 * cmath.exp(0.7j)
        blk = CycleDiagonal(np.full(5, d))
        u = u_root(blk)
        assert u ** 5 == pytest.approx(d ** 5, rel=1e-12)
        assert phi(5, u) == pytest.approx(phi(5, d), rel=1e-12)

    def test_reciprocal_pair_unit_magnitude(self):
        blk = CycleDiagonal(np.array([2.0 + 0j, 0.5 + 0j]))
        assert abs(u_root(blk)) == pytest.approx(1.0, rel=1e-14)

    def test_minus_one(self):
        blk = CycleDiagonal(np.array([-1.0 + 0j]))
        assert u_root(blk) == pytest.approx(-1.0, rel=1e-14)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            u_root(CycleDiagonal(np.array([0j, 1.0 + 0j])))


class TestRayleigh:
    def test_root_vector_bound(self, rng):
        for _ in range(20):
            n = int(rng.integers(2, 12))
            blk = random_cycle(rng, n)
            if blk.singular:
                continue
            u = u_root(blk)
            for j in range(n):
                w = cmath.exp(2j * math.pi * j / n)
                z = w ** np.arange(1, n + 1)
                assert rayleigh(blk, z) <= abs(u + w) ** 2 * (1 + 1e-9)

    def test_always_at_least_smin_sq(self, rng):
        for _ in range(10):
            n = int(rng.integers(2, 12))
            blk = random_cycle(rng, n)
            if blk.singular:
                continue
            sd = oracle.dense_smin(assemble_full_cycle(blk.entries)) ** 2
            for _ in range(100):
                z = rng.normal(size=n) + 1j * rng.normal(size=n)
                assert rayleigh(blk, z) >= sd * (1 - 1e-9)

    def test_minimizer_achieves_smin_sq(self, rng):
        # transform the dense minimal singular vector into the quotient's
        # coordinates: the quotient must then hit the squared minimum
        for _ in range(10):
            n = int(rng.integers(2, 12))
            blk = random_cycle(rng, n)
            if blk.singular:
                continue
            a = assemble_full_cycle(blk.entries)
            _, svals, vh = np.linalg.svd(a)
            x = vh[-1].conj()
            u = u_root(blk)
            s = blk.log_prefix
            ks = np.arange(n)
            # delta_k = prod_{l<k} d_l / u^{k-1}; x = delta * z
            log_delta = 0.5 * s[:n] - ks * (0.5 * s[n] / n)
            args = blk.phase_prefix[:n] - ks * cmath.phase(u) - ks * math.pi
            delta = np.exp(log_delta + 1j * args)
            z = x / delta
            assert rayleigh(blk, z) == pytest.approx(svals[-1] ** 2, rel=1e-8)

    def test_scalar_best_root_vector_is_exact(self, rng):
        n = 9
        d = 0.8 * cmath.exp(0.3j)
        blk = CycleDiagonal(np.full(n, d))
        best = min(
            rayleigh(blk, cmath.exp(2j * math.pi * j / n) ** np.arange(1, n + 1))
            for j in range(n)
        )
        assert best == pytest.approx(phi(n, d) ** 2, rel=1e-12)

    def test_rejects_zero_vector(self, rng):
        blk = random_cycle(rng, 4)
        with pytest.raises(ValueError):
            rayleigh(blk, np.zeros(4))


class TestTestVectorBound:
    def test_n1_reduces_to_c0(self):
        d1 = 2.0 + 0j
        blk = CycleDiagonal(np.array([d1]))
        assert anchor_quotient(blk, 1) == pytest.approx(abs(1 + d1) ** 2, rel=1e-13)

    def test_min_over_anchor_equals_upper_bound(self, rng):
        for _ in range(40):
            n = int(rng.integers(1, 16))
            blk = random_cycle(rng, n, mu=rng.uniform(-0.8, 0.8), sigma=1.0)
            if blk.singular:
                continue
            q = min(anchor_quotient(blk, k0) for k0 in range(1, n + 1))
            g, _ = gamma(blk)
            assert q == pytest.approx(c0(blk) / g, rel=1e-11)

    def test_every_anchor_dominates_smin_sq(self, rng):
        for _ in range(25):
            n = int(rng.integers(1, 14))
            blk = random_cycle(rng, n, mu=rng.uniform(-0.8, 0.8), sigma=1.0)
            if blk.singular:
                continue
            sd = oracle.dense_smin(assemble_full_cycle(blk.entries)) ** 2
            for k0 in range(1, n + 1):
                assert anchor_quotient(blk, k0) >= sd * (1 - 1e-9)


class TestEpsBound:
    def test_inside_disk_half(self):
        blk = CycleDiagonal(np.full(6, 0.5 + 0j))
        assert eps_bound(blk) == pytest.approx(0.5 / (2 * math.sqrt(2)), rel=1e-14)

    def test_mixed_moduli_absent(self):
        blk = CycleDiagonal(np.array([0.5 + 0j, 2.0 + 0j]))
        assert eps_bound(blk) is None

    def test_outside_disk_two(self, rng):
        n = 8
        d = 2.0 * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
        blk = CycleDiagonal(d)
        assert eps_bound(blk) == pytest.approx(0.5 / (2 * math.sqrt(2)), rel=1e-14)
        sd = oracle.dense_smin(assemble_full_cycle(d))
        assert sd >= eps_bound(blk) - 1e-12

    def test_dense_respects_bound(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 16))
            inside = bool(rng.integers(0, 2))
            r = rng.uniform(0.2, 0.9, n) if inside else rng.uniform(1.1, 4.0, n)
            d = r * np.exp(1j * rng.uniform(0, 2 * np.pi, n))
            blk = CycleDiagonal(d)
            sd = oracle.dense_smin(assemble_full_cycle(d))
            assert sd >= eps_bound(blk) - 1e-12


class TestDualHat:
    def test_constant(self):
        blk = CycleDiagonal(np.full(4, 2.0 + 0j))
        assert np.allclose(dual_hat(blk).entries, 0.5)

    def test_shift_order(self):
        blk = CycleDiagonal(np.array([2.0 + 0j, 4.0 + 0j]))
        assert np.allclose(dual_hat(blk).entries, np.array([0.25, 0.5]))

    def test_duality_inequality_against_dense(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 17))
            blk = random_cycle(rng, n, mu=0.3, sigma=0.7)
            hat = dual_hat(blk)
            star = CycleDiagonal(np.conj(hat.entries))
            s_orig = oracle.dense_smin(assemble_full_cycle(blk.entries))
            s_star = oracle.dense_smin(assemble_full_cycle(star.entries))
            lo = float(np.min(np.abs(blk.entries)))
            assert s_orig >= lo * s_star - 1e-9

    def test_reversed_shift_spectrum_agrees(self, rng):
        # the reversed-shift companion has the singular values of the
        # conjugated forward-shift system
        n = 7
        blk = random_cycle(rng, n, mu=0.2, sigma=0.5)
        hat = dual_hat(blk)
        inv_cycle = Permutation(tuple([n] + list(range(1, n))))  # k -> k-1
        a1 = oracle.assemble(inv_cycle, hat.entries)
        star = CycleDiagonal(np.conj(hat.entries))
        a2 = assemble_full_cycle(star.entries)
        s1 = oracle.dense_singular_values(a1)
        s2 = oracle.dense_singular_values(a2)
        assert np.allclose(s1, s2, rtol=1e-11, atol=1e-12)

    def test_rejects_zero(self):
        with pytest.raises(ValueError):
            dual_hat(CycleDiagonal(np.array([0j, 1 + 0j])))


class TestWeakUpperBound:
    def test_smin_below_phi_of_root(self, rng):
        for _ in range(30):
            n = int(rng.integers(1, 20))
            blk = random_cycle(rng, n, mu=rng.uniform(-0.5, 0.5), sigma=0.8)
            if blk.singular:
                continue
            assert smin_exact(blk) <= phi(n, u_root(blk)) + 1e-9
