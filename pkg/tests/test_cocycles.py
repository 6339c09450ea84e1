"""Cocycle evaluation, domination, holonomies, transitions, perturbations."""
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import cocyclelab.cocycles as cc
import cocyclelab.linalg as la
import cocyclelab.shifts as sh

FULL2 = sh.SftSpec.full_shift(2, theta=0.5)
FULL2_TIGHT = sh.SftSpec.full_shift(2, theta=0.1)
GOLDEN = sh.SftSpec.golden_mean(theta=0.5)

D2 = np.diag([2.0, 0.5])
SHEAR = np.array([[1.0, 1.0], [0.0, 1.0]])
POS = np.array([[2.0, 1.0], [1.0, 1.0]])


def rot(a):
    c, s = np.cos(a), np.sin(a)
    return np.array([[c, -s], [s, c]])


def lc(base, g0, g1):
    return cc.CocycleSpec(base, 1, {"0": g0, "1": g1})


def brute_bump_field(x, word, theta, nu, span=4000):
    L = len(word)
    total = 0.0
    for k in range(-span, span + 1):
        if all(x.symbol_at(k + j) == word[j] for j in range(L)):
            total += theta ** (nu * abs(k))
    return total


class TestCocycleSpec:
    def test_missing_word_rejected(self):
        with pytest.raises(ValueError, match="missing"):
            cc.CocycleSpec(FULL2, 1, {"0": D2})

    def test_wrong_length_word_rejected(self):
        with pytest.raises(ValueError, match="length"):
            cc.CocycleSpec(FULL2, 1, {"00": D2, "1": D2})

    def test_singular_generator_rejected(self):
        with pytest.raises(ValueError, match="non-invertible"):
            lc(FULL2, np.zeros((2, 2)), D2)

    def test_window_two_golden_mean(self):
        gen = {"00": D2, "01": SHEAR, "10": POS}
        A = cc.CocycleSpec(GOLDEN, 2, gen)
        p = sh.periodic_point(GOLDEN, "01")
        assert np.array_equal(A.value_at(p), SHEAR)
        assert np.array_equal(A.value_at(p.shift(1)), POS)


class TestEvaluate:
    def test_periodic_product(self):
        A = lc(FULL2, D2, SHEAR)
        p = sh.periodic_point(FULL2, "01")
        expected = SHEAR @ D2
        assert np.allclose(cc.evaluate(A, p, 2), expected)
        assert np.allclose(cc.evaluate(A, p, 4), expected @ expected)

    def test_negative_time_inverts_shifted_product(self):
        A = lc(FULL2, D2, SHEAR)
        z, _ = sh.homoclinic_point(FULL2, "0", "11")
        for n in (1, 2, 5):
            direct = cc.evaluate(A, z, -n)
            ref = np.linalg.inv(cc.evaluate(A, z.shift(-n), n))
            assert np.allclose(direct, ref)

    @given(n=st.integers(-6, 6), m=st.integers(-6, 6))
    @settings(max_examples=40, deadline=None)
    def test_cocycle_identity(self, n, m):
        A = lc(FULL2, D2, POS)
        z, _ = sh.homoclinic_point(FULL2, "01", "0011")
        lhs = cc.evaluate(A, z, n + m)
        rhs = cc.evaluate(A, z.shift(n), m) @ cc.evaluate(A, z, n)
        assert np.allclose(lhs, rhs, atol=1e-9)


class TestBumpField:
    def test_fixed_point_closed_form(self):
        x = sh.periodic_point(FULL2, "0")
        q = 0.5
        got = cc._bump_field_exact(x, (0,), theta=0.5, nu=1.0)
        assert got == pytest.approx((1 + q) / (1 - q), rel=1e-14)

    def test_alternating_point_closed_form(self):
        x = sh.periodic_point(FULL2, "01")
        q = 0.5
        got = cc._bump_field_exact(x, (0, 1), theta=0.5, nu=1.0)
        # matches exactly at even positions
        assert got == pytest.approx(1 + 2 * q**2 / (1 - q**2), rel=1e-14)

    def test_homoclinic_point_matches_brute_force(self):
        z, _ = sh.homoclinic_point(FULL2, "01", "0011")
        for word in [(0,), (1, 1), (0, 0, 1)]:
            got = cc._bump_field_exact(z, word, theta=0.5, nu=0.7)
            ref = brute_bump_field(z, word, 0.5, 0.7)
            assert got == pytest.approx(ref, abs=1e-12)

    def test_shifted_point_matches_brute_force(self):
        z, _ = sh.homoclinic_point(FULL2, "0", "101")
        for k in (-3, 2, 7):
            got = cc._bump_field_exact(z.shift(k), (1, 0), theta=0.5, nu=1.0)
            ref = brute_bump_field(z.shift(k), (1, 0), 0.5, 1.0)
            assert got == pytest.approx(ref, abs=1e-12)


class TestPathMatrices:
    def test_locally_constant_lookup(self):
        A = lc(FULL2, D2, SHEAR)
        rng = np.random.default_rng(3)
        sym = rng.integers(0, 2, size=50)
        mats, logdet = A.path_matrices(sym)
        for t in range(len(sym)):
            ref = D2 if sym[t] == 0 else SHEAR
            assert np.array_equal(mats[t], ref)
            assert logdet[t] == pytest.approx(np.log(abs(np.linalg.det(ref))))

    def test_window_two_lookup(self):
        gen = {"00": D2, "01": SHEAR, "10": POS}
        A = cc.CocycleSpec(GOLDEN, 2, gen)
        sym = np.array([0, 1, 0, 0, 1, 0])
        mats, _ = A.path_matrices(sym)
        expect = [SHEAR, POS, D2, SHEAR, POS]
        assert all(np.array_equal(m, e) for m, e in zip(mats, expect))

    def test_bump_path_matches_exact_point_evaluation(self):
        pert = cc.HoelderPerturbation(nu=1.0, bumps=(cc.HoelderBump((0, 1), 0.3),))
        A = cc.CocycleSpec(FULL2, 1, {"0": D2, "1": SHEAR}, pert)
        p = sh.periodic_point(FULL2, "01")
        sym = np.tile([0, 1], 200)
        mats, logdet = A.path_matrices(sym)
        t = 200  # deep inside, truncation far below double precision
        exact = A.value_at(p.shift(t % 2))
        assert np.allclose(mats[t], exact, atol=1e-12)
        # skew direction is traceless: bump leaves volumes alone
        assert logdet[t] == pytest.approx(np.log(abs(np.linalg.det(D2))), abs=1e-12)

    def test_inadmissible_path_rejected(self):
        gen = {"00": D2, "01": SHEAR, "10": POS}
        A = cc.CocycleSpec(GOLDEN, 2, gen)
        with pytest.raises(ValueError, match="inadmissible"):
            A.path_matrices(np.array([0, 1, 1, 0]))


class TestDomination:
    def test_diagonal_tight_base_power_one(self):
        A = lc(FULL2_TIGHT, D2, D2)
        res = cc.domination_check(A)
        assert res.dominated and res.power == 1
        assert res.margin == pytest.approx(1 - 4 * 0.1, rel=1e-12)

    def test_constant_diagonal_loose_base_never_dominates(self):
        A = lc(sh.SftSpec.full_shift(2, theta=0.9), D2, D2)
        res = cc.domination_check(A)
        assert not res.dominated and res.power is None

    def test_conformal_always_power_one(self):
        g = 1.7 * rot(0.4)
        A = lc(FULL2, g, g)
        res = cc.domination_check(A)
        assert res.dominated and res.power == 1
        assert res.margin == pytest.approx(1 - 0.5, rel=1e-12)

    def test_antidiagonal_cancellation_found_at_power_two(self):
        g = np.array([[0.0, 2.0], [-0.5, 0.0]])
        A = lc(sh.SftSpec.full_shift(2, theta=0.3), g, g)
        res = cc.domination_check(A)
        assert res.dominated and res.power == 2
        assert res.margin == pytest.approx(1 - 0.3**2, rel=1e-10)

    def test_elliptic_product_found_late(self):
        g = rot(1.0) @ np.diag([1.2, 1 / 1.2])
        A = lc(sh.SftSpec.full_shift(2, theta=0.9), g, g)
        res = cc.domination_check(A)
        assert res.dominated
        assert res.power == 3

    def test_bump_envelope_shrinks_margin(self):
        base = lc(FULL2_TIGHT, D2, D2)
        pert = cc.HoelderPerturbation(nu=1.0, bumps=(cc.HoelderBump((0,), 0.05),))
        bumped = cc.CocycleSpec(FULL2_TIGHT, 1, {"0": D2, "1": D2}, pert)
        r0 = cc.domination_check(base)
        r1 = cc.domination_check(bumped)
        assert r1.dominated
        assert r1.margin < r0.margin


class TestStableHolonomy:
    def test_locally_constant_exact_value(self):
        A = lc(FULL2, D2, SHEAR)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "11")
        res = cc.stable_holonomy(A, z, p)
        expected = np.linalg.inv(D2 @ D2) @ (SHEAR @ SHEAR)
        assert res.truncation_error == 0.0
        assert np.allclose(res.matrix, expected, atol=1e-13)

    def test_equivariance(self):
        A = lc(FULL2, D2, POS)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "101")
        lhs = cc.stable_holonomy(A, z, p).matrix
        rhs = np.linalg.solve(
            A.value_at(p), cc.stable_holonomy(A, z.shift(1), p.shift(1)).matrix @ A.value_at(z)
        )
        assert np.allclose(lhs, rhs, atol=1e-11)

    def test_composition(self):
        A = lc(FULL2, D2, POS)
        p = sh.periodic_point(FULL2, "0")
        z1, _ = sh.homoclinic_point(FULL2, "0", "1")
        z2, _ = sh.homoclinic_point(FULL2, "0", "11")
        h12 = cc.stable_holonomy(A, z1, z2).matrix
        h2p = cc.stable_holonomy(A, z2, p).matrix
        h1p = cc.stable_holonomy(A, z1, p).matrix
        assert np.allclose(h2p @ h12, h1p, atol=1e-11)

    def test_not_asymptotic_rejected(self):
        A = lc(FULL2, D2, SHEAR)
        p0 = sh.periodic_point(FULL2, "0")
        p1 = sh.periodic_point(FULL2, "1")
        with pytest.raises(ValueError, match="forward asymptotic"):
            cc.stable_holonomy(A, p0, p1)

    def test_zero_amplitude_series_matches_exact_branch(self):
        g = 1.5 * rot(0.3)
        pert = cc.HoelderPerturbation(nu=1.0, bumps=(cc.HoelderBump((0,), 0.0),))
        A0 = lc(FULL2, g, np.diag([1.3, 1 / 1.3]) @ rot(0.1))
        A1 = cc.CocycleSpec(FULL2, 1, dict(A0.generator), pert)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "11")
        exact = cc.stable_holonomy(A0, z, p)
        series = cc.stable_holonomy(A1, z, p)
        assert exact.truncation_error == 0.0
        assert np.allclose(series.matrix, exact.matrix, atol=1e-10)

    def test_bump_series_truncation_control(self):
        g = 1.5 * rot(0.3)
        pert = cc.HoelderPerturbation(nu=1.0, bumps=(cc.HoelderBump((0, 1), 0.1),))
        A = cc.CocycleSpec(FULL2, 1, {"0": g, "1": 1.2 * rot(-0.2)}, pert)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "11")
        loose = cc.stable_holonomy(A, z, p, tol=1e-6)
        tight = cc.stable_holonomy(A, z, p, tol=1e-13)
        drift = np.linalg.norm(loose.matrix - tight.matrix, 2)
        assert drift < 1e-6
        assert tight.depth >= loose.depth

    def test_bump_hoelder_bound(self):
        g = 1.5 * rot(0.3)
        pert = cc.HoelderPerturbation(nu=1.0, bumps=(cc.HoelderBump((0, 1), 0.1),))
        A = cc.CocycleSpec(FULL2, 1, {"0": g, "1": 1.2 * rot(-0.2)}, pert)
        c1, rate = cc.holonomy_constants(A)
        assert rate < 1.0 and np.isfinite(c1)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "11")
        res = cc.stable_holonomy(A, z, p, tol=1e-13)
        dist = sh.metric(z, p, FULL2)
        assert np.linalg.norm(res.matrix - np.eye(2), 2) <= c1 * dist + 1e-10


class TestUnstableHolonomy:
    def test_window_two_matches_stabilized_products(self):
        gen = {"00": D2, "01": SHEAR, "10": POS}
        A = cc.CocycleSpec(GOLDEN, 2, gen)
        p = sh.periodic_point(GOLDEN, "0")
        z, _ = sh.homoclinic_point(GOLDEN, "0", "10")
        res = cc.unstable_holonomy(A, p, z)
        assert res.truncation_error == 0.0
        for n in (res.depth, res.depth + 3, res.depth + 7):
            brute = cc.evaluate(A, z.shift(-n), n) @ np.linalg.inv(
                cc.evaluate(A, p.shift(-n), n)
            )
            assert np.allclose(res.matrix, brute, atol=1e-11)

    def test_series_matches_exact_for_zero_amplitude(self):
        g0, g1 = 1.4 * rot(0.5), 1.1 * rot(-0.3)
        pert = cc.HoelderPerturbation(nu=1.0, bumps=(cc.HoelderBump((1,), 0.0),))
        A0 = lc(FULL2, g0, g1)
        A1 = cc.CocycleSpec(FULL2, 1, dict(A0.generator), pert)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "11")
        exact = cc.unstable_holonomy(A0, p, z)
        series = cc.unstable_holonomy(A1, p, z)
        assert np.allclose(series.matrix, exact.matrix, atol=1e-10)

    def test_bump_series_equivariance(self):
        g = 1.5 * rot(0.3)
        pert = cc.HoelderPerturbation(nu=1.0, bumps=(cc.HoelderBump((0, 1), 0.08),))
        A = cc.CocycleSpec(FULL2, 1, {"0": g, "1": 1.2 * rot(-0.2)}, pert)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "11")
        lhs = cc.unstable_holonomy(A, p, z, tol=1e-13).matrix
        prev = cc.unstable_holonomy(A, p.shift(-1), z.shift(-1), tol=1e-13).matrix
        rhs = A.value_at(z.shift(-1)) @ prev @ np.linalg.inv(A.value_at(p.shift(-1)))
        assert np.allclose(lhs, rhs, atol=1e-9)


class TestPsiTransition:
    def test_window_one_product_identity(self):
        A = lc(FULL2, D2, SHEAR)
        p = sh.periodic_point(FULL2, "0")
        z, N = sh.homoclinic_point(FULL2, "0", "11")
        tr = cc.psi_transition(A, p, z, N)
        expected = np.linalg.inv(D2 @ D2) @ (SHEAR @ SHEAR)
        assert np.allclose(tr.psi, expected, atol=1e-13)
        assert np.allclose(tr.unstable_part, np.eye(2))

    def test_exit_time_independence(self):
        A = lc(FULL2, D2, POS)
        p = sh.periodic_point(FULL2, "0")
        z, N = sh.homoclinic_point(FULL2, "0", "11")
        psi_a = cc.psi_transition(A, p, z, N).psi
        psi_b = cc.psi_transition(A, p, z, N + 3).psi
        assert np.allclose(psi_a, psi_b, atol=1e-12)

    def test_misaligned_exit_rejected(self):
        gen = {"0": D2, "1": SHEAR}
        A = cc.CocycleSpec(GOLDEN, 1, gen)
        p = sh.periodic_point(GOLDEN, "01")
        z, N = sh.homoclinic_point(GOLDEN, "01", "0")
        with pytest.raises(ValueError, match="misaligned exit time"):
            cc.psi_transition(A, p, z, N)

    def test_window_two_matches_brute_force(self):
        gen = {"00": D2, "01": SHEAR, "10": POS}
        A = cc.CocycleSpec(GOLDEN, 2, gen)
        p = sh.periodic_point(GOLDEN, "0")
        z, N = sh.homoclinic_point(GOLDEN, "0", "10")
        tr = cc.psi_transition(A, p, z, N)
        n = 12
        phi_u = cc.evaluate(A, z.shift(-n), n) @ np.linalg.inv(
            cc.evaluate(A, p.shift(-n), n)
        )
        brute = np.linalg.solve(cc.evaluate(A, p, N), cc.evaluate(A, z, N)) @ phi_u
        assert np.allclose(tr.psi, brute, atol=1e-11)

    def test_constant_cocycle_trivial(self):
        A = lc(FULL2, POS, POS)
        p = sh.periodic_point(FULL2, "0")
        z, N = sh.homoclinic_point(FULL2, "0", "1")
        tr = cc.psi_transition(A, p, z, N)
        assert np.allclose(tr.psi, np.eye(2), atol=1e-12)

    def test_rotated_stretch_closed_form(self):
        g1 = rot(np.pi / 4) @ np.diag([3.0, 1.0 / 3.0])
        A = lc(FULL2, D2, g1)
        p = sh.periodic_point(FULL2, "0")
        z, N = sh.homoclinic_point(FULL2, "0", "1")
        tr = cc.psi_transition(A, p, z, N)
        expected = np.diag([0.5, 2.0]) @ g1
        assert np.allclose(tr.psi, expected, atol=1e-13)


class TestPeriodicEigendata:
    def test_single_symbol(self):
        A = lc(FULL2, D2, POS)
        _, rec = cc.periodic_eigendata(A, sh.periodic_point(FULL2, "0"))
        assert np.allclose(rec.eigenvalues.real, [2.0, 0.5], atol=1e-13)

    def test_two_step_product(self):
        A = lc(FULL2, D2, np.diag([3.0, 1.0 / 3.0]))
        _, rec = cc.periodic_eigendata(A, sh.periodic_point(FULL2, "01"))
        assert np.allclose(rec.eigenvalues.real, [6.0, 1.0 / 6.0], atol=1e-12)

    def test_conformal_pair_moduli(self):
        A = lc(FULL2, 1.5 * rot(0.4), POS)
        _, rec = cc.periodic_eigendata(A, sh.periodic_point(FULL2, "0"))
        assert np.allclose(np.abs(rec.eigenvalues), 1.5, atol=1e-13)
        assert not rec.all_real()

    def test_base_point_independence(self):
        A = lc(FULL2, D2, POS)
        _, rec_p = cc.periodic_eigendata(A, sh.periodic_point(FULL2, "01"))
        _, rec_q = cc.periodic_eigendata(A, sh.periodic_point(FULL2, "10"))
        assert np.allclose(rec_p.eigenvalues, rec_q.eigenvalues, atol=1e-9)

    def test_non_periodic_rejected(self):
        A = lc(FULL2, D2, POS)
        z, _ = sh.homoclinic_point(FULL2, "0", "1")
        with pytest.raises(ValueError, match="periodic"):
            cc.periodic_eigendata(A, z)


class TestSimplicity:
    def test_pinching_and_twisting_pass(self):
        A = lc(FULL2, D2, POS)
        rep = cc.simplicity_check(A, "0", "1")
        assert rep.pinching and rep.twisting and rep.verdict
        assert rep.spectrum.all_real()

    def test_complex_return_spectrum_fails_pinching(self):
        A = lc(FULL2, 1.5 * rot(0.4), POS)
        rep = cc.simplicity_check(A, "0", "1")
        assert not rep.pinching and not rep.verdict

    def test_tiny_gap_fails_pinching(self):
        A = lc(FULL2, np.diag([2.0, 2.0 * (1 + 1e-11)]), POS)
        rep = cc.simplicity_check(A, "0", "1")
        assert not rep.pinching

    def test_diagonal_transition_fails_twisting(self):
        A = lc(FULL2, D2, np.diag([3.0, 1.0 / 3.0]))
        rep = cc.simplicity_check(A, "0", "1")
        assert rep.pinching and not rep.twisting and not rep.verdict
        assert ((1,), (1,)) in rep.failing_pairs

    def test_pinching_check_helper(self):
        A = lc(FULL2, D2, POS)
        p = sh.periodic_point(FULL2, "0")
        assert cc.pinching_check(A, p)
        B = lc(FULL2, 1.5 * rot(0.4), POS)
        assert not cc.pinching_check(B, p)

    def test_rotated_stretch_verdict_true(self):
        A = lc(FULL2, D2, rot(0.7) @ D2)
        rep = cc.simplicity_check(A, "0", "1")
        assert rep.pinching and rep.twisting and rep.verdict

    def test_verdict_invariant_under_conjugation(self):
        # conjugating every generator leaves the eigenbasis form of psi
        # unchanged up to diagonal rescaling, hence the same verdict
        C = np.array([[1.0, 0.3], [-0.2, 1.1]])
        Cinv = np.linalg.inv(C)
        A = lc(FULL2, D2, rot(0.7) @ D2)
        B = lc(FULL2, C @ D2 @ Cinv, C @ rot(0.7) @ D2 @ Cinv)
        ra = cc.simplicity_check(A, "0", "1")
        rb = cc.simplicity_check(B, "0", "1")
        assert ra.verdict and rb.verdict
        assert np.allclose(np.diag(rb.psi), np.diag(ra.psi), atol=1e-10)
        assert np.allclose(rb.psi * rb.psi.T, ra.psi * ra.psi.T, atol=1e-10)


class TestExtendSplitting:
    def test_blocks_lie_in_holonomy_images(self):
        A = lc(FULL2, D2, POS)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "1")
        ext = cc.extend_splitting(A, p, z)
        assert len(ext.blocks_at_z) == 2
        assert ext.min_angle > 1e-6
        M, rec = cc.periodic_eigendata(A, p)
        Q = cc._normalized_eigenbasis(M, rec)
        phi_s = np.linalg.inv(cc.stable_holonomy(A, z, p).matrix)
        phi_u = cc.unstable_holonomy(A, p, z).matrix
        for j, E in enumerate(ext.blocks_at_z):
            F = phi_s @ Q[:, : j + 1]
            G = phi_u @ Q[:, j:]
            assert np.linalg.matrix_rank(np.hstack([F, E]), tol=1e-9) == F.shape[1]
            assert np.linalg.matrix_rank(np.hstack([G, E]), tol=1e-9) == G.shape[1]

    def test_transport_along_orbit(self):
        A = lc(FULL2, D2, POS)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "1")
        ext = cc.extend_splitting(A, p, z)
        moved = ext.blocks_along(A, z, 3)
        T = cc.evaluate(A, z, 3)
        for E, Emoved in zip(ext.blocks_at_z, moved):
            assert np.allclose(T @ E, Emoved)

    def test_swap_alignment_collapses(self):
        swap = np.array([[0.0, 1.0], [-1.0, 0.0]])
        A = lc(FULL2, D2, swap)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "1")
        with pytest.raises(ArithmeticError, match="splitting extension failed"):
            cc.extend_splitting(A, p, z)

    def test_explicit_splitting_matches_default(self):
        A = lc(FULL2, D2, POS)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "1")
        M, rec = cc.periodic_eigendata(A, p)
        Q = cc._normalized_eigenbasis(M, rec)
        ext_default = cc.extend_splitting(A, p, z)
        ext_given = cc.extend_splitting(A, p, z, splitting=[Q[:, :1], Q[:, 1:]])
        for E, F in zip(ext_default.blocks_at_z, ext_given.blocks_at_z):
            assert np.linalg.matrix_rank(np.hstack([E, F]), tol=1e-9) == 1

    def test_coarse_block_splitting(self):
        g0 = np.zeros((3, 3))
        g0[:2, :2] = 2.0 * rot(0.3)
        g0[2, 2] = 0.25
        A = cc.CocycleSpec(FULL2, 1, {"0": g0, "1": g0 @ np.diag([1.1, 1.0, 0.9])})
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "1")
        fast = np.eye(3)[:, :2]
        slow = np.eye(3)[:, 2:]
        ext = cc.extend_splitting(A, p, z, splitting=[fast, slow])
        assert ext.blocks_at_z[0].shape == (3, 2)
        assert ext.blocks_at_z[1].shape == (3, 1)

    def test_bad_splitting_rejected(self):
        A = lc(FULL2, D2, POS)
        p = sh.periodic_point(FULL2, "0")
        z, _ = sh.homoclinic_point(FULL2, "0", "1")
        v = np.array([[1.0], [0.0]])
        with pytest.raises(ValueError, match="general position"):
            cc.extend_splitting(A, p, z, splitting=[v, v])


class TestPerturbations:
    def test_cylinder_perturb_touches_one_word(self):
        A = lc(FULL2, D2, SHEAR)
        B = cc.cylinder_perturb(A, "1", rot(0.2))
        assert np.array_equal(B.generator[(0,)], D2)
        assert np.allclose(B.generator[(1,)], rot(0.2) @ SHEAR)

    def test_symplectic_constraint_enforced(self):
        A = lc(FULL2, D2, SHEAR)
        with pytest.raises(ValueError, match="symplectic"):
            cc.cylinder_perturb(A, "0", np.diag([2.0, 1.0]), constraint="symplectic")

    def test_rotation_family_conformal_slope(self):
        g0 = 1.2 * rot(0.9)
        A = lc(FULL2, g0, D2)
        fam = cc.rotation_perturb_family(A, "0", theta0=0.05)
        assert fam.visits_per_period == 1
        for s in (0.5, 1.0, 2.0):
            M = cc.evaluate(fam.at(s), sh.periodic_point(FULL2, "0"), 1)
            lam = np.linalg.eigvals(M)
            arg = np.angle(lam[np.argmax(lam.imag)])
            assert arg == pytest.approx(0.9 + 0.05 * s, abs=1e-10)

    def test_rotation_family_orientation_negative_base(self):
        g0 = 1.2 * rot(-0.9)
        A = lc(FULL2, g0, D2)
        fam = cc.rotation_perturb_family(A, "0", theta0=0.05)
        M = cc.evaluate(fam.at(1.0), sh.periodic_point(FULL2, "0"), 1)
        lam = np.linalg.eigvals(M)
        arg = np.angle(lam[np.argmax(lam.imag)])
        assert arg == pytest.approx(0.9 + 0.05, abs=1e-10)

    def test_rotation_family_at_zero_is_base(self):
        A = lc(FULL2, 1.2 * rot(0.9), D2)
        fam = cc.rotation_perturb_family(A, "0", theta0=0.05)
        assert fam.at(0.0) is A

    def test_real_spectrum_rejected(self):
        A = lc(FULL2, D2, SHEAR)
        with pytest.raises(ValueError, match="real spectrum"):
            cc.rotation_perturb_family(A, "0", theta0=0.05)

    def test_pair_index_selects_slow_block(self):
        g = np.zeros((4, 4))
        g[:2, :2] = 2.0 * rot(0.3)
        g[2:, 2:] = 0.5 * rot(0.2)
        A = cc.CocycleSpec(FULL2, 1, {"0": g, "1": g})
        fam = cc.rotation_perturb_family(A, "0", theta0=0.05, pair_index=1)
        _, rec = cc.periodic_eigendata(fam.at(0.7), sh.periodic_point(FULL2, "0"))
        by_mod = {round(abs(ev), 6): np.angle(ev) for ev in rec.eigenvalues if ev.imag > 0}
        assert by_mod[2.0] == pytest.approx(0.3, abs=1e-10)
        assert by_mod[0.5] == pytest.approx(0.2 + 0.7 * 0.05, abs=1e-10)

    def test_pair_index_out_of_range(self):
        A = lc(FULL2, 1.2 * rot(0.9), D2)
        with pytest.raises(ValueError, match="pair_index"):
            cc.rotation_perturb_family(A, "0", theta0=0.05, pair_index=1)

    def test_symplectic_family_stays_symplectic(self):
        E = 1.3 * rot(0.4)
        F = np.linalg.inv(E).T
        M4 = np.block([[E, np.zeros((2, 2))], [np.zeros((2, 2)), F]])
        S1 = la.paired_rotation(0.3, 1, 2, 2)
        A = lc(FULL2, M4, S1)
        fam = cc.rotation_perturb_family(A, "0", theta0=0.02)
        assert fam.symplectic
        for s in (0.7, 1.5):
            As = fam.at(s)
            for G in As.generator.values():
                assert la.is_symplectic(G)
            M = cc.evaluate(As, sh.periodic_point(FULL2, "0"), 1)
            lam = np.linalg.eigvals(M)
            big = lam[np.abs(lam) > 1.0]
            arg = np.angle(big[np.argmax(big.imag)])
            assert arg == pytest.approx(0.4 + 0.02 * s, abs=1e-8)
