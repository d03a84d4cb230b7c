import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from doubleris.channels import ChannelParams, DropSeed, realize_drop
from doubleris.geometry import paper_topology
from doubleris.phaseopt import (
    AoSettings,
    CascadeOperators,
    align_to_reference,
    ao_double_ris,
    ao_second_hop_two_ris,
    cascade_f,
    coherent_snr,
    is_unit_modulus,
    lambda_max_span2,
    majorizer_gap,
    majorizer_state,
    majorizer_value,
    mm_fractional_phase,
    mm_objective,
    safe_angle,
    second_hop_snr,
    top_left_singular,
)

from oracles import (
    brute_double_ris,
    brute_mm,
    brute_second_hop,
    crandn,
    dense_lambda_max,
    grid,
    mp_lambda_max,
)

seeds = st.integers(0, 2**32 - 1)


def pair_drop(m, k, seed=0):
    return realize_drop(paper_topology("pair"), m, ChannelParams(), DropSeed(seed, k))


def random_phases(rng, m):
    return np.exp(2j * np.pi * rng.random(m))


# -- settings ------------------------------------------------------------------

def test_settings_validation():
    AoSettings(init="ones")
    AoSettings(init=3)
    for bad in (dict(max_iters=0), dict(rel_tol=0), dict(init="zeros"), dict(init=-1),
                dict(init=True), dict(stop_on="gain")):
        with pytest.raises(ValueError):
            AoSettings(**bad)


def test_seeded_init_is_reproducible():
    a = AoSettings(init=5).initial(4, 2)
    b = AoSettings(init=5).initial(4, 2)
    assert all(np.array_equal(x, y) for x, y in zip(a, b))
    assert all(is_unit_modulus(x) for x in a)


def test_safe_angle_of_zero():
    assert safe_angle(0j) == 0.0
    np.testing.assert_array_equal(safe_angle(np.array([0, -1, 1j])), [0, np.pi, np.pi / 2])


# -- cascade --------------------------------------------------------------------

def test_cascade_f_examples():
    r = np.random.default_rng(0)
    h2, g, h1 = crandn(r, 1), crandn(r, 1, 1), crandn(r, 1)
    assert cascade_f(h2, g, h1)[0, 0] == h2[0] * g[0, 0] * h1[0]
    assert not np.any(cascade_f(crandn(r, 3), np.zeros((3, 3)), crandn(r, 3)))
    with pytest.raises(ValueError):
        cascade_f(crandn(r, 3), crandn(r, 3, 2), crandn(r, 3))


@given(seeds)
def test_cascade_f_triple_product(seed):
    r = np.random.default_rng(seed)
    h2, g, h1 = crandn(r, 3), crandn(r, 3, 3), crandn(r, 3)
    phi, theta = random_phases(r, 3), random_phases(r, 3)
    direct = h2 @ np.diag(phi) @ g @ np.diag(theta) @ h1
    assert phi @ cascade_f(h2, g, h1) @ theta == pytest.approx(direct, rel=1e-12, abs=1e-14)


def test_cascade_operators_from_drop():
    d = pair_drop(4, 0)
    ops = CascadeOperators.from_drop(d)
    np.testing.assert_allclose(ops.q_mat, np.diag(d.h_i2r2) @ d.g @ np.diag(d.h_i1r1))
    np.testing.assert_allclose(ops.b_vec, d.h_i2d * (d.g @ (ops.theta * d.h_i1s)))
    np.testing.assert_allclose(ops.a_vec, d.h_i2d * d.h_i2r2)
    # theta serves R1 coherently
    s = d.h_sr1 + ops.theta @ (d.h_i1r1 * d.h_i1s)
    assert abs(s) == pytest.approx(abs(d.h_sr1) + np.abs(d.h_i1r1 * d.h_i1s).sum(), rel=1e-12)
    plain = CascadeOperators.from_drop(realize_drop(paper_topology(), 4, ChannelParams(), DropSeed(0, 0)))
    assert plain.q_mat is None and plain.a_vec is None


# -- closed forms -----------------------------------------------------------------

def test_align_examples():
    v = align_to_reference(1.0, np.array([1, 1]))
    np.testing.assert_allclose(v, [1, 1])
    v = align_to_reference(1j, np.array([-1.0]))
    assert abs(1j + v @ np.array([-1.0])) == pytest.approx(2.0)


@given(seeds, st.integers(1, 16))
def test_align_magnitude_identity(seed, m):
    r = np.random.default_rng(seed)
    ref, c = complex(crandn(r, 1)[0]), crandn(r, m)
    v = align_to_reference(ref, c)
    assert is_unit_modulus(v)
    want = abs(ref) + math.fsum(np.abs(c))
    assert abs(ref + v @ c) == pytest.approx(want, rel=1e-12)


def test_align_handles_zero_entries():
    v = align_to_reference(0.0, np.array([0.0, 2j]))
    assert is_unit_modulus(v)
    assert v[0] == 1


def test_coherent_snr_examples():
    assert coherent_snr(0.0, 1 + 1j, np.ones(3)) == 0.0
    assert coherent_snr(1.0, 0.0, np.ones(3)) == pytest.approx(9.0)


@given(seeds, st.floats(1e-3, 1e3), st.floats(1e-3, 1e6))
def test_coherent_snr_scale_covariance(seed, rho, c):
    r = np.random.default_rng(seed)
    ref, casc = complex(crandn(r, 1)[0]), crandn(r, 4)
    assert coherent_snr(c * rho, ref, casc) == pytest.approx(c * coherent_snr(rho, ref, casc), rel=1e-12)
    assert coherent_snr(rho, ref, casc) >= rho * abs(ref) ** 2


def test_coherent_snr_dominates_quantized_grid():
    r = np.random.default_rng(1)
    g = grid()
    for _ in range(20):
        ref, c = complex(crandn(r, 1)[0]), crandn(r, 2)
        best = max(abs(ref + c[0] * x + c[1] * y) ** 2 for x in g for y in g)
        val = coherent_snr(1.0, ref, c)
        assert val >= best * (1 - 1e-12)
        assert math.sqrt(val) - math.sqrt(best) <= 2 * math.sin(math.pi / 128) * np.abs(c).sum()


# -- double-surface AO ----------------------------------------------------------------

def test_ao_rank_one():
    r = np.random.default_rng(2)
    b, a = crandn(r, 6), crandn(r, 6)
    res = ao_double_ris(np.outer(b, a), 2.0)
    assert res.iters <= 2
    assert res.snr == pytest.approx(2.0 * np.abs(b).sum() ** 2 * np.abs(a).sum() ** 2, rel=1e-12)


@pytest.mark.parametrize("init", ["spectral", "ones"])
def test_ao_null_channel(init):
    res = ao_double_ris(np.zeros((4, 4), complex), 1.0, AoSettings(init=init))
    assert res.snr == 0.0 and res.iters == 1
    assert is_unit_modulus(res.theta) and is_unit_modulus(res.phi)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 12), st.sampled_from(["spectral", "ones", 7]))
def test_ao_monotone_and_unit_modulus(seed, m, init):
    r = np.random.default_rng(seed)
    f = crandn(r, m, m)
    res = ao_double_ris(f, 1.0, AoSettings(init=init))
    assert all(b >= a * (1 - 1e-12) for a, b in zip(res.trace, res.trace[1:]))
    assert is_unit_modulus(res.theta) and is_unit_modulus(res.phi)
    assert res.snr == pytest.approx(abs(res.phi @ f @ res.theta) ** 2, rel=1e-12)


@pytest.mark.parametrize("k", range(5))
def test_ao_block_optimality(k):
    f = CascadeOperators.from_drop(pair_drop(8, k)).f
    res = ao_double_ris(f, 1.0)
    # the last update is phi given theta: a global block optimum
    for i in range(8):
        for delta in (0.01, -0.01):
            phi = res.phi.copy()
            phi[i] *= np.exp(1j * delta)
            assert abs(phi @ f @ res.theta) ** 2 <= res.snr * (1 + 1e-12)


def test_ao_matches_brute_force_on_drops():
    for k in range(40):
        f = CascadeOperators.from_drop(pair_drop(2, k, seed=1)).f
        res = ao_double_ris(f, 1.0)
        assert math.sqrt(res.snr) >= 0.99 * brute_double_ris(f)


def test_ao_large_surface_uses_power_iteration():
    f = CascadeOperators.from_drop(pair_drop(200, 0)).f
    x = top_left_singular(f)
    s1 = np.linalg.svd(f, compute_uv=False)[0]
    assert np.linalg.norm(x) == pytest.approx(1.0)
    assert np.linalg.norm(f.conj().T @ x) >= 0.95 * s1
    spectral = ao_double_ris(f, 1.0).snr
    ones = ao_double_ris(f, 1.0, AoSettings(init="ones")).snr
    assert spectral >= 0.9 * ones


# -- second-hop AO ------------------------------------------------------------------------

def test_second_hop_decoupled_case():
    r = np.random.default_rng(3)
    u1, h = crandn(r, 5), 0.3 - 0.2j
    res = ao_second_hop_two_ris(np.zeros((5, 5)), u1, np.zeros(5), h, 4.0)
    assert res.snr == pytest.approx(4.0 * (abs(h) + np.abs(u1).sum()) ** 2, rel=1e-12)


def test_second_hop_null():
    z = np.zeros(3)
    res = ao_second_hop_two_ris(np.zeros((3, 3)), z, z, 0.0, 1.0)
    assert res.snr == 0.0
    with pytest.raises(ValueError):
        ao_second_hop_two_ris(np.zeros((3, 2)), z, z, 0.0, 1.0)


@settings(max_examples=50, deadline=None)
@given(seeds, st.integers(1, 10), st.sampled_from(["spectral", "ones", 3]))
def test_second_hop_monotone(seed, m, init):
    r = np.random.default_rng(seed)
    q, u1, u2, h = crandn(r, m, m), crandn(r, m), crandn(r, m), complex(crandn(r, 1)[0])
    res = ao_second_hop_two_ris(q, u1, u2, h, 1.0, AoSettings(init=init))
    assert all(b >= a * (1 - 1e-12) for a, b in zip(res.trace, res.trace[1:]))
    assert is_unit_modulus(res.psi1) and is_unit_modulus(res.psi2)
    assert res.snr == pytest.approx(second_hop_snr(1.0, h, u1, u2, q, res.psi1, res.psi2), rel=1e-12)


def test_second_hop_block_optimality():
    ops = CascadeOperators.from_drop(pair_drop(6, 0))
    res = ao_second_hop_two_ris(ops.q_mat, ops.u1, ops.u2, ops.h_r1r2, 1.0)
    for i in range(6):
        for delta in (0.01, -0.01):
            p2 = res.psi2.copy()
            p2[i] *= np.exp(1j * delta)
            val = second_hop_snr(1.0, ops.h_r1r2, ops.u1, ops.u2, ops.q_mat, res.psi1, p2)
            assert val <= res.snr * (1 + 1e-12)


def test_second_hop_matches_brute_force_on_drops():
    for k in range(8):
        ops = CascadeOperators.from_drop(pair_drop(2, k, seed=2))
        res = ao_second_hop_two_ris(ops.q_mat, ops.u1, ops.u2, ops.h_r1r2, 1.0)
        best = brute_second_hop(ops.q_mat, ops.u1, ops.u2, ops.h_r1r2)
        assert math.sqrt(res.snr) >= 0.99 * best


# -- rank-2 eigenvalue -----------------------------------------------------------------------

def test_lambda_max_examples():
    r = np.random.default_rng(4)
    b = crandn(r, 5)
    assert lambda_max_span2(b, np.zeros(5), 2.0, -3.0) == pytest.approx(2.0 * np.vdot(b, b).real)
    e1, e2 = np.eye(3)[0] * 2, np.eye(3)[1] * 3
    assert lambda_max_span2(e1, e2, 1.0, 0.5) == pytest.approx(max(4.0, 4.5))
    assert lambda_max_span2(e1, e2, 1.0, -0.5) == pytest.approx(4.0)
    assert lambda_max_span2(np.zeros(3), np.zeros(3), 1.0, -1.0) == 0.0
    # M = 1: the matrix is the scalar itself and may be negative
    assert lambda_max_span2(np.array([1.0]), np.array([2.0]), 1.0, -1.0) == pytest.approx(-3.0)


@settings(max_examples=200, deadline=None)
@given(seeds, st.integers(1, 8), st.floats(0, 10), st.floats(-10, 10))
def test_lambda_max_matches_dense_solver(seed, m, wb, wa):
    r = np.random.default_rng(seed)
    b, a = crandn(r, m), crandn(r, m)
    ref, scale = dense_lambda_max(b, a, wb, wa)
    assert abs(lambda_max_span2(b, a, wb, wa) - ref) <= 1e-10 * max(abs(ref), scale, 1e-300)
    exact = mp_lambda_max(b, a, wb, wa)
    assert abs(lambda_max_span2(b, a, wb, wa) - exact) <= 1e-12 * max(abs(exact), scale * 1e-3, 1e-300)


@pytest.mark.parametrize("eps", [1e-3, 1e-7, 1e-11])
@pytest.mark.parametrize("wa", [-1.0, 1.0, -0.999])
def test_lambda_max_nearly_parallel(eps, wa):
    r = np.random.default_rng(5)
    b = crandn(r, 6)
    a = b + eps * crandn(r, 6)
    exact = mp_lambda_max(b, a, 1.0, wa)
    assert lambda_max_span2(b, a, 1.0, wa) == pytest.approx(exact, rel=1e-9)


def test_lambda_max_extreme_weights():
    r = np.random.default_rng(6)
    b, a = crandn(r, 4), crandn(r, 4)
    for wb, wa in [(0.0, 3e-183), (1e-200, -1e-200), (1e150, 1e150), (2.0, -1e-20)]:
        exact = mp_lambda_max(b, a, wb, wa)
        assert lambda_max_span2(b, a, wb, wa) == pytest.approx(exact, rel=1e-10)


def test_lambda_max_two_elements_both_negative():
    r = np.random.default_rng(7)
    b, a = crandn(r, 2), crandn(r, 2)
    ref, _ = dense_lambda_max(b, a, -1.0, -2.0)
    assert ref < 0
    assert lambda_max_span2(b, a, -1.0, -2.0) == pytest.approx(ref, rel=1e-10)


# -- Dinkelbach + MM --------------------------------------------------------------------------

def random_mm(r, m):
    return dict(a=crandn(r, m), b=crandn(r, m), h=complex(crandn(r, 1)[0]),
                p1=float(10 ** r.uniform(-2, 2)), p2=float(10 ** r.uniform(-2, 2)),
                sigma2=float(10 ** r.uniform(-1, 1)))


def run_mm(inst, **kw):
    return mm_fractional_phase(inst["a"], inst["b"], inst["h"], inst["p1"], inst["p2"],
                               inst["sigma2"], AoSettings(**kw))


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from([1, 2, 4, 8, 16]))
def test_mm_monotone(seed, m):
    inst = random_mm(np.random.default_rng(seed), m)
    res = run_mm(inst)
    tr = res.state.objective_trace
    assert all(b <= a + 1e-9 * a for a, b in zip(tr, tr[1:]))
    assert is_unit_modulus(res.phi)
    assert res.sinr == pytest.approx(1 / tr[-1], rel=1e-12)
    assert res.state.mu >= 0


def test_mm_fully_conflicting_instance():
    r = np.random.default_rng(6)
    a = crandn(r, 6)
    res = mm_fractional_phase(a, a, 0.5, 1.0, 1.0, 1.0, AoSettings(max_iters=200, rel_tol=1e-12))
    tr = res.state.objective_trace
    assert all(y <= x * (1 + 1e-9) for x, y in zip(tr, tr[1:]))


def test_mm_without_interference_is_coherent():
    r = np.random.default_rng(7)
    a, h = crandn(r, 6), complex(crandn(r, 1)[0])
    res = mm_fractional_phase(a, crandn(r, 6), h, 0.0, 2.0, 1.0, AoSettings(max_iters=200, rel_tol=1e-14))
    want = 2.0 * (abs(h) + np.abs(a).sum()) ** 2
    assert res.sinr == pytest.approx(want, rel=1e-9)
    ref = align_to_reference(h, a)
    assert np.allclose(res.phi, ref, atol=1e-4)


def test_mm_scalar_case_is_exact():
    a, h = np.array([0.7 - 0.1j]), 0.3 + 0.4j
    res = mm_fractional_phase(a, np.array([1.0 + 0j]), h, 0.0, 1.0, 1.0)
    np.testing.assert_allclose(res.phi, align_to_reference(h, a), atol=1e-12)


def test_mm_degenerate_denominator():
    r = np.random.default_rng(8)
    a, b = crandn(r, 3), crandn(r, 3)
    res = mm_fractional_phase(a, b, 0.2, 1.0, 0.0, 1.0)
    assert res.sinr == 0.0 and math.isinf(res.state.objective_trace[0])
    res = mm_fractional_phase(np.zeros(3), b, 0.0, 1.0, 1.0, 1.0)
    assert res.sinr == 0.0
    with pytest.raises(ValueError):
        mm_fractional_phase(a, b, 0.2, -1.0, 1.0, 1.0)
    with pytest.raises(ValueError):
        mm_fractional_phase(a, b, 0.2, 1.0, 1.0, 0.0)


def test_mm_matches_brute_force_on_drops():
    for k in range(30):
        ops = CascadeOperators.from_drop(pair_drop(2, k, seed=3))
        p = 10 ** 5
        res = mm_fractional_phase(ops.a_vec, ops.b_vec, ops.h_r2d, p / 2, p / 2, 1.0)
        u = mm_objective(res.phi, ops.a_vec, ops.b_vec, ops.h_r2d, p / 2, p / 2, 1.0)
        assert u <= brute_mm(ops.a_vec, ops.b_vec, ops.h_r2d, p / 2, p / 2, 1.0) * 1.01


@settings(max_examples=100, deadline=None)
@given(seeds, st.sampled_from([1, 2, 4, 8, 16]))
def test_majorizer_bounds_objective(seed, m):
    r = np.random.default_rng(seed)
    inst = random_mm(r, m)
    phi0 = random_phases(r, m)
    st_ = majorizer_state(inst["a"], inst["b"], inst["h"], inst["p1"], inst["p2"], inst["sigma2"], phi0)
    args = (inst["p1"], inst["p2"], inst["h"], inst["sigma2"])
    scale = inst["sigma2"] + inst["p1"] * np.abs(inst["b"]).sum() ** 2 + st_.mu * inst["p2"] * (
        abs(inst["h"]) + np.abs(inst["a"]).sum()) ** 2
    assert abs(majorizer_gap(phi0, st_, *args)) <= 1e-9 * max(scale, 1.0)
    for _ in range(10):
        assert majorizer_gap(random_phases(r, m), st_, *args) >= -1e-9 * max(scale, 1.0)
    # the parametric objective vanishes at the point that defines mu
    assert majorizer_value(phi0, st_) == pytest.approx(0.0, abs=1e-9 * max(scale, 1.0))


def test_quadratic_form_is_real():
    r = np.random.default_rng(9)
    b, a = crandn(r, 5), crandn(r, 5)
    x = 2.0 * np.outer(b, b.conj()) - 0.7 * np.outer(a, a.conj())
    phi = random_phases(r, 5)
    q = phi @ x @ phi.conj()
    assert abs(q.imag) <= 1e-12 * abs(q)
