import math

import numpy as np
import pytest

from clrlab import constants as K
from clrlab import verify as V
from clrlab.linalg import HermitianOperator, apply_fn, eigh
from clrlab.measure import FiniteMeasureSpace, WeightedFunction, weak_lp_norm
from clrlab.schatten import weak_schatten_norm
from clrlab.linalg import singular_values
from clrlab.torus import (MagneticField, density_diag, dft, magnetic_laplacian, make_grid, multiplier,
                          reciprocal_symbol, symbol_fractional)
from oracles import random_hermitian


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def unit_space(n):
    return FiniteMeasureSpace.uniform(n)


# -- contractions ----------------------------------------------------------

def test_contraction_spectrum(rng):
    for _ in range(100):
        n, m = int(rng.integers(1, 8)), int(rng.integers(1, 3))
        delta = V.sample_contraction(unit_space(n), m, rng)
        lam = eigh(delta).eigenvalues
        assert lam.min() >= -1e-12 and lam.max() <= 1 + 1e-12
    X = unit_space(3)
    assert np.all(V.sample_contraction(X, 1, rng, "zero").matrix == 0)
    assert np.array_equal(V.sample_contraction(X, 2, rng, "identity").matrix, np.eye(6))
    r1 = V.sample_contraction(X, 1, rng, "rank_one")
    assert np.sum(eigh(r1).eigenvalues > 0.5) == 1


def test_sample_gamma(rng):
    g = make_grid(2, 4, 3.0)
    A = multiplier(g, reciprocal_symbol(symbol_fractional(g, 0.6)))
    gamma, _ = V.sample_gamma(A, rng, "identity")
    assert np.allclose(gamma.matrix, A.matrix, atol=1e-12)
    gamma, _ = V.sample_gamma(A, rng, "zero")
    assert np.allclose(gamma.matrix, 0)
    R = apply_fn(A, "pinv_sqrt").matrix
    for _ in range(20):
        gamma, _ = V.sample_gamma(A, rng)
        lam = np.linalg.eigvalsh(R @ gamma.matrix @ R)
        assert lam.min() >= -1e-10 and lam.max() <= 1 + 1e-10


# -- variational -----------------------------------------------------------

def test_variational_examples(rng):
    H = HermitianOperator(unit_space(3), np.diag([3.0, 1.0, -2.0]))
    r = V.check_variational(H, 2.0, rng)
    assert r.passed and r.lhs == pytest.approx(1) and r.rhs == pytest.approx(1)
    M = random_hermitian(rng, 5)
    mu = float(np.linalg.eigvalsh(M).max()) + 0.1
    r = V.check_variational(HermitianOperator(unit_space(5), M), mu, rng)
    assert r.passed and r.lhs == 0 and r.rhs == 0
    for _ in range(10):
        M = random_hermitian(rng, 9)
        r = V.check_variational(HermitianOperator(unit_space(9), M), float(rng.uniform(0.01, 2)), rng)
        assert r.passed
        assert abs(r.lhs - r.rhs) <= 1e-10 * max(r.lhs, 1e-300)


# -- Rumin -----------------------------------------------------------------

def test_rumin_edge_cases(rng):
    g = make_grid(1, 9, 4.0)
    a = reciprocal_symbol(symbol_fractional(g, 0.3))
    A = multiplier(g, a)
    p = 2.0
    zero = HermitianOperator(g.position_space, np.zeros((9, 9)))
    r = V.check_rumin(g, a, p, zero)
    assert r.passed and r.lhs == 0 and r.rhs == 0
    r = V.check_rumin(g, a, p, A)
    assert r.lhs == pytest.approx(8)  # identity on the mean-zero range
    # gamma = A has the translation-invariant density sum_k v_k a_k
    rho = np.sum(g.momentum_space.weights * a.values)
    pc = p / (p - 1)
    expected = K.rumin_constant(p) * weak_lp_norm(a, p) ** (-pc) * g.L * rho ** pc
    assert r.rhs == pytest.approx(expected, rel=1e-10)
    assert r.passed


def test_rumin_random_and_rejects(rng):
    for d, p in ((1, 1.5), (2, 2.0), (2, 3.0)):
        g = make_grid(d, 5 if d == 2 else 11, 2.5)
        a = g.momentum_function(rng.uniform(0.1, 3, g.size))
        A = multiplier(g, a)
        for _ in range(10):
            gamma, _ = V.sample_gamma(A, rng)
            assert V.check_rumin(g, a, p, gamma, A=A).passed
    g = make_grid(1, 4)
    with pytest.raises(ValueError):
        V.check_rumin(g, g.momentum_function([1.0, -1.0, 1.0, 1.0]), 2.0, None)
    with pytest.raises(ValueError):
        V.check_rumin(g, g.momentum_function(np.ones(4)), 1.0, None)


# -- trace bound and Cwikel -------------------------------------------------

def test_theorem_main_rank_one():
    for d, n, L, p in ((1, 6, 2.0, 2.0), (2, 3, 5.0, 1.5)):
        g = make_grid(d, n, L)
        a = np.zeros(g.size)
        a[1] = 1.0
        b = np.zeros(g.size)
        b[2] = 1.0
        mu = 0.3 * n ** -d
        r = V.check_theorem_main(g, g.momentum_function(a), g.position_function(b), p, mu)
        assert r.lhs == pytest.approx(n ** -d - mu, rel=1e-10)
        assert r.rhs == pytest.approx(mu ** (1 - p) * K.main_prefactor(p) * n ** -d, rel=1e-12)
        assert r.passed and r.detail == V.DISCRETE


def test_theorem_main_zero_and_rejects(rng):
    g = make_grid(2, 4, 1.0)
    a = g.momentum_function(rng.uniform(0, 2, g.size))
    r = V.check_theorem_main(g, a, g.position_function(np.zeros(g.size)), 2.0, 0.1)
    assert r.passed and r.lhs == 0
    with pytest.raises(ValueError):
        V.check_theorem_main(g, a, g.position_function(-np.ones(g.size)), 2.0, 0.1)
    with pytest.raises(ValueError):
        V.check_theorem_main(g, a, g.position_function(np.ones(g.size)), 2.0, 0.0)


def test_corollary_rank_one_and_zero(rng):
    g = make_grid(2, 3, 1.7)
    f = np.zeros(g.size)
    f[4] = 1.0
    gg = np.zeros(g.size)
    gg[7] = 1.0
    for q in (2.5, 4.0):
        r = V.check_corollary_cwikel(g, g.position_function(f), g.momentum_function(gg), q)
        vw = g.size ** -1.0
        assert r.lhs == pytest.approx(vw ** (q / 2), rel=1e-10)
        assert r.rhs == pytest.approx(K.cwikel_prefactor(q) * vw, rel=1e-12)
        assert r.passed
    r = V.check_corollary_cwikel(g, g.position_function(np.zeros(g.size)),
                                 g.momentum_function(rng.uniform(0, 1, g.size)), 3.0)
    assert r.passed and r.lhs == 0
    with pytest.raises(ValueError):
        V.check_corollary_cwikel(g, g.position_function(f), g.momentum_function(gg), 2.0)


def _torus_block_model(g, m, rng):
    Phi, _ = dft(g)
    U = np.zeros((g.size * m, g.size * m), dtype=complex)
    for x in range(g.size):
        Z = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
        U[x * m:(x + 1) * m, x * m:(x + 1) * m] = np.linalg.qr(Z)[0]
    return np.kron(Phi, np.eye(m)) @ U


def test_cwikelop_scalar_reduction(rng):
    g = make_grid(1, 8, 3.0)
    Phi, _ = dft(g)
    f = rng.uniform(0, 2, g.size)
    gv = rng.uniform(0, 2, g.size)
    for q in (3.0, 4.0):
        fb = WeightedFunction(g.position_space, f[:, None, None])
        gb = WeightedFunction(g.momentum_space, gv[:, None, None])
        op = V.check_cwikelop(g.position_space, g.momentum_space, Phi, fb, gb, q, mus=[0.1, 1.0])
        sc = V.check_corollary_cwikel(g, g.position_function(f), g.momentum_function(gv), q)
        assert op.passed and sc.passed
        assert op.lhs == pytest.approx(sc.lhs, rel=1e-10)
        assert op.params["C"] == pytest.approx(1.0)


def test_cwikelop_diagonal_blocks_decouple(rng):
    g = make_grid(1, 6, 2.0)
    m = 2
    Phi, _ = dft(g)
    f = rng.uniform(0, 2, (g.size, m))
    gv = rng.uniform(0, 2, (g.size, m))
    fb = WeightedFunction(g.position_space, np.stack([np.diag(r) for r in f]))
    gb = WeightedFunction(g.momentum_space, np.stack([np.diag(r) for r in gv]))
    big = np.kron(Phi, np.eye(m))
    F = np.diag(f.ravel())
    G = np.diag(gv.ravel())
    s_block = np.sort(singular_values(F @ big.conj().T @ G))
    s_scalar = np.sort(np.concatenate([
        singular_values(V.cwikel_operator(g, g.position_function(f[:, a]), g.momentum_function(gv[:, a])))
        for a in range(m)]))
    assert np.allclose(s_block, s_scalar, atol=1e-12)
    r = V.check_cwikelop(g.position_space, g.momentum_space, big, fb, gb, 3.0)
    assert r.lhs == pytest.approx(weak_schatten_norm(s_scalar, 3.0) ** 3, rel=1e-10)


def test_cwikelop_random(rng):
    for _ in range(20):
        m = 2
        g = make_grid(int(rng.integers(1, 3)), 3, float(rng.uniform(1, 5)))
        Phi = _torus_block_model(g, m, rng)
        Z = rng.standard_normal((g.size, m, m)) + 1j * rng.standard_normal((g.size, m, m))
        fb = WeightedFunction(g.position_space, Z @ np.conj(np.swapaxes(Z, 1, 2)))
        Z = rng.standard_normal((g.size, m, m)) + 1j * rng.standard_normal((g.size, m, m))
        gb = WeightedFunction(g.momentum_space, Z @ np.conj(np.swapaxes(Z, 1, 2)))
        r = V.check_cwikelop(g.position_space, g.momentum_space, Phi, fb, gb, float(rng.choice([3, 4])),
                             mus=10 ** rng.uniform(-2, 2, 5))
        assert r.passed


def test_cwikelop_rejects_bad_blocks(rng):
    g = make_grid(1, 4, 1.0)
    Phi, _ = dft(g)
    f2 = WeightedFunction(g.position_space, np.stack([np.eye(2)] * 4))
    g1 = WeightedFunction(g.momentum_space, np.ones((4, 1, 1)))
    with pytest.raises(ValueError):
        V.check_cwikelop(g.position_space, g.momentum_space, Phi, f2, g1, 3.0)


# -- Young ---------------------------------------------------------------

def test_pointwise_young(rng):
    X = FiniteMeasureSpace(rng.uniform(0.5, 2, 7))
    b = WeightedFunction(X, rng.uniform(0, 3, 7))
    r = V.check_pointwise_young(b, WeightedFunction(X, np.zeros(7)), 0.5, 2.0, 1.7)
    assert r.passed and r.lhs == 0
    for p in (1.2, 2.0, 4.5):
        rho = V.young_optimizer(b.values, 0.5, 2.0, p)
        r = V.check_pointwise_young(b, WeightedFunction(X, rho), 0.5, 2.0, p)
        assert r.passed
        assert r.lhs == pytest.approx(r.rhs, rel=1e-9)
    with pytest.raises(ValueError):
        V.check_pointwise_young(b, WeightedFunction(X, -np.ones(7)), 0.5, 2.0, 2.0)
    with pytest.raises(ValueError):
        V.check_pointwise_young(b, b, 0.0, 2.0, 2.0)


# -- Birman-Schwinger and CLR ------------------------------------------------

def test_birman_schwinger_hand_case():
    X = unit_space(2)
    r = V.check_birman_schwinger(HermitianOperator(X, np.eye(2)), WeightedFunction(X, [-2.0, -0.5]))
    assert r.passed and r.lhs == 1 and r.rhs == 1
    r = V.check_birman_schwinger(HermitianOperator(X, np.eye(2)), WeightedFunction(X, [2.0, 0.5]))
    assert r.passed and r.lhs == 0 and r.detail == "N(0,T+V)=0"
    with pytest.raises(V.DegenerateDraw):
        V.check_birman_schwinger(HermitianOperator(X, np.eye(2)), WeightedFunction(X, [-1.0, 0.0]))


def test_birman_schwinger_with_kernel_and_blocks(rng):
    g = make_grid(2, 4, 2.0)
    T = magnetic_laplacian(g, MagneticField.zero(g))  # constants in the kernel
    for _ in range(10):
        r = V.check_birman_schwinger(T, g.position_function(rng.normal(-3, 5, g.size)))
        assert r.passed
    Tb = HermitianOperator(g.position_space, np.kron(T.matrix, np.eye(2)), 2)
    Z = rng.standard_normal((g.size, 2, 2))
    Vb = WeightedFunction(g.position_space, 3 * (Z + np.swapaxes(Z, 1, 2)))
    assert V.check_birman_schwinger(Tb, Vb).passed


def _proj_le_diag_max(T, E, scale=None):
    """Oracle: max_x ||(T^{-1} chi_(0,E](T))(x,x)|| via explicit spectral calculus."""
    P = apply_fn(T, "proj_le", E).matrix
    R = apply_fn(T, "pinv").matrix
    M = R @ P
    blocks = density_diag(HermitianOperator(T.space, 0.5 * (M + M.conj().T), T.block_dim)).values
    if T.block_dim == 1:
        return float(np.max(np.abs(blocks)))
    return float(np.max(np.linalg.norm(blocks, 2, axis=(1, 2))))


def test_extract_A_matches_direct_oracle():
    g = make_grid(1, 9, 2 * np.pi)
    T = multiplier(g, symbol_fractional(g, 1.0))
    nu = 3.0
    lam = np.unique(np.round(eigh(T).eigenvalues, 10))
    lam = lam[lam > 1e-9]
    direct = max(E ** (-(nu - 2) / 2) * _proj_le_diag_max(T, E * (1 + 1e-12)) for E in lam)
    assert V.extract_A(T, nu) == pytest.approx(direct, rel=1e-12)
    # translation invariance: diagonal equals sum_{a_k <= E} v_k / a_k
    a = symbol_fractional(g, 1.0).values
    v = g.momentum_space.weights[0]
    tinv = max(E ** (-(nu - 2) / 2) * np.sum(v / a[(a > 0) & (a <= E + 1e-9)]) for E in lam)
    assert V.extract_A(T, nu) == pytest.approx(tinv, rel=1e-12)


def test_extract_A_scalar_and_scaling(rng):
    w = rng.uniform(0.5, 2, 5)
    X = FiniteMeasureSpace(w)
    for c, nu in ((0.7, 3.0), (4.0, 2.5)):
        T = HermitianOperator(X, c * np.eye(5))
        # the identity has diagonal kernel 1/w(x)
        assert V.extract_A(T, nu) == pytest.approx(c ** (-nu / 2) / w.min(), rel=1e-12)
    g = make_grid(2, 4, 3.0)
    T = magnetic_laplacian(g, MagneticField.random(g, rng))
    for nu in (2.5, 4.0):
        assert V.extract_A(T * 2.0, nu) == pytest.approx(2 ** (-nu / 2) * V.extract_A(T, nu), rel=1e-10)
    Tb = HermitianOperator(T.space, np.kron(T.matrix, np.eye(2)), 2)
    assert V.extract_A(Tb, 3.0) == pytest.approx(V.extract_A(T, 3.0), rel=1e-10)
    with pytest.raises(ValueError):
        V.extract_A(T, 2.0)


def test_clr_cases(rng):
    g = make_grid(2, 5, 2.0)
    T = multiplier(g, symbol_fractional(g, 0.5))
    r = V.check_clr(T, g.position_function(rng.uniform(0, 1, g.size)), 4.0)
    assert r.passed and r.lhs == 0
    rhs = []
    for c in (1e2, 1e3, 1e4):
        Vv = np.zeros(g.size)
        Vv[3] = -c
        r = V.check_clr(T, g.position_function(Vv), 4.0)
        assert r.passed and r.lhs >= 1
        rhs.append(r.rhs)
    assert rhs[1] / rhs[0] == pytest.approx(10 ** 2) and rhs[2] / rhs[1] == pytest.approx(10 ** 2)
    with pytest.raises(ValueError):
        V.check_clr(T, g.position_function(np.zeros(g.size)), 2.0)


def test_clr_block_constant_choice(rng):
    g = make_grid(1, 8, 3.0)
    T = multiplier(g, symbol_fractional(g, 0.25))
    Vv = rng.normal(-20, 10, g.size)
    sc = V.check_clr(T, g.position_function(Vv), 4.0)
    Tb = HermitianOperator(T.space, np.kron(T.matrix, np.eye(2)), 2)
    blk = V.check_clr(Tb, WeightedFunction(g.position_space, Vv[:, None, None] * np.eye(2)), 4.0)
    assert blk.lhs == 2 * sc.lhs
    assert blk.rhs == pytest.approx(2 * sc.rhs * K.cnu_general(4.0) / K.cnu_scalar(4.0), rel=1e-10)
    assert sc.passed and blk.passed


# -- Lemma ass -------------------------------------------------------------

def test_lemma_ass_scalar_closed_form():
    X = unit_space(4)
    c, nu = 2.0, 3.0
    T = HermitianOperator(X, c * np.eye(4))
    r = V.check_lemma_ass(T, nu, np.logspace(-2, 2, 9), [0.5, 2.0, 10.0])
    assert r.passed
    Cp = (nu / (2 * math.e * c)) ** (nu / 2)
    assert r.params["Cprime"] == pytest.approx(Cp, rel=1e-12)
    assert r.params["Bprime"] == pytest.approx(c ** (-nu / 2), rel=1e-12)
    # the projection bound is attained at E = c
    assert "projection ratio 1" in r.detail


def test_lemma_ass_random_and_domain(rng):
    for _ in range(10):
        g = make_grid(int(rng.integers(1, 3)), 4, float(rng.uniform(1, 4)))
        T = multiplier(g, g.momentum_function(rng.uniform(0.1, 5, g.size)))
        r = V.check_lemma_ass(T, 3.0, np.logspace(-2, 2, 11), np.logspace(-2, 2, 11))
        assert r.passed
    g = make_grid(1, 6, 6.0)
    T = magnetic_laplacian(g, MagneticField.zero(g))
    with pytest.raises(ValueError):
        V.check_lemma_ass(T, 1.0, [1.0], [1.0])
    assert V.check_lemma_ass(T, 3.0, np.logspace(-1, 1, 5), [0.5, 1, 2]).passed


# -- diamagnetic -------------------------------------------------------------

def test_diamagnetic_engine(rng):
    g = make_grid(2, 4, 4.0)
    T0 = magnetic_laplacian(g, MagneticField.zero(g))
    r = V.check_diamagnetic(T0, T0)
    assert r.passed and r.lhs <= 1e-12
    r = V.check_diamagnetic(magnetic_laplacian(g, MagneticField.random(g, rng)), T0)
    assert r.passed and r.ratio <= 1 + 1e-8


# -- Sobolev ---------------------------------------------------------------

def test_sobolev_single_mode():
    g = make_grid(1, 8, 3.0)
    s = 0.3
    k = g.momenta[g.zero_mode + 1]
    psi = np.exp(1j * g.positions @ k)
    r = V.check_sobolev_rank_one(g, psi, s)
    p = 1 / (2 * s)
    pc = p / (p - 1)
    a = reciprocal_symbol(symbol_fractional(g, s))
    Kc = K.rumin_constant(p) * weak_lp_norm(a, p) ** (-pc)
    assert r.lhs == pytest.approx(np.linalg.norm(k) ** (2 * s) * g.L, rel=1e-10)
    assert r.rhs == pytest.approx((Kc * g.L) ** (1 / pc), rel=1e-10)
    assert r.passed


def test_sobolev_scaling_and_rejects(rng):
    g = make_grid(2, 5, 2.0)
    psi = rng.standard_normal(g.size) + 1j * rng.standard_normal(g.size)
    psi -= psi.mean()
    r1 = V.check_sobolev_rank_one(g, psi, 0.6)
    r2 = V.check_sobolev_rank_one(g, 3.7 * psi, 0.6)
    assert r1.passed == r2.passed
    assert r1.ratio == pytest.approx(r2.ratio, rel=1e-10)
    with pytest.raises(ValueError):
        V.check_sobolev_rank_one(g, np.zeros(g.size), 0.6)
    with pytest.raises(ValueError):
        V.check_sobolev_rank_one(g, np.ones(g.size), 0.6)
    with pytest.raises(ValueError):
        V.check_sobolev_rank_one(g, psi, 1.0)


# -- phase space -----------------------------------------------------------

@pytest.mark.parametrize("d,s", [(1, 0.2), (2, 0.7), (3, 1.0), (3, 0.4)])
def test_phase_space_ball_closed_form(d, s):
    R = 1.3
    kin, mass = V.phase_space_integrals(V.RadialProfile.ball(R), s, d, 64)
    pref = K.omega(d) / K.TWO_PI ** d
    # the mass integrand is polynomial in the quadrature variable, the kinetic one is not
    assert mass == pytest.approx(pref * R ** (d - 2 * s) * d / (d - 2 * s), rel=1e-12)
    assert kin == pytest.approx(pref * R ** d, rel=1e-5)
    # the optimizer attains the semiclassical constant
    e = d / (d - 2 * s)
    assert kin / (K.ksd_bounds(s, d).sc_upper * mass ** e) == pytest.approx(1.0, rel=1e-5)


def test_phase_space_checks(rng):
    assert V.check_phase_space(V.RadialProfile.zero(), 0.5, 2).passed
    for d, s in ((1, 0.3), (2, 0.5), (3, 1.2)):
        ratios = V.optimizer_ratios(s, d)
        assert abs(ratios[-1] - 1) <= 0.01
        assert abs(ratios[-1] - 1) <= abs(ratios[0] - 1) + 1e-12
        for _ in range(10):
            k = int(rng.integers(1, 8))
            prof = V.RadialProfile(np.sort(rng.uniform(0.1, 3, k)), rng.uniform(0, 1, k))
            assert V.check_phase_space(prof, s, d).passed
    with pytest.raises(ValueError):
        V.check_phase_space(V.RadialProfile.ball(1), 1.0, 2)
