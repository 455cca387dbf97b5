"""Randomized suite drivers: draw admissible inputs and run the check engines.

Each suite is a function ``(master_seed, trials, overrides) -> SuiteResult``.
Trial ``i`` draws everything from ``Sampler(master_seed, i, suite)``, so any
trial can be reproduced (or run concurrently) on its own.  ``overrides`` pins
model parameters (``d``, ``n``, ``L``, ``p``, ``q``, ``s``, ``nu``, ``m``) that
would otherwise be drawn per trial.
"""
from __future__ import annotations

import math

import numpy as np

from . import constants as K
from . import verify as V
from .linalg import HermitianOperator, eigh, multiplication
from .measure import FiniteMeasureSpace, WeightedFunction
from .report import Sampler, SuiteResult
from .schatten import check_equiv_sandwich
from .torus import (MagneticField, dft, laplacian_symbol, magnetic_laplacian, make_grid,
                    multiplier, reciprocal_symbol, symbol_fractional)

DEFAULT_TRIALS = 200
MAX_DEFAULT_POINTS = 144
MAX_RESAMPLES = 100


def _get(ov, key, draw):
    v = ov.get(key)
    return draw() if v is None else v


def _grid(rng, ov, max_points=MAX_DEFAULT_POINTS, d_choices=(1, 2)):
    d = int(_get(ov, "d", lambda: rng.choice(d_choices)))
    cap = max(2, int(math.floor(max_points ** (1 / d) + 1e-9)))
    n = int(_get(ov, "n", lambda: rng.integers(2, cap + 1)))
    L = float(_get(ov, "L", lambda: 2 * math.pi * rng.uniform(0.5, 2.0)))
    return make_grid(d, n, L)


def _nonneg(rng, size, zero_frac=0.2):
    vals = rng.exponential(1.0, size) * rng.uniform(0.1, 10.0)
    vals[rng.random(size) < zero_frac] = 0.0
    return vals


def _random_symbol(grid, rng):
    """Non-negative momentum symbol: random, power law, indicator or inverse Laplacian."""
    kind = rng.choice(["random", "power", "indicator", "inv_laplacian"])
    if kind == "random":
        vals = _nonneg(rng, grid.size)
    elif kind == "power":
        s = rng.uniform(0.1, 0.9) * grid.d / 2
        vals = np.asarray(reciprocal_symbol(symbol_fractional(grid, s)).values)
    elif kind == "indicator":
        vals = (grid.momentum_norms <= rng.uniform(0.3, 1.0) * grid.momentum_norms.max()).astype(float)
    else:
        vals = np.asarray(reciprocal_symbol(laplacian_symbol(grid)).values)
    if not np.any(vals > 0):
        vals[rng.integers(grid.size)] = 1.0
    return grid.momentum_function(vals), str(kind)


def _psd_blocks(rng, n, m, zero_frac=0.2):
    Z = rng.standard_normal((n, m, m)) + 1j * rng.standard_normal((n, m, m))
    B = Z @ np.conj(np.swapaxes(Z, 1, 2)) * rng.uniform(0.1, 5.0)
    B[rng.random(n) < zero_frac] = 0.0
    return B


def _hermitian_blocks(rng, n, m, depth):
    Z = rng.standard_normal((n, m, m)) + 1j * rng.standard_normal((n, m, m))
    H = 0.5 * (Z + np.conj(np.swapaxes(Z, 1, 2)))
    return H * depth - 0.5 * depth * np.eye(m)[None]


def _random_unitary(rng, k):
    Z = rng.standard_normal((k, k)) + 1j * rng.standard_normal((k, k))
    Q, R = np.linalg.qr(Z)
    return Q * (np.diag(R) / np.abs(np.diag(R)))


def _run(name, master_seed, trials, ov, body, info=None, params=None):
    res = SuiteResult(name, dict(params or {}, **{k: v for k, v in ov.items() if v is not None}))
    for i in range(trials):
        smp = Sampler(master_seed, i, name)
        rep = body(smp, ov, res)
        res.trials.append(rep)
    if info:
        info(res)
    return res


def _ratio_info(res):
    res.info["maxObservedRatio"] = float(res.max_ratio)


# -- suites ----------------------------------------------------------------

def suite_theorem_main(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def body(smp, ov, res):
        rng = smp.rng
        kind = smp.forced("zero_b", "rank_one")
        grid = _grid(rng, ov)
        p = float(_get(ov, "p", lambda: rng.uniform(1.1, 4.0)))
        if kind == "rank_one":
            a = np.zeros(grid.size)
            a[rng.integers(grid.size)] = 1.0
            b = np.zeros(grid.size)
            b[rng.integers(grid.size)] = 1.0
            mu = 0.5 * grid.size ** -1.0
        else:
            a = np.asarray(_random_symbol(grid, rng)[0].values)
            b = np.zeros(grid.size) if kind == "zero_b" else _nonneg(rng, grid.size)
            top = max(float(np.max(a)) * float(np.max(b)), 1e-12)  # bounds the operator norm
            mu = top * 10 ** rng.uniform(-3, 0)
        return V.check_theorem_main(grid, grid.momentum_function(a), grid.position_function(b),
                                    p, mu, seed=smp.seed)

    return _run("theorem_main", master_seed, trials, ov, body, _ratio_info)


def suite_corollary_cwikel(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def body(smp, ov, res):
        rng = smp.rng
        kind = smp.forced("zero_f", "rank_one")
        grid = _grid(rng, ov)
        q = float(_get(ov, "q", lambda: rng.choice([2.5, 3.0, 4.0])))
        if kind == "rank_one":
            f = np.zeros(grid.size)
            f[rng.integers(grid.size)] = 1.0
            g = np.zeros(grid.size)
            g[rng.integers(grid.size)] = 1.0
        else:
            f = np.zeros(grid.size) if kind == "zero_f" else _nonneg(rng, grid.size)
            g = np.sqrt(np.asarray(_random_symbol(grid, rng)[0].values))
        return V.check_corollary_cwikel(grid, grid.position_function(f), grid.momentum_function(g),
                                        q, seed=smp.seed)

    return _run("corollary_cwikel", master_seed, trials, ov, body, _ratio_info)


def suite_rumin(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def body(smp, ov, res):
        rng = smp.rng
        grid = _grid(rng, ov)
        p = float(_get(ov, "p", lambda: rng.choice([1.5, 2.0, 3.0])))
        a, kind = _random_symbol(grid, rng)
        A = multiplier(grid, a)
        forced = smp.forced("zero", "identity", "rank_one")
        if forced is None and rng.random() < 0.1:
            forced = str(rng.choice(["zero", "identity", "rank_one"]))
        gamma, _ = V.sample_gamma(A, rng, forced)
        rep = V.check_rumin(grid, a, p, gamma, A=A, seed=smp.seed)
        rep.params.update(symbol=kind, gamma=forced or "random")
        return rep

    return _run("rumin", master_seed, trials, ov, body, _ratio_info)


def _unitary_model(rng, m, n_max=72):
    """``(X, Y, Phi)``: torus DFT with per-point unitaries, or a random unitary between random spaces."""
    if rng.random() < 0.5:
        d = int(rng.choice([1, 2]))
        n = int(rng.integers(2, (n_max if d == 1 else int(math.sqrt(n_max))) + 1))
        grid = make_grid(d, n, 2 * math.pi * rng.uniform(0.5, 2.0))
        F, _ = dft(grid)
        U = np.zeros((grid.size * m, grid.size * m), dtype=complex)
        for x in range(grid.size):
            U[x * m:(x + 1) * m, x * m:(x + 1) * m] = _random_unitary(rng, m)
        return grid.position_space, grid.momentum_space, np.kron(F, np.eye(m)) @ U, "torus"
    nx = int(rng.integers(2, 25))
    X = FiniteMeasureSpace(rng.uniform(0.2, 2.0, nx))
    Y = FiniteMeasureSpace(rng.uniform(0.2, 2.0, nx))
    return X, Y, _random_unitary(rng, nx * m), "general"


def suite_cwikelop(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def body(smp, ov, res):
        rng = smp.rng
        m = int(_get(ov, "m", lambda: 2))
        q = float(_get(ov, "q", lambda: rng.choice([3.0, 4.0])))
        X, Y, Phi, kind = _unitary_model(rng, m)
        f = WeightedFunction(X, _psd_blocks(rng, X.size, m))
        g = WeightedFunction(Y, _psd_blocks(rng, Y.size, m))
        if smp.forced("zero_f") == "zero_f":
            f = f.scale(0.0)
        # the trace form needs a sensible mu range: scale by the top eigenvalue of the operator
        G, F = multiplication(g).matrix, multiplication(f).matrix
        top = float(np.linalg.norm(G @ Phi @ F, 2) ** 2) or 1.0
        mus = top * 10 ** rng.uniform(-3, 0, 5)
        rep = V.check_cwikelop(X, Y, Phi, f, g, q, mus=mus, seed=smp.seed)
        rep.params["model"] = kind
        return rep

    return _run("cwikelop", master_seed, trials, ov, body, _ratio_info)


def suite_pointwise_young(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def body(smp, ov, res):
        rng = smp.rng
        n = int(rng.integers(1, 50))
        X = FiniteMeasureSpace(rng.uniform(0.1, 3.0, n))
        p = float(_get(ov, "p", lambda: rng.uniform(1.05, 5.0)))
        mu, Kc = 10 ** rng.uniform(-2, 2), 10 ** rng.uniform(-2, 2)
        b = _nonneg(rng, n)
        kind = smp.forced("zero_rho", "optimizer")
        if kind == "zero_rho":
            rho = np.zeros(n)
        elif kind == "optimizer":
            rho = V.young_optimizer(b, mu, Kc, p)
        else:
            rho = V.young_optimizer(b, mu, Kc, p) * rng.uniform(0, 3, n)
        rep = V.check_pointwise_young(WeightedFunction(X, b), WeightedFunction(X, rho), mu, Kc, p,
                                      seed=smp.seed)
        rep.params["rho"] = kind or "random"
        return rep

    return _run("pointwise_young", master_seed, trials, ov, body, _ratio_info)


def _random_T(grid, rng, kind=None, nu=None):
    """Non-negative lattice operator and a label; ``fractional`` uses ``s = d/nu``."""
    kind = kind or str(rng.choice(["fractional", "laplacian", "magnetic", "multiplier"]))
    if kind == "fractional":
        s = grid.d / nu if nu is not None else rng.uniform(0.25, 1.0)
        return multiplier(grid, symbol_fractional(grid, s)), kind, s
    if kind == "laplacian":
        return multiplier(grid, laplacian_symbol(grid)), kind, None
    if kind == "magnetic":
        return magnetic_laplacian(grid, MagneticField.random(grid, rng)), kind, None
    vals = rng.uniform(0.05, 10.0, grid.size)
    return multiplier(grid, grid.momentum_function(vals)), kind, None


def _blocked(T, m):
    if m == 1:
        return T
    return HermitianOperator(T.space, np.kron(T.matrix, np.eye(m)), m)


def suite_clr(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}
    continuum = []

    def body(smp, ov, res):
        rng = smp.rng
        grid = _grid(rng, ov, max_points=MAX_DEFAULT_POINTS // 2)
        nu = float(_get(ov, "nu", lambda: rng.choice([2.5, 3.0, 4.0])))
        m = int(_get(ov, "m", lambda: rng.choice([1, 2])))
        T0, kind, s = _random_T(grid, rng, nu=nu)
        T = _blocked(T0, m)
        scale = float(np.max(np.abs(np.diag(T0.matrix)))) / grid.position_space.weights[0]
        forced = smp.forced("nonneg", "deep_well")
        if forced == "nonneg":
            Vv = _psd_blocks(rng, grid.size, m, 0.0)
        elif forced == "deep_well":
            Vv = np.zeros((grid.size, m, m))
            Vv[rng.integers(grid.size)] = -1e3 * scale * np.eye(m)
        else:
            Vv = _hermitian_blocks(rng, grid.size, m, scale * 10 ** rng.uniform(-1, 1.5))
        Vf = WeightedFunction(grid.position_space, Vv if m > 1 else np.real(Vv[:, 0, 0]))
        A = V.extract_A(T0, nu)
        par = {"d": grid.d, "n": grid.n, "L": grid.L, "T": kind}
        if kind == "fractional" and 2 * s < grid.d:
            A_cont = K.fractional_density_constant(grid.d, s)
            par["A_over_continuum"] = A / A_cont
            continuum.append(A / A_cont)
        return V.check_clr(T, Vf, nu, seed=smp.seed, A=A, params=par)

    def info(res):
        _ratio_info(res)
        if continuum:
            res.info["extractA_over_continuumA"] = [min(continuum), max(continuum)]

    return _run("clr", master_seed, trials, ov, body, info)


def suite_lemma_ass(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def body(smp, ov, res):
        rng = smp.rng
        grid = _grid(rng, ov, max_points=MAX_DEFAULT_POINTS // 2)
        nu = float(_get(ov, "nu", lambda: rng.choice([2.5, 3.0, 4.0])))
        m = int(_get(ov, "m", lambda: 1))
        if smp.forced("scalar") == "scalar":
            c = rng.uniform(0.5, 5.0)
            T0, kind = HermitianOperator(grid.position_space, c * np.eye(grid.size)), "scalar"
        else:
            T0, kind, _ = _random_T(grid, rng)
        T = _blocked(T0, m)
        lam = eigh(T0).eigenvalues
        lam_pos = lam[lam > 1e-12 * lam.max()]
        lo, hi = float(lam_pos.min()), float(lam_pos.max())
        t_grid = np.logspace(-2, 2, 25) / math.sqrt(lo * hi)
        E_grid = np.logspace(math.log10(lo) - 1, math.log10(hi) + 1, 25)
        return V.check_lemma_ass(T, nu, t_grid, E_grid, seed=smp.seed,
                                 params={"d": grid.d, "n": grid.n, "T": kind})

    return _run("lemma_ass", master_seed, trials, ov, body, _ratio_info)


def suite_diamagnetic(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def body(smp, ov, res):
        rng = smp.rng
        d = int(_get(ov, "d", lambda: rng.choice([1, 2])))
        cap = int(math.floor(MAX_DEFAULT_POINTS ** (1 / d) + 1e-9))
        n = int(_get(ov, "n", lambda: rng.integers(2, cap + 1)))
        grid = make_grid(d, n, float(_get(ov, "L", lambda: float(n))))
        field = MagneticField.zero(grid) if smp.forced("zero_field") else MagneticField.random(grid, rng)
        TB = magnetic_laplacian(grid, field)
        T0 = magnetic_laplacian(grid, MagneticField.zero(grid))
        return V.check_diamagnetic(TB, T0, seed=smp.seed, params={"d": d, "n": n, "L": grid.L})

    return _run("diamagnetic", master_seed, trials, ov, body, _ratio_info)


def suite_phase_space(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}
    conv = {}

    def body(smp, ov, res):
        rng = smp.rng
        d = int(_get(ov, "d", lambda: rng.choice([1, 2, 3])))
        s = float(_get(ov, "s", lambda: rng.uniform(0.05, 0.95) * d / 2))
        kind = smp.forced("zero", "optimizer")
        if kind == "zero":
            prof = V.RadialProfile.zero()
        elif kind == "optimizer":
            prof = V.RadialProfile([1.0, 1.37], [1.0, 0.0])
            conv["optimizerRatios"] = V.optimizer_ratios(s, d)
            conv["optimizerParams"] = {"d": d, "s": s}
        else:
            k = int(rng.integers(1, 12))
            prof = V.RadialProfile(np.sort(rng.uniform(0.1, 3.0, k)), rng.uniform(0, 1, k))
        rep = V.check_phase_space(prof, s, d, n_cells=256, seed=smp.seed)
        rep.params["M"] = kind or "random"
        return rep

    def info(res):
        _ratio_info(res)
        res.info.update(conv)

    return _run("phase_space", master_seed, trials, ov, body, info)


def suite_sobolev_rank_one(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def body(smp, ov, res):
        rng = smp.rng
        grid = _grid(rng, ov)
        if grid.size < 2:
            grid = make_grid(grid.d, 2, grid.L)
        s = float(_get(ov, "s", lambda: rng.uniform(0.05, 0.95) * grid.d / 2))
        if smp.forced("mode") == "mode":
            k = grid.momenta[(grid.zero_mode + 1) % grid.size]
            psi = np.exp(1j * grid.positions @ k)
        else:
            psi = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        psi = psi - psi.mean()
        return V.check_sobolev_rank_one(grid, psi, s, seed=smp.seed)

    return _run("sobolev_rank_one", master_seed, trials, ov, body, _ratio_info)


def suite_birman_schwinger(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def draw(rng, smp, ov):
        kind = smp.forced("hand", "nonneg")
        if kind == "hand":
            X = FiniteMeasureSpace.uniform(2)
            T = HermitianOperator(X, np.eye(2))
            return T, WeightedFunction(X, np.array([-2.0, -0.5]))
        grid = _grid(rng, ov, max_points=MAX_DEFAULT_POINTS // 2)
        m = int(_get(ov, "m", lambda: rng.choice([1, 2])))
        T0, _, _ = _random_T(grid, rng)
        T = _blocked(T0, m)
        scale = float(np.max(np.abs(np.diag(T0.matrix)))) / grid.position_space.weights[0]
        if kind == "nonneg":
            Vv = _psd_blocks(rng, grid.size, m, 0.0)
        else:
            Vv = _hermitian_blocks(rng, grid.size, m, scale * 10 ** rng.uniform(-1, 1.5))
        return T, WeightedFunction(grid.position_space, Vv if m > 1 else np.real(Vv[:, 0, 0]))

    def body(smp, ov, res):
        rng = smp.rng
        for _ in range(MAX_RESAMPLES):
            T, Vf = draw(rng, smp, ov)
            try:
                return V.check_birman_schwinger(T, Vf, seed=smp.seed)
            except V.DegenerateDraw:
                res.resamples += 1
        raise RuntimeError("too many degenerate draws")

    return _run("birman_schwinger", master_seed, trials, ov, body)


def suite_variational(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def body(smp, ov, res):
        rng = smp.rng
        kind = smp.forced("hand", "below")
        if kind == "hand":
            M = np.diag([3.0, 1.0, -2.0])
            mu = 2.0
        else:
            n = int(rng.integers(1, 40))
            Z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
            M = 0.5 * (Z + Z.conj().T)
            lam = np.linalg.eigvalsh(M)
            mu = float(lam.max() + 1.0) if kind == "below" else float(rng.uniform(0.01, max(lam.max(), 0.02)))
        H = HermitianOperator(FiniteMeasureSpace.uniform(M.shape[0]), M)
        return V.check_variational(H, mu, rng=rng, seed=smp.seed)

    return _run("variational", master_seed, trials, ov, body)


EQUIV_QS = (2.5, 3.0, 4.0, 6.0)


def suite_equiv_sandwich(master_seed, trials=DEFAULT_TRIALS, ov=None):
    ov = ov or {}

    def body(smp, ov, res):
        rng = smp.rng
        q = float(_get(ov, "q", lambda: EQUIV_QS[smp.trial_index % len(EQUIV_QS)]))
        kind = smp.forced("rank_one", "zero")
        if kind == "rank_one":
            s = np.array([rng.uniform(0.1, 10)])
        elif kind == "zero":
            s = np.zeros(3)
        else:
            n = int(rng.integers(1, 41))
            style = rng.choice(["uniform", "power", "ties", "exponential"])
            if style == "uniform":
                s = rng.uniform(0, 1, n)
            elif style == "power":
                s = np.arange(1, n + 1) ** (-1 / q) * rng.uniform(0.5, 2)
            elif style == "ties":
                s = rng.choice(rng.uniform(0, 1, 3), n)
            else:
                s = rng.exponential(1, n)
        return check_equiv_sandwich(s, q, seed=smp.seed)

    return _run("equiv_sandwich", master_seed, trials, ov, body, _ratio_info)


SUITES = {
    "theorem_main": suite_theorem_main,
    "corollary_cwikel": suite_corollary_cwikel,
    "rumin": suite_rumin,
    "cwikelop": suite_cwikelop,
    "pointwise_young": suite_pointwise_young,
    "clr": suite_clr,
    "lemma_ass": suite_lemma_ass,
    "diamagnetic": suite_diamagnetic,
    "phase_space": suite_phase_space,
    "sobolev_rank_one": suite_sobolev_rank_one,
    "birman_schwinger": suite_birman_schwinger,
    "variational": suite_variational,
    "equiv_sandwich": suite_equiv_sandwich,
}

# parameters each suite reads from the overrides, with their domain checks
SUITE_PARAMS = {
    "theorem_main": ("d", "n", "L", "p"),
    "corollary_cwikel": ("d", "n", "L", "q"),
    "rumin": ("d", "n", "L", "p"),
    "cwikelop": ("q", "m"),
    "pointwise_young": ("p",),
    "clr": ("d", "n", "L", "nu", "m"),
    "lemma_ass": ("d", "n", "L", "nu", "m"),
    "diamagnetic": ("d", "n", "L"),
    "phase_space": ("d", "s"),
    "sobolev_rank_one": ("d", "n", "L", "s"),
    "birman_schwinger": ("d", "n", "L", "m"),
    "variational": (),
    "equiv_sandwich": ("q",),
}


def validate_overrides(name: str, ov: dict):
    """Raise ``ValueError`` if a pinned parameter is outside the suite's domain."""
    used = {k: ov[k] for k in SUITE_PARAMS[name] if ov.get(k) is not None}
    if "d" in used and (used["d"] < 1 or int(used["d"]) != used["d"]):
        raise ValueError(f"{name}: d must be a positive integer")
    if "n" in used and used["n"] < 2:
        raise ValueError(f"{name}: n must be at least 2")
    if "n" in used or "d" in used:
        d = int(used.get("d", 2))
        n = int(used.get("n", 2))
        if n ** d > 512:
            raise ValueError(f"{name}: grid n^d = {n ** d} exceeds 512 points")
    if "L" in used and not used["L"] > 0:
        raise ValueError(f"{name}: L must be positive")
    if "p" in used and not used["p"] > 1:
        raise ValueError(f"{name}: p must exceed 1")
    if "q" in used and not used["q"] > 2:
        raise ValueError(f"{name}: q must exceed 2")
    if "nu" in used and not used["nu"] > 2:
        raise ValueError(f"{name}: nu must exceed 2")
    if "m" in used and (used["m"] < 1 or int(used["m"]) != used["m"]):
        raise ValueError(f"{name}: m must be a positive integer")
    if "s" in used:
        d = used.get("d")
        if not used["s"] > 0:
            raise ValueError(f"{name}: s must be positive")
        if d is not None and not 2 * used["s"] < d:
            raise ValueError(f"{name}: need 2s < d")
        if d is None and not 2 * used["s"] < 1:
            # d is drawn per trial, so s must be admissible for d = 1
            raise ValueError(f"{name}: s must be below 1/2 unless d is fixed")


def run_suite(name: str, master_seed: int, trials: int = DEFAULT_TRIALS, overrides: dict = None) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(name)
    ov = dict(overrides or {})
    validate_overrides(name, ov)
    return SUITES[name](master_seed, trials, {k: ov.get(k) for k in SUITE_PARAMS[name]})
