"""Closed-form constants of the CLR / Cwikel circle of inequalities.

Every function validates its parameter domain and raises ``ValueError``
outside it.  :func:`constants_table` collects the values in a serializable
list of :class:`ConstantRecord`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

TWO_PI = 2 * math.pi


def _gt(name, x, bound):
    if not x > bound:
        raise ValueError(f"{name} must exceed {bound}, got {x}")


def omega(d: int) -> float:
    """Volume of the unit ball in R^d."""
    if int(d) != d or d < 1:
        raise ValueError(f"d must be a positive integer, got {d}")
    return math.exp(log_omega(d))


def log_omega(d: float) -> float:
    return 0.5 * d * math.log(math.pi) - math.lgamma(d / 2 + 1)


def main_prefactor(p: float) -> float:
    """``(p+1)^(p-1) / (p-1)^p``."""
    _gt("p", p, 1)
    return (p + 1) ** (p - 1) / (p - 1) ** p


def theorem_main_constant(p: float, d: int) -> float:
    return main_prefactor(p) * TWO_PI ** (-d)


def cwikel_prefactor(q: float) -> float:
    """``(q/(q-2))^(q/2) ((q+2)/(q-2))^((q-2)/2)``."""
    _gt("q", q, 2)
    return (q / (q - 2)) ** (q / 2) * ((q + 2) / (q - 2)) ** ((q - 2) / 2)


def cwikel_constant(q: float, d: int) -> float:
    return cwikel_prefactor(q) * TWO_PI ** (-d)


def cwikelop_constant(q: float, C: float = 1.0) -> float:
    """Operator-valued Cwikel constant ``(q/2) (q/(q-2))^(q-1) C^2``."""
    _gt("q", q, 2)
    _gt("C", C, 0)
    return q / 2 * (q / (q - 2)) ** (q - 1) * C ** 2


def hundertmark_constant(q: float, C: float = 1.0) -> float:
    """Earlier operator-valued constant ``(q/2)^q (8/(q-2))^(q-2) q/(q-2) C^2``."""
    _gt("q", q, 2)
    _gt("C", C, 0)
    return (q / 2) ** q * (8 / (q - 2)) ** (q - 2) * q / (q - 2) * C ** 2


def cwikelop_trace_prefactor(p: float) -> float:
    """``(p/(p-1))^p``, the trace-form constant of the operator-valued bound."""
    _gt("p", p, 1)
    return (p / (p - 1)) ** p


def corollary_vs_opval_factor(q: float) -> float:
    """``(q/2) (q/(q+2))^((q-2)/2)``: operator-valued over scalar Cwikel constant."""
    _gt("q", q, 2)
    return q / 2 * (q / (q + 2)) ** ((q - 2) / 2)


def cnu_general(nu: float) -> float:
    _gt("nu", nu, 2)
    return nu / 2 * (nu / (nu - 2)) ** (nu - 2)


def cnu_scalar(nu: float) -> float:
    _gt("nu", nu, 2)
    return (nu * (nu + 2) / (nu - 2) ** 2) ** ((nu - 2) / 2)


def _check_sd(s, d):
    if not (s > 0 and 2 * s < d):
        raise ValueError(f"need 0 < 2s < d, got s={s}, d={d}")


def fractional_density_constant(d: int, s: float) -> float:
    """``int_{|p|<1} |p|^{-2s} dp / (2 pi)^d = omega_d/(2 pi)^d * d/(d-2s)``."""
    _check_sd(s, d)
    return omega(d) / TWO_PI ** d * d / (d - 2 * s)


def clr_example_constants(d: int, s: float):
    """``(scalar, operator_valued)`` CLR constants for ``T = (-Delta)^s`` on R^d."""
    _check_sd(s, d)
    A = fractional_density_constant(d, s)
    nu = d / s
    return cnu_scalar(nu) * A, cnu_general(nu) * A


def rumin_constant(p: float, C: float = 1.0) -> float:
    """``((p-1)/(p+1)) C^{-2/(p-1)} ((p-1)/p)^{p/(p-1)}``.

    With ``C = (2 pi)^{-d/2}`` this is the R^d constant; on the lattice
    models ``C = 1``.
    """
    _gt("p", p, 1)
    _gt("C", C, 0)
    return (p - 1) / (p + 1) * C ** (-2 / (p - 1)) * ((p - 1) / p) ** (p / (p - 1))


def cwikelop_rumin_constant(p: float, C: float = 1.0) -> float:
    """``(p-1)^{(2p-1)/(p-1)} / p^{2p/(p-1)} C^{-2/(p-1)}`` (operator-valued)."""
    _gt("p", p, 1)
    _gt("C", C, 0)
    return (p - 1) ** ((2 * p - 1) / (p - 1)) / p ** (2 * p / (p - 1)) * C ** (-2 / (p - 1))


def conjugate(p: float) -> float:
    _gt("p", p, 1)
    return p / (p - 1)


def dual_transform(p: float, D: float) -> float:
    """Solve ``(p D)^{p'} (p' K)^p = 1`` for ``K``."""
    _gt("p", p, 1)
    _gt("D", D, 0)
    pc = conjugate(p)
    return (p * D) ** (-pc / p) / pc


def dual_transform_inv(p: float, K: float) -> float:
    """Solve ``(p D)^{p'} (p' K)^p = 1`` for ``D``."""
    _gt("p", p, 1)
    _gt("K", K, 0)
    pc = conjugate(p)
    return (pc * K) ** (-p / pc) / p


def young_constant(p: float, K: float, mu: float) -> float:
    """``(K mu)^{1-p} (p-1)^{p-1} / p^p``: ``sup_r (b r - mu K r^{p'}) = this * b^p``."""
    _gt("p", p, 1)
    _gt("K", K, 0)
    _gt("mu", mu, 0)
    return (K * mu) ** (1 - p) * (p - 1) ** (p - 1) / p ** p


def lemma_ass_projection_constant(Cp: float, nu: float) -> float:
    """``B' = C' (2e/nu)^{nu/2}``; valid for every ``nu > 0``."""
    if not Cp >= 0:
        raise ValueError(f"C' must be non-negative, got {Cp}")
    _gt("nu", nu, 0)
    return Cp * (2 * math.e / nu) ** (nu / 2)


def lemma_ass_constants(Cp: float, nu: float):
    """``(B', A')`` with ``A' = B' nu/(nu-2)``, which needs ``nu > 2``."""
    _gt("nu", nu, 2)
    B = lemma_ass_projection_constant(Cp, nu)
    return B, B * nu / (nu - 2)


def magnetic_A(d: int) -> float:
    """``(e/(2 pi d))^{d/2} d/(d-2)``, from the free heat kernel bound ``(4 pi t)^{-d/2}``."""
    if d < 3:
        raise ValueError(f"d must be at least 3, got {d}")
    return (math.e / (TWO_PI * d)) ** (d / 2) * d / (d - 2)


@dataclass(frozen=True)
class KsdBounds:
    lower: float
    sc_upper: float
    sobolev_upper: float


def log_ksd_bounds(s: float, d: int):
    """Logarithms of :func:`ksd_bounds`; finite even where the values underflow."""
    _check_sd(s, d)
    e = d / (d - 2 * s)
    log_sc = (2 * d * s / (d - 2 * s) * math.log(TWO_PI) + e * math.log((d - 2 * s) / d)
              - 2 * s / (d - 2 * s) * log_omega(d))
    log_lower = math.log((d - 2 * s) / (d + 2 * s)) + log_sc
    log_sob = (d * s / (d - 2 * s) * math.log(4 * math.pi)
               + e * (math.lgamma((d + 2 * s) / 2) - math.lgamma((d - 2 * s) / 2))
               + 2 * s / (d - 2 * s) * (math.lgamma(d / 2) - math.lgamma(d)))
    return log_lower, log_sc, log_sob


def ksd_bounds(s: float, d: int) -> KsdBounds:
    """Lower bound and the semiclassical / Sobolev upper bounds on ``K_{s,d}``."""
    return KsdBounds(*(math.exp(v) for v in log_ksd_bounds(s, d)))


def sobolev_minus_semiclassical(s: float, d: int) -> float:
    """``log(sobolevUpper / scUpper)``; negative where the Sobolev bound is smaller."""
    _, sc, sob = log_ksd_bounds(s, d)
    return sob - sc


def bound_asymptotics(d: int, eps: float = 1e-3) -> dict:
    """Informational comparison of the two upper bounds near ``s = 0`` and ``s = d/2``.

    Reports ``sobolevUpper / scUpper`` at ``s = eps`` and ``s = d/2 - eps`` with a
    5% flag, and at the upper end also ``log(ratio) / log(scUpper)``, which
    tends to 0 when the bounds agree to leading exponential order.
    """
    out = {}
    for end, s in (("small", eps), ("large", d / 2 - eps)):
        _, sc, sob = log_ksd_bounds(s, d)
        r = math.exp(sob - sc)
        out[end] = {"s": s, "ratio": r, "within5pct": abs(r - 1) <= 0.05}
        if end == "large":
            out[end]["logRatioOverLogSc"] = (sob - sc) / sc
    return out


# -- table -----------------------------------------------------------------

@dataclass(frozen=True)
class ConstantRecord:
    name: str
    parameters: dict
    value: float
    source: str
    reference: bool = False
    extra: dict = field(default_factory=dict)


# literature values quoted for comparison with the d = 3 CLR constants
REFERENCE_VALUES = (
    ("clr_scalar_reference", {"d": 3, "s": 1.0}, 0.116, "Lieb, scalar CLR constant, s = 1"),
    ("clr_scalar_reference", {"d": 3, "s": 0.5}, 0.103, "Daubechies, relativistic CLR constant, s = 1/2"),
    ("clr_opval_reference", {"d": 3, "s": 1.0}, 0.174, "Frank-Lieb-Seiringer, operator-valued CLR constant, s = 1"),
)


def constants_table() -> list:
    rows = []
    for d, s in ((3, 1.0), (3, 0.5), (3, 1.25), (4, 1.0), (5, 2.0)):
        sc, op = clr_example_constants(d, s)
        rows.append(ConstantRecord("clr_scalar", {"d": d, "s": s}, sc, "CLR bound, scalar, T = (-Delta)^s"))
        rows.append(ConstantRecord("clr_opval", {"d": d, "s": s}, op, "CLR bound, operator-valued, T = (-Delta)^s"))
    for name, params, value, src in REFERENCE_VALUES:
        rows.append(ConstantRecord(name, params, value, src, reference=True))
    for d in (1, 2, 3):
        for end, rec in bound_asymptotics(d).items():
            rows.append(ConstantRecord("sobolev_over_sc", {"d": d, "s": rec["s"]}, rec["ratio"],
                                       f"informational, s near {'0' if end == 'small' else 'd/2'}"))
    for d in (1, 2, 3):
        rows.append(ConstantRecord("omega", {"d": d}, omega(d), "unit ball volume"))
    for p, d in ((1.5, 1), (2.0, 1), (2.0, 3), (3.0, 3)):
        rows.append(ConstantRecord("theorem_main", {"p": p, "d": d}, theorem_main_constant(p, d),
                                   "trace bound for a^{1/2} b a^{1/2}"))
        rows.append(ConstantRecord("rumin_rd", {"p": p, "d": d},
                                   rumin_constant(p, TWO_PI ** (-d / 2)), "Rumin-type lower bound on R^d"))
    for q in (3.0, 4.0, 6.0):
        rows.append(ConstantRecord("cwikel", {"q": q, "d": 3}, cwikel_constant(q, 3), "scalar Cwikel bound"))
        rows.append(ConstantRecord("cwikelop", {"q": q, "C": 1.0}, cwikelop_constant(q), "operator-valued Cwikel bound"))
        rows.append(ConstantRecord("hundertmark", {"q": q, "C": 1.0}, hundertmark_constant(q),
                                   "earlier operator-valued Cwikel bound"))
        rows.append(ConstantRecord("cwikelop_over_cwikel", {"q": q}, corollary_vs_opval_factor(q),
                                   "operator-valued over scalar Cwikel constant"))
    for nu in (3.0, 4.0, 6.0):
        rows.append(ConstantRecord("cnu_general", {"nu": nu}, cnu_general(nu), "CLR constant, general T"))
        rows.append(ConstantRecord("cnu_scalar", {"nu": nu}, cnu_scalar(nu), "CLR constant, general T, scalar"))
    for d in (3, 4):
        rows.append(ConstantRecord("magnetic_A", {"d": d}, magnetic_A(d), "density constant, magnetic T"))
    for s, d in ((0.25, 1), (0.25, 2), (0.75, 2), (0.5, 3), (1.0, 3)):
        b = ksd_bounds(s, d)
        p = {"s": s, "d": d}
        rows.append(ConstantRecord("ksd_lower", p, b.lower, "lower bound on K_{s,d}"))
        rows.append(ConstantRecord("ksd_sc_upper", p, b.sc_upper, "semiclassical upper bound on K_{s,d}"))
        rows.append(ConstantRecord("ksd_sobolev_upper", p, b.sobolev_upper, "Sobolev upper bound on K_{s,d}"))
    return rows
