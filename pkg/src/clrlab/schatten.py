"""Weak Schatten quasi-norms and the equivalent trace quasi-norm."""
from __future__ import annotations

import numpy as np

from .report import SLACK, TrialReport


class SingularSpectrum:
    """Descending non-negative singular values ``s_1 >= s_2 >= ...``."""

    __slots__ = ("values",)

    def __init__(self, values):
        v = np.asarray(values, dtype=float).reshape(-1)
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("singular values must be finite and non-negative")
        v = np.sort(v)[::-1].copy()
        v.setflags(write=False)
        self.values = v

    def __len__(self):
        return self.values.size

    def __repr__(self):
        return f"SingularSpectrum({self.values.tolist()})"

    def scaled(self, c: float) -> "SingularSpectrum":
        return SingularSpectrum(c * self.values)


def _spectrum(s) -> np.ndarray:
    return s.values if isinstance(s, SingularSpectrum) else SingularSpectrum(s).values


def counting(s, kappa: float) -> int:
    """Number of singular values strictly larger than ``kappa``."""
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return int(np.sum(_spectrum(s) > kappa))


def weak_schatten_norm(s, q: float) -> float:
    """``(max_j j s_j^q)^(1/q)``, the closed form of ``sup_k k^q n(k)``."""
    if not q > 0:
        raise ValueError(f"q must be positive, got {q}")
    v = _spectrum(s)
    if v.size == 0 or v[0] == 0:
        return 0.0
    j = np.arange(1, v.size + 1)
    return float(np.max(j * v ** q) ** (1.0 / q))


def equiv_objective(s, q: float, mu) -> np.ndarray:
    """``mu^(q/2-1) tr(K*K - mu)_+`` evaluated at the given ``mu`` values."""
    sq = _spectrum(s) ** 2
    mu = np.atleast_1d(np.asarray(mu, dtype=float))
    tr = np.clip(sq[None, :] - mu[:, None], 0, None).sum(axis=1)
    return mu ** (q / 2 - 1) * tr


def equiv_quasinorm(s, q: float) -> float:
    """``(sup_mu mu^(q/2-1) tr(K*K - mu)_+)^(1/q)`` by exact piecewise maximization.

    Between consecutive distinct squared singular values the trace is affine in
    ``mu``; on each piece the objective ``mu^a (S - j mu)`` has its only
    critical point at ``mu* = ((q-2)/q) S/j``.
    """
    if not q > 2:
        raise ValueError(f"q must exceed 2, got {q}")
    sq = _spectrum(s) ** 2
    sq = sq[sq > 0]
    if sq.size == 0:
        return 0.0
    a = q / 2 - 1
    levels = np.unique(sq)[::-1]  # t_1 > t_2 > ... > t_k
    best = 0.0
    for j_idx, t_hi in enumerate(levels):
        t_lo = levels[j_idx + 1] if j_idx + 1 < levels.size else 0.0
        active = sq >= t_hi
        cnt = int(active.sum())
        S = float(sq[active].sum())
        cands = [t_lo, t_hi]
        mu_star = (q - 2) / q * S / cnt
        if t_lo < mu_star < t_hi:
            cands.append(mu_star)
        for mu in cands:
            if mu > 0:
                best = max(best, mu ** a * (S - cnt * mu))
    return float(best ** (1.0 / q))


def check_equiv_sandwich(s, q: float, seed: int = 0, slack: float = SLACK) -> TrialReport:
    """Both sides of ``|K|'_q <= (2/(q-2))^(1/q) ||K||_{q,w} <= (q/(q-2))^(1/2) |K|'_q``.

    ``lhs`` and ``rhs`` of the report are the outer members; the ratio is the
    larger of the two normalized gaps.
    """
    if not q > 2:
        raise ValueError(f"q must exceed 2, got {q}")
    e = equiv_quasinorm(s, q)
    w = weak_schatten_norm(s, q)
    mid = (2 / (q - 2)) ** (1 / q) * w
    upper = (q / (q - 2)) ** 0.5 * e
    ok_left = e <= mid * (1 + slack)
    ok_right = mid <= upper * (1 + slack)
    r = max(e / mid if mid > 0 else 0.0, mid / upper if upper > 0 else 0.0)
    detail = f"equiv={e!r} weak={w!r}"
    return TrialReport("equiv_sandwich", seed, {"q": q, "rank": int(np.sum(_spectrum(s) > 0))},
                       e, upper, r, bool(ok_left and ok_right), detail)
