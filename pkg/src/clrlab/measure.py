"""Finite measure spaces and (weak) Lebesgue quasi-norms on them.

A :class:`FiniteMeasureSpace` is a finite set of points with strictly positive
weights.  Functions on it are either scalar (one number per point) or
operator-valued (one Hermitian ``m x m`` block per point).

Two different pointwise magnitudes are used for operator-valued functions:

* :func:`lp_norm` uses the Schatten-``p`` norm of each block, i.e. the norm of
  ``L_p(X, S_p)``;
* :func:`weak_lp_norm` and :func:`superlevel_measure` use the operator norm,
  i.e. the quasi-norm of ``L_{p,w}(Y, B)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

HERMITIAN_RTOL = 1e-12


@dataclass(frozen=True)
class FiniteMeasureSpace:
    """Points ``0..n-1`` carrying positive, finite weights."""

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float).reshape(-1)
        if w.size == 0:
            raise ValueError("a measure space needs at least one point")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise ValueError("weights must be strictly positive and finite")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def uniform(cls, n: int, weight: float = 1.0) -> "FiniteMeasureSpace":
        return cls(np.full(int(n), float(weight)))

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def total_measure(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return self.size

    def __eq__(self, other):
        return (isinstance(other, FiniteMeasureSpace)
                and self.size == other.size
                and np.array_equal(self.weights, other.weights))

    def __hash__(self):
        return hash(self.weights.tobytes())


@dataclass(frozen=True)
class WeightedFunction:
    """A scalar or Hermitian-block valued function on a finite measure space.

    ``values`` has shape ``(n,)`` for scalar functions and ``(n, m, m)`` for
    block-valued ones.  Blocks are symmetrized on construction after the
    Hermiticity check.
    """

    base: FiniteMeasureSpace
    values: np.ndarray
    block_dim: int = field(default=0)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.dtype.kind not in "fc":
            v = v.astype(float)
        n = self.base.size
        if v.ndim == 1:
            if v.shape[0] != n:
                raise ValueError(f"expected {n} values, got {v.shape[0]}")
            m = 1
        elif v.ndim == 3 and v.shape[1] == v.shape[2]:
            if v.shape[0] != n:
                raise ValueError(f"expected {n} blocks, got {v.shape[0]}")
            m = v.shape[1]
            adj = np.conj(np.swapaxes(v, 1, 2))
            scale = np.max(np.abs(v), axis=(1, 2), initial=0.0)
            dev = np.max(np.abs(v - adj), axis=(1, 2), initial=0.0)
            if np.any(dev > HERMITIAN_RTOL * np.maximum(scale, np.finfo(float).tiny)):
                raise ValueError(f"block values are not Hermitian (max deviation {dev.max():.3e})")
            v = 0.5 * (v + adj)
        else:
            raise ValueError("values must have shape (n,) or (n, m, m)")
        if self.block_dim not in (0, m):
            raise ValueError(f"block_dim {self.block_dim} does not match values ({m})")
        v = np.array(v)
        v.setflags(write=False)
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "block_dim", m)

    @property
    def is_block(self) -> bool:
        return self.values.ndim == 3

    def block_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of every block, shape ``(n, m)``."""
        if not self.is_block:
            raise ValueError("scalar function has no blocks")
        return np.linalg.eigvalsh(self.values)

    def operator_norms(self) -> np.ndarray:
        """Pointwise magnitude used by the weak norms (|.| or operator norm)."""
        if self.is_block:
            return np.max(np.abs(self.block_eigenvalues()), axis=1)
        return np.abs(self.values)

    def schatten_norms(self, p: float) -> np.ndarray:
        if self.is_block:
            ev = np.abs(self.block_eigenvalues())
            return np.sum(ev ** p, axis=1) ** (1.0 / p)
        return np.abs(self.values)

    def scale(self, c) -> "WeightedFunction":
        return WeightedFunction(self.base, c * self.values)


def _check_p(p):
    if not np.isfinite(p) or p <= 0:
        raise ValueError(f"p must be a finite positive number, got {p}")


def lp_norm(f: WeightedFunction, p: float) -> float:
    """``(sum_i w_i |f_i|^p)^(1/p)``, with the Schatten-p norm for blocks."""
    _check_p(p)
    mag = f.schatten_norms(p)
    return float(np.sum(f.base.weights * mag ** p) ** (1.0 / p))


def superlevel_measure(f: WeightedFunction, tau: float, strict: bool = True) -> float:
    mag = f.operator_norms()
    mask = mag > tau if strict else mag >= tau
    return float(np.sum(f.base.weights[mask]))


def weak_lp_norm(f: WeightedFunction, p: float) -> float:
    """Exact weak-L_p quasi-norm of a simple function.

    ``tau -> tau^p |{mag > tau}|`` is left-continuous between consecutive
    distinct magnitudes, so the supremum is the maximum over distinct values
    ``v`` of ``v^p |{mag >= v}|``.
    """
    _check_p(p)
    mag = f.operator_norms()
    w = f.base.weights
    pos = mag > 0
    if not np.any(pos):
        return 0.0
    mag, w = mag[pos], w[pos]
    order = np.argsort(-mag, kind="stable")
    mag, w = mag[order], w[order]
    cum = np.cumsum(w)
    # last index of every run of equal magnitudes
    last = np.r_[mag[1:] != mag[:-1], True]
    best = np.max(mag[last] ** p * cum[last])
    return float(best ** (1.0 / p))
