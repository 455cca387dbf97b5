"""Periodic lattice models: position/momentum spaces, DFT, multipliers.

The momentum space of a :class:`TorusGrid` carries weight ``L^-d`` per mode,
which is the cell volume ``(2 pi / L)^d`` divided by ``(2 pi)^d``.  With this
normalization every kernel entry of the DFT has modulus one, so results of
the form ``C^2 (...)`` hold on the lattice with ``C = 1``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .linalg import HermitianOperator, eigh
from .measure import FiniteMeasureSpace, WeightedFunction

MAX_POINTS = 512


@dataclass(frozen=True)
class TorusGrid:
    d: int
    n: int
    L: float
    position_space: FiniteMeasureSpace
    momentum_space: FiniteMeasureSpace
    positions: np.ndarray  # (N, d)
    momenta: np.ndarray  # (N, d), components 2 pi k / L
    modes: np.ndarray  # (N, d) integer k

    @property
    def size(self) -> int:
        return self.n ** self.d

    @property
    def h(self) -> float:
        return self.L / self.n

    @property
    def momentum_norms(self) -> np.ndarray:
        return np.linalg.norm(self.momenta, axis=1)

    @property
    def zero_mode(self) -> int:
        return int(np.flatnonzero(np.all(self.modes == 0, axis=1))[0])

    def site_index(self, multi) -> int:
        return int(np.ravel_multi_index(tuple(np.mod(multi, self.n)), (self.n,) * self.d))

    def position_function(self, values) -> WeightedFunction:
        return WeightedFunction(self.position_space, values)

    def momentum_function(self, values) -> WeightedFunction:
        return WeightedFunction(self.momentum_space, values)


def make_grid(d: int, n: int, L: float = 2 * np.pi, max_points: int = MAX_POINTS) -> TorusGrid:
    """Lattice ``(Z/n)^d`` of side ``L``.

    Sites and modes are enumerated in row-major order; mode components run
    over ``-floor(n/2), ..., ceil(n/2) - 1``.
    """
    d, n = int(d), int(n)
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    if not L > 0:
        raise ValueError(f"side length must be positive, got {L}")
    size = n ** d
    if size > max_points:
        raise ValueError(f"grid has n^d = {size} points, above the cap {max_points}")
    axis_k = np.arange(-(n // 2), n - n // 2)
    sites = np.array(list(itertools.product(range(n), repeat=d)), dtype=float)
    modes = np.array(list(itertools.product(axis_k, repeat=d)), dtype=int)
    return TorusGrid(
        d=d, n=n, L=float(L),
        position_space=FiniteMeasureSpace.uniform(size, (L / n) ** d),
        momentum_space=FiniteMeasureSpace.uniform(size, L ** (-d)),
        positions=sites * (L / n),
        momenta=modes * (2 * np.pi / L),
        modes=modes,
    )


def dft(grid: TorusGrid):
    """DFT unitary in orthonormal coordinates and its kernel bound.

    ``Phi[k, i] = sqrt(v_k w_i) exp(-i p_k . x_i)``; the kernel bound is the
    largest modulus of ``Phi[k, i] / sqrt(v_k w_i)``.
    """
    phase = grid.momenta @ grid.positions.T
    v = grid.momentum_space.weights
    w = grid.position_space.weights
    Phi = np.sqrt(np.outer(v, w)) * np.exp(-1j * phase)
    return Phi, kernel_bound(Phi, grid.momentum_space, grid.position_space)


def kernel_bound(Phi, target: FiniteMeasureSpace, source: FiniteMeasureSpace, block_dim: int = 1) -> float:
    """``sup_{y,x} ||Phi(y, x)||_B``, i.e. the L_1 -> L_inf norm of ``Phi``."""
    m = block_dim
    ny, nx = target.size, source.size
    K = np.asarray(Phi).reshape(ny, m, nx, m) / np.sqrt(np.outer(target.weights, source.weights))[:, None, :, None]
    if m == 1:
        return float(np.max(np.abs(K)))
    blocks = K.transpose(0, 2, 1, 3).reshape(-1, m, m)
    return float(np.max(np.linalg.norm(blocks, ord=2, axis=(1, 2))))


def multiplier(grid: TorusGrid, symbol, block_dim: int = 1) -> HermitianOperator:
    """Fourier multiplier ``Phi* diag(symbol) Phi`` on the position space."""
    vals = symbol.values if isinstance(symbol, WeightedFunction) else np.asarray(symbol)
    if np.iscomplexobj(vals):
        if np.any(vals.imag != 0):
            raise ValueError("multiplier symbol must be real")
        vals = vals.real
    vals = np.asarray(vals, dtype=float)
    if vals.shape != (grid.size,):
        raise ValueError(f"symbol needs {grid.size} values")
    Phi, _ = dft(grid)
    M = Phi.conj().T @ (vals[:, None] * Phi)
    if block_dim > 1:
        M = np.kron(M, np.eye(block_dim))
    return HermitianOperator(grid.position_space, 0.5 * (M + M.conj().T), block_dim)


def symbol_fractional(grid: TorusGrid, s: float, zero_mode: str = "exclude",
                      eps: float = 1e-6) -> WeightedFunction:
    """Symbol ``|p|^{2s}``.

    ``zero_mode="floor"`` puts ``eps`` at ``p = 0``; ``"exclude"`` puts ``0``
    there, so the multiplier has the constants as its kernel and spectral
    quantities are taken on the mean-zero subspace.
    """
    vals = grid.momentum_norms ** (2 * s)
    k0 = grid.zero_mode
    if zero_mode == "floor":
        if not eps > 0:
            raise ValueError(f"floor eps must be positive, got {eps}")
        vals[k0] = eps
    elif zero_mode == "exclude":
        vals[k0] = 0.0
    else:
        raise ValueError(f"unknown zero-mode policy {zero_mode!r}")
    return grid.momentum_function(vals)


def reciprocal_symbol(f: WeightedFunction) -> WeightedFunction:
    """Pointwise ``1/f`` with ``1/0 = 0`` (inverse on the range)."""
    v = np.asarray(f.values, dtype=float)
    out = np.zeros_like(v)
    nz = v != 0
    out[nz] = 1.0 / v[nz]
    return WeightedFunction(f.base, out)


def laplacian_symbol(grid: TorusGrid) -> WeightedFunction:
    """Symbol of the nearest-neighbour lattice Laplacian, ``(2/h^2) sum (1 - cos(2 pi k_j / n))``."""
    k = grid.modes
    vals = (2 / grid.h ** 2) * np.sum(1 - np.cos(2 * np.pi * k / grid.n), axis=1)
    return grid.momentum_function(vals)


@dataclass(frozen=True)
class MagneticField:
    """Peierls phases on directed lattice edges.

    ``forward[a, x]`` is the phase on the edge ``x -> x + e_a`` and
    ``backward[a, x]`` the phase on ``x + e_a -> x``; they must cancel.
    """

    forward: np.ndarray
    backward: np.ndarray

    @classmethod
    def from_forward(cls, theta) -> "MagneticField":
        theta = np.asarray(theta, dtype=float)
        return cls(theta, -theta)

    @classmethod
    def zero(cls, grid: TorusGrid) -> "MagneticField":
        return cls.from_forward(np.zeros((grid.d, grid.size)))

    @classmethod
    def random(cls, grid: TorusGrid, rng, scale: float = np.pi) -> "MagneticField":
        return cls.from_forward(rng.uniform(-scale, scale, size=(grid.d, grid.size)))


def magnetic_laplacian(grid: TorusGrid, field: MagneticField) -> HermitianOperator:
    """``(T f)(x) = h^-2 sum_{+-e} (f(x) - exp(i theta(x, x+e)) f(x+e))``."""
    fwd = np.asarray(field.forward, dtype=float)
    bwd = np.asarray(field.backward, dtype=float)
    N, d = grid.size, grid.d
    if fwd.shape != (d, N) or bwd.shape != (d, N):
        raise ValueError(f"edge phases must have shape {(d, N)}")
    if np.max(np.abs(np.angle(np.exp(1j * (fwd + bwd)))), initial=0.0) > 1e-12:
        raise ValueError("edge phases are not antisymmetric under reversal")
    h2 = grid.h ** 2
    T = np.zeros((N, N), dtype=complex)
    sites = np.rint(grid.positions / grid.h).astype(int)
    for a in range(d):
        shift = np.zeros(d, dtype=int)
        shift[a] = 1
        for x in range(N):
            y = grid.site_index(sites[x] + shift)
            T[x, x] += 2 / h2
            T[x, y] -= np.exp(1j * fwd[a, x]) / h2
            T[y, x] -= np.exp(1j * bwd[a, x]) / h2
    return HermitianOperator(grid.position_space, T)


def density_diag(H: HermitianOperator) -> WeightedFunction:
    """Kernel diagonal ``M_ii / w_i`` (blocks when ``block_dim > 1``)."""
    w = H.space.weights
    blocks = H.diagonal_blocks()
    if H.block_dim == 1:
        return WeightedFunction(H.space, np.real(blocks[:, 0, 0]) / w)
    return WeightedFunction(H.space, blocks / w[:, None, None])


def mean_zero_projector(grid: TorusGrid) -> np.ndarray:
    """Orthogonal projector onto functions orthogonal to the constants."""
    N = grid.size
    return np.eye(N) - np.full((N, N), 1.0 / N)


def spectrum(H: HermitianOperator) -> np.ndarray:
    return eigh(H).eigenvalues
