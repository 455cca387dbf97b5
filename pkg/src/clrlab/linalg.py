"""Dense Hermitian linear algebra on finite measure spaces.

Operators are stored in the orthonormalized coordinates
``e_i = 1_{x_i} / sqrt(w_i)`` (tensored with the standard basis of ``C^m``,
point-major ordering ``i * m + alpha``).  In these coordinates the integral
kernel is ``k(x_i, x_j) = M_ij / sqrt(w_i w_j)`` and the diagonal density is
``rho(x_i) = M_ii / w_i``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measure import FiniteMeasureSpace

HERMITIAN_RTOL = 1e-12
KERNEL_RTOL = 1e-12
JACOBI_TOL = 1e-12


@dataclass(frozen=True)
class HermitianOperator:
    space: FiniteMeasureSpace
    matrix: np.ndarray
    block_dim: int = 1

    def __post_init__(self):
        M = np.asarray(self.matrix)
        if M.dtype.kind not in "fc":
            M = M.astype(float)
        dim = self.space.size * self.block_dim
        if M.shape != (dim, dim):
            raise ValueError(f"matrix shape {M.shape} does not match dimension {dim}")
        asym = hermitian_defect(M)
        scale = np.max(np.abs(M), initial=0.0)
        if asym > HERMITIAN_RTOL * max(scale, np.finfo(float).tiny):
            raise ValueError(f"operator is not Hermitian (max |M - M*| = {asym:.3e})")
        M = 0.5 * (M + M.conj().T)
        M.setflags(write=False)
        object.__setattr__(self, "matrix", M)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def with_matrix(self, M) -> "HermitianOperator":
        return HermitianOperator(self.space, M, self.block_dim)

    def kernel_value(self, i: int, j: int):
        w = self.space.weights
        m = self.block_dim
        blk = self.matrix[i * m:(i + 1) * m, j * m:(j + 1) * m] / np.sqrt(w[i] * w[j])
        return blk[0, 0] if m == 1 else blk

    def diagonal_blocks(self) -> np.ndarray:
        """Raw diagonal blocks ``M_ii``, shape ``(n, m, m)``."""
        n, m = self.space.size, self.block_dim
        idx = np.arange(n)
        return self.matrix.reshape(n, m, n, m)[idx, :, idx, :]

    def __add__(self, other):
        return self.with_matrix(self.matrix + _mat(other))

    def __sub__(self, other):
        return self.with_matrix(self.matrix - _mat(other))

    def __mul__(self, c):
        return self.with_matrix(c * self.matrix)

    __rmul__ = __mul__


def _mat(H):
    return H.matrix if isinstance(H, HermitianOperator) else np.asarray(H)


def hermitian_defect(M) -> float:
    M = np.asarray(M)
    return float(np.max(np.abs(M - M.conj().T), initial=0.0))


def identity(space: FiniteMeasureSpace, block_dim: int = 1) -> HermitianOperator:
    return HermitianOperator(space, np.eye(space.size * block_dim), block_dim)


def multiplication(f) -> HermitianOperator:
    """Multiplication by a real scalar or Hermitian-block function."""
    space = f.base
    if f.is_block:
        n, m = space.size, f.block_dim
        M = np.zeros((n * m, n * m), dtype=f.values.dtype)
        for i in range(n):
            M[i * m:(i + 1) * m, i * m:(i + 1) * m] = f.values[i]
        return HermitianOperator(space, M, m)
    if np.iscomplexobj(f.values) and np.any(f.values.imag != 0):
        raise ValueError("multiplication by a non-real function is not Hermitian")
    return HermitianOperator(space, np.diag(np.real(f.values)))


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvalues: np.ndarray
    vectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        Q = self.vectors
        return (Q * self.eigenvalues) @ Q.conj().T

    @property
    def scale(self) -> float:
        return float(np.max(np.abs(self.eigenvalues), initial=0.0))


def _round_robin(n):
    """Rounds of disjoint index pairs covering every pair exactly once."""
    idx = list(range(n)) + ([-1] if n % 2 else [])
    k = len(idx)
    rounds = []
    for _ in range(k - 1):
        pairs = [(idx[i], idx[k - 1 - i]) for i in range(k // 2)]
        pairs = [(min(a, b), max(a, b)) for a, b in pairs if a >= 0 and b >= 0]
        if pairs:
            rounds.append((np.array([a for a, _ in pairs]), np.array([b for _, b in pairs])))
        idx = [idx[0], idx[-1]] + idx[1:-1]
    return rounds


def jacobi_eigh(M, tol: float = JACOBI_TOL, max_sweeps: int = 60):
    """Cyclic Jacobi eigensolver for a dense Hermitian matrix.

    Each sweep visits every pair ``(p, q)`` once, in round-robin order so that
    the rotations of one round act on disjoint index pairs and can be applied
    together.  Iterates until the off-diagonal Frobenius norm falls below
    ``tol * ||M||_F``.
    """
    A = np.array(M, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    if n == 1:
        return A.real.diagonal().copy(), V
    fro = np.linalg.norm(A)
    if fro == 0.0:
        return np.zeros(n), V
    rounds = _round_robin(n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(A - np.diag(A.diagonal()))
        if off <= tol * fro:
            break
        for P, Q in rounds:
            apq = A[P, Q]
            r = np.abs(apq)
            live = r > np.finfo(float).tiny
            if not np.any(live):
                continue
            P, Q, apq, r = P[live], Q[live], apq[live], r[live]
            app = A[P, P].real
            aqq = A[Q, Q].real
            tau = (aqq - app) / (2.0 * r)
            t = np.where(tau >= 0, 1.0, -1.0) / (np.abs(tau) + np.sqrt(1.0 + tau * tau))
            c = 1.0 / np.sqrt(1.0 + t * t)
            s = t * c
            u = np.conj(apq) / r  # phase making the (p, q) entry real
            cp, cq = A[:, P].copy(), A[:, Q].copy()
            A[:, P] = c * cp - s * u * cq
            A[:, Q] = s * cp + c * u * cq
            rp, rq = A[P, :].copy(), A[Q, :].copy()
            A[P, :] = c[:, None] * rp - (s * np.conj(u))[:, None] * rq
            A[Q, :] = s[:, None] * rp + (c * np.conj(u))[:, None] * rq
            A[P, Q] = 0.0
            A[Q, P] = 0.0
            vp, vq = V[:, P].copy(), V[:, Q].copy()
            V[:, P] = c * vp - s * u * vq
            V[:, Q] = s * vp + c * u * vq
    else:
        raise RuntimeError("Jacobi iteration did not converge")
    return A.diagonal().real.copy(), V


def eigh(H, method: str = "lapack") -> EigenDecomposition:
    """Eigendecomposition with ascending eigenvalues.

    ``method="jacobi"`` runs :func:`jacobi_eigh`; the default uses LAPACK.
    Ties are broken by index (stable sort), so the output is deterministic.
    """
    M = _mat(H)
    if not isinstance(H, HermitianOperator):
        asym = hermitian_defect(M)
        if asym > HERMITIAN_RTOL * max(np.max(np.abs(M), initial=0.0), np.finfo(float).tiny):
            raise ValueError(f"matrix is not Hermitian (max |M - M*| = {asym:.3e})")
        M = 0.5 * (M + M.conj().T)
    if method == "lapack":
        lam, Q = np.linalg.eigh(M)
    elif method == "jacobi":
        lam, Q = jacobi_eigh(M)
    else:
        raise ValueError(f"unknown eigensolver {method!r}")
    order = np.argsort(lam, kind="stable")
    return EigenDecomposition(lam[order], Q[:, order])


def eigvals(H) -> np.ndarray:
    return np.linalg.eigvalsh(_mat(H))


def _kernel_threshold(lam):
    return KERNEL_RTOL * max(np.max(np.abs(lam), initial=0.0), np.finfo(float).tiny)


# spectral functions; each receives (eigenvalues, threshold, parameter)
def _sqrt(lam, thr, _):
    if np.any(lam < -thr):
        raise ValueError(f"square root of an operator with eigenvalue {lam.min():.3e} < 0")
    return np.where(lam > thr, np.sqrt(np.clip(lam, 0.0, None)), 0.0)


def _pinv(lam, thr, _):
    out = np.zeros_like(lam)
    nz = np.abs(lam) > thr
    out[nz] = 1.0 / lam[nz]
    return out


def _pinv_sqrt(lam, thr, _):
    if np.any(lam < -thr):
        raise ValueError(f"inverse square root of an operator with eigenvalue {lam.min():.3e} < 0")
    out = np.zeros_like(lam)
    nz = lam > thr
    out[nz] = 1.0 / np.sqrt(lam[nz])
    return out


SPECTRAL_FUNCTIONS = {
    "sqrt": _sqrt,
    "pinv": _pinv,
    "pinv_sqrt": _pinv_sqrt,
    "exp": lambda lam, thr, t: np.exp(-t * lam),
    "pos": lambda lam, thr, _: np.clip(lam, 0.0, None),
    "neg": lambda lam, thr, _: np.clip(-lam, 0.0, None),
    "proj_le": lambda lam, thr, E: ((lam > thr) & (lam <= E)).astype(float),
    "proj_gt": lambda lam, thr, E: (lam > max(E, thr)).astype(float),
    "proj_range": lambda lam, thr, _: (np.abs(lam) > thr).astype(float),
}


def apply_fn(H: HermitianOperator, fn: str, param: float = None,
             decomposition: EigenDecomposition = None) -> HermitianOperator:
    """Functional calculus ``Q phi(Lambda) Q*``.

    ``fn`` is one of ``sqrt``, ``pinv`` (inverse on the range), ``pinv_sqrt``,
    ``exp`` (``exp(-param * H)``), ``pos``, ``neg``, ``proj_le``
    (``chi_(0, param]``), ``proj_gt`` (``chi_(param, inf)``) and
    ``proj_range``.  Eigenvalues with modulus at most ``1e-12 * max|lambda|``
    are treated as kernel.
    """
    if fn not in SPECTRAL_FUNCTIONS:
        raise ValueError(f"unknown spectral function {fn!r}; choose from {sorted(SPECTRAL_FUNCTIONS)}")
    dec = decomposition or eigh(H)
    lam = dec.eigenvalues
    vals = SPECTRAL_FUNCTIONS[fn](lam, _kernel_threshold(lam), param)
    Q = dec.vectors
    return H.with_matrix((Q * vals) @ Q.conj().T)


def range_basis(H, decomposition: EigenDecomposition = None) -> np.ndarray:
    """Orthonormal columns spanning the range (non-kernel part) of ``H``."""
    dec = decomposition or eigh(H)
    keep = np.abs(dec.eigenvalues) > _kernel_threshold(dec.eigenvalues)
    return dec.vectors[:, keep]


def trace_positive_part(H, mu: float = 0.0) -> float:
    """``tr (H - mu)_+``."""
    lam = eigvals(H)
    return float(np.sum(np.clip(lam - mu, 0.0, None)))


def singular_values(K) -> np.ndarray:
    """Descending singular values of ``K`` from the eigenvalues of ``K* K``."""
    K = _mat(K)
    lam = np.linalg.eigvalsh(K.conj().T @ K)
    return np.sqrt(np.clip(lam, 0.0, None))[::-1]


def sandwich(A: HermitianOperator, B: HermitianOperator) -> HermitianOperator:
    """``A^{1/2} B A^{1/2}`` for PSD ``A``."""
    R = apply_fn(A, "sqrt").matrix
    S = R @ _mat(B) @ R
    return A.with_matrix(0.5 * (S + S.conj().T))


def count_below(H, threshold: float = 0.0) -> int:
    """Number of eigenvalues strictly below ``threshold``."""
    return int(np.sum(eigvals(H) < threshold))
