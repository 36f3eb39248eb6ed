"""Dense complex linear algebra used by every axiom check.

Elements of the model algebra M_d are plain ``numpy`` arrays of shape
``(d, d)`` and dtype ``complex128``.  Subspaces are given by lists of such
arrays; they are flattened row-major whenever a vector-space computation is
needed.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

DEFAULT_TOL = 1e-9
SVD_MAX_DIM = 64


class InputError(ValueError):
    """Raised for malformed matrices or incompatible dimensions."""


def as_cmatrix(a, name: str = "a") -> np.ndarray:
    """Validate ``a`` as a square, finite complex matrix and return a copy."""
    arr = np.array(a, dtype=np.complex128)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] < 1:
        raise InputError(f"{name}: expected a nonempty square matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name}: non-finite entries")
    return arr


def adjoint(a: np.ndarray) -> np.ndarray:
    return np.conj(a).T


def matrix_unit(d: int, i: int, j: int) -> np.ndarray:
    """The matrix unit E_ij in M_d (zero-based indices)."""
    e = np.zeros((d, d), dtype=np.complex128)
    e[i, j] = 1.0
    return e


def _check_same_dim(mats: Sequence[np.ndarray], d: int | None = None) -> int:
    if d is None:
        d = mats[0].shape[0]
    for m in mats:
        if m.shape != (d, d):
            raise InputError(f"dimension mismatch: expected {(d, d)}, got {m.shape}")
    return d


def power_iteration_norm(a: np.ndarray, iters: int = 500, tol: float = 1e-15,
                         seed: int = 0) -> float:
    """Operator norm from power iteration on a*a.

    Independent of the SVD path; used as the fallback for large ``d`` and as a
    test oracle.
    """
    a = as_cmatrix(a)
    h = adjoint(a) @ a
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(a.shape[0]) + 1j * rng.standard_normal(a.shape[0])
    v /= np.linalg.norm(v)
    lam = 0.0
    for _ in range(iters):
        w = h @ v
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        v = w / nw
        new = float(np.real(np.vdot(v, h @ v)))
        if abs(new - lam) <= tol * max(new, 1.0):
            lam = new
            break
        lam = new
    return float(np.sqrt(max(lam, 0.0)))


def op_norm(a) -> float:
    """Largest singular value of ``a``.

    Raises
    ------
    InputError
        If ``a`` is not a finite square matrix.
    """
    a = as_cmatrix(a)
    if a.shape[0] > SVD_MAX_DIM:
        return power_iteration_norm(a)
    return float(np.linalg.svd(a, compute_uv=False)[0])


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product trace(a* b), conjugate-linear in ``a``."""
    a = np.asarray(a, dtype=np.complex128)
    b = np.asarray(b, dtype=np.complex128)
    if a.shape != b.shape:
        raise InputError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a.ravel(), b.ravel()))


def hs_norm(a) -> float:
    return float(np.linalg.norm(np.asarray(a, dtype=np.complex128).ravel()))


def _flatten(mats: Sequence[np.ndarray]) -> np.ndarray:
    # rows are the row-major flattenings
    return np.stack([np.asarray(m, dtype=np.complex128).ravel() for m in mats])


def orthonormal_span(basis: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal columns spanning the flattened ``basis`` (shape ``(d*d, r)``).

    Directions with singular value below ``tol`` times the largest are dropped.
    """
    if len(basis) == 0:
        return np.zeros((0, 0), dtype=np.complex128)
    x = _flatten(basis).T
    u, s, _ = np.linalg.svd(x, full_matrices=False)
    if s.size == 0 or s[0] == 0.0:
        return np.zeros((x.shape[0], 0), dtype=np.complex128)
    r = int(np.sum(s > tol * s[0]))
    return u[:, :r]


def subspace_residual(a, basis: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> float:
    """HS distance from ``a`` to span(``basis``) by orthogonal projection.

    An empty basis spans {0}, so the residual is the HS norm of ``a``.
    """
    a = np.asarray(a, dtype=np.complex128)
    if len(basis) == 0:
        return hs_norm(a)
    _check_same_dim(list(basis), a.shape[0])
    q = orthonormal_span(basis, tol)
    v = a.ravel()
    if q.shape[1] == 0:
        return float(np.linalg.norm(v))
    r = v - q @ (q.conj().T @ v)
    return float(np.linalg.norm(r))


def numerical_rank(mats: Sequence[np.ndarray], tol: float = DEFAULT_TOL) -> int:
    """Rank of the stacked row-major flattenings of ``mats``.

    Counts singular values greater than ``tol`` times the largest one.
    """
    if len(mats) == 0:
        raise InputError("numerical_rank needs a nonempty list")
    mats = [np.asarray(m, dtype=np.complex128) for m in mats]
    _check_same_dim(mats)
    s = np.linalg.svd(_flatten(mats), compute_uv=False)
    if s[0] == 0.0:
        return 0
    return int(np.sum(s > tol * s[0]))


def random_cmatrix(rng: np.random.Generator, d: int) -> np.ndarray:
    """Complex Gaussian matrix with unit-variance real and imaginary parts."""
    return rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))


def random_unitary(rng: np.random.Generator, d: int) -> np.ndarray:
    """Haar-random unitary from the QR of a complex Gaussian matrix."""
    q, r = np.linalg.qr(random_cmatrix(rng, d))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph[None, :]
