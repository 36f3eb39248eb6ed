"""Weighted actions of the torus T^k on M_d.

A weight vector w_i in Z^k is attached to each basis vector of C^d.  The
point z of T^k acts by conjugation with U(z) = diag(z^{w_1}, ..., z^{w_d}),
so the matrix unit E_ij is homogeneous of degree w_i - w_j.  Everything in
this module is exact entrywise masking except the quadrature routines, which
average the action over a roots-of-unity grid.
"""

from __future__ import annotations

import itertools
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .matrix_core import InputError, as_cmatrix, hs_norm, matrix_unit, op_norm

MultiIndex = tuple[int, ...]

WEIGHT_SOFT_LIMIT = 16
UNIMODULAR_TOL = 1e-12


def multi_index(coords, rank: int | None = None) -> MultiIndex:
    """Coerce ``coords`` (int or iterable of ints) into a MultiIndex."""
    if isinstance(coords, (int, np.integer)):
        coords = (int(coords),)
    out = tuple(int(c) for c in coords)
    if len(out) == 0:
        raise InputError("multi-index must have rank >= 1")
    if rank is not None and len(out) != rank:
        raise InputError(f"multi-index {out} has rank {len(out)}, expected {rank}")
    return out


def leq(m: Sequence[int], n: Sequence[int]) -> bool:
    """Componentwise order: m <= n iff n - m has nonnegative coordinates."""
    return all(b - a >= 0 for a, b in zip(m, n, strict=True))


def box(lo: Sequence[int], hi: Sequence[int]) -> Iterable[MultiIndex]:
    """All m with lo <= m <= hi, in lexicographic order."""
    return itertools.product(*(range(a, b + 1) for a, b in zip(lo, hi, strict=True)))


def torus_point(coords, rank: int | None = None) -> np.ndarray:
    """Validate a point of T^k; every coordinate must have modulus one."""
    z = np.atleast_1d(np.asarray(coords, dtype=np.complex128))
    if z.ndim != 1 or z.size == 0:
        raise InputError("torus point must be a nonempty vector")
    if rank is not None and z.size != rank:
        raise InputError(f"torus point has rank {z.size}, expected {rank}")
    if not np.all(np.isfinite(z)) or np.max(np.abs(np.abs(z) - 1.0)) > UNIMODULAR_TOL:
        raise InputError("torus point coordinates must have modulus 1")
    return z


def torus_from_angles(t) -> np.ndarray:
    """The point (e^{2 pi i t_1}, ..., e^{2 pi i t_k})."""
    return np.exp(2j * np.pi * np.atleast_1d(np.asarray(t, dtype=float)))


def character(z: np.ndarray, n: Sequence[int]) -> complex:
    """z^n = prod_j z_j^{n_j}."""
    return complex(np.prod(np.asarray(z, dtype=np.complex128) ** np.asarray(n)))


@dataclass(frozen=True)
class WeightedAction:
    """Action of T^k on M_d given by integer weights, one row per basis vector.

    Examples
    --------
    >>> alpha = WeightedAction.from_weights([[1], [0]])
    >>> alpha.degree(0, 1)
    (1,)
    """

    weights: np.ndarray  # (d, k) int64

    def __post_init__(self):
        w = np.array(self.weights, dtype=np.int64)
        if w.ndim == 1:
            w = w[:, None]
        if w.ndim != 2 or w.shape[0] < 1 or w.shape[1] < 1:
            raise InputError(f"weights must be a (d, k) integer array, got shape {w.shape}")
        if np.max(np.abs(w)) > WEIGHT_SOFT_LIMIT:
            warnings.warn(f"weights exceed the soft limit {WEIGHT_SOFT_LIMIT}; "
                          "quadrature grids will be large", stacklevel=3)
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_weights(cls, weights) -> "WeightedAction":
        return cls(np.asarray(weights))

    @property
    def dim(self) -> int:
        return self.weights.shape[0]

    @property
    def rank(self) -> int:
        return self.weights.shape[1]

    def degree(self, i: int, j: int) -> MultiIndex:
        return tuple(int(x) for x in self.weights[i] - self.weights[j])

    def degree_array(self) -> np.ndarray:
        """Array D of shape (d, d, k) with D[i, j] = w_i - w_j."""
        return self.weights[:, None, :] - self.weights[None, :, :]

    def band(self) -> int:
        """B = max |coordinate| over all pairwise weight differences."""
        return int(np.max(np.abs(self.degree_array())))

    def degrees(self) -> list[MultiIndex]:
        """Distinct pairwise differences, lexicographically sorted."""
        d = self.degree_array().reshape(-1, self.rank)
        return sorted({tuple(int(x) for x in row) for row in d})

    def _check(self, a) -> np.ndarray:
        a = as_cmatrix(a)
        if a.shape[0] != self.dim:
            raise InputError(f"matrix of dim {a.shape[0]} given to an action on M_{self.dim}")
        return a


def _phase_matrix(alpha: WeightedAction, z: np.ndarray) -> np.ndarray:
    # z^(w_i - w_j) computed as u_i * conj(u_j), u_i = z^{w_i}
    u = np.prod(z[None, :] ** alpha.weights, axis=1)
    return u[:, None] * np.conj(u)[None, :]


def unitary(alpha: WeightedAction, z) -> np.ndarray:
    """U(z) = diag(z^{w_i}) implementing the action by conjugation."""
    z = torus_point(z, alpha.rank)
    return np.diag(np.prod(z[None, :] ** alpha.weights, axis=1))


def act(alpha: WeightedAction, z, a) -> np.ndarray:
    """Apply alpha_z to ``a``: entry (i, j) is multiplied by z^(w_i - w_j)."""
    z = torus_point(z, alpha.rank)
    a = alpha._check(a)
    return _phase_matrix(alpha, z) * a


def _degree_mask(alpha: WeightedAction, n: MultiIndex) -> np.ndarray:
    return np.all(alpha.degree_array() == np.asarray(n)[None, None, :], axis=2)


def spectral_component(alpha: WeightedAction, a, n) -> np.ndarray:
    """Homogeneous component a_n, computed exactly by masking entries."""
    a = alpha._check(a)
    n = multi_index(n, alpha.rank)
    return np.where(_degree_mask(alpha, n), a, 0.0 + 0.0j)


def nyquist_order(alpha: WeightedAction, n: Sequence[int] = ()) -> int:
    """Smallest grid size per axis making the quadrature exact for degree n."""
    b = max([alpha.band()] + [abs(int(c)) for c in n])
    return 2 * b + 1


def quadrature_grid(M: int, k: int) -> np.ndarray:
    """The M^k roots-of-unity grid on T^k, lexicographic, shape (M^k, k)."""
    roots = np.exp(2j * np.pi * np.arange(M) / M)
    idx = np.array(list(itertools.product(range(M), repeat=k)), dtype=np.int64)
    return roots[idx]


def haar_average(alpha: WeightedAction, a, n=None, M: int | None = None,
                 threads: int = 1) -> np.ndarray:
    """(1/M^k) sum over the grid of act(z, a) z^{-n}.

    The terms are evaluated in chunks (optionally on ``threads`` workers) and
    then reduced in one fixed-order sum, so the result does not depend on the
    number of threads.
    """
    a = alpha._check(a)
    n = multi_index(n if n is not None else (0,) * alpha.rank, alpha.rank)
    if M is None:
        M = nyquist_order(alpha, n)
    if M < 1:
        raise InputError("quadrature order M must be >= 1")
    grid = quadrature_grid(M, alpha.rank)
    terms = np.empty((grid.shape[0],) + a.shape, dtype=np.complex128)

    def fill(rows: range) -> None:
        for r in rows:
            z = grid[r]
            terms[r] = _phase_matrix(alpha, z) * a * np.conj(np.prod(z ** np.asarray(n)))

    threads = max(1, int(threads))
    chunks = [range(s, min(s + 64, grid.shape[0])) for s in range(0, grid.shape[0], 64)]
    if threads == 1:
        for c in chunks:
            fill(c)
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            list(ex.map(fill, chunks))
    return terms.sum(axis=0) / grid.shape[0]


def spectral_component_quadrature(alpha: WeightedAction, a, n, M: int | None = None,
                                  threads: int = 1) -> np.ndarray:
    """Component a_n by Haar quadrature on the M^k grid.

    Exact up to rounding once M > 2B (B = ``alpha.band()``) and |n| <= B;
    smaller M aliases other degrees into n.
    """
    return haar_average(alpha, a, n, M, threads)


def support_degrees(alpha: WeightedAction, a, tol: float = 0.0) -> list[MultiIndex]:
    a = alpha._check(a)
    out = []
    for n in alpha.degrees():
        c = spectral_component(alpha, a, n)
        if op_norm(c) > tol:
            out.append(n)
    return out


def fixed_algebra_basis(alpha: WeightedAction) -> list[np.ndarray]:
    """Matrix units E_ij with w_i = w_j, row-major; they span A_0."""
    d = alpha.dim
    return [matrix_unit(d, i, j) for i in range(d) for j in range(d)
            if np.array_equal(alpha.weights[i], alpha.weights[j])]


def lipschitz_constant(alpha: WeightedAction, a) -> float:
    """C(a) with ||act(z, a) - act(z', a)|| <= C(a) max_j |z_j - z'_j|.

    Uses |z^m - z'^m| <= |m|_1 max_j |z_j - z'_j| on T^k and the HS norm as an
    upper bound for the operator norm.
    """
    a = alpha._check(a)
    l1 = np.sum(np.abs(alpha.degree_array()), axis=2)
    active = np.abs(a) > 0
    if not np.any(active):
        return 0.0
    return float(np.max(l1[active])) * hs_norm(a)


def random_action(rng: np.random.Generator, d_max: int = 8, k_max: int = 2,
                  w_max: int = 3) -> WeightedAction:
    d = int(rng.integers(1, d_max + 1))
    k = int(rng.integers(1, k_max + 1))
    return WeightedAction(rng.integers(-w_max, w_max + 1, size=(d, k)))


def random_torus_point(rng: np.random.Generator, k: int) -> np.ndarray:
    return torus_from_angles(rng.random(k))
