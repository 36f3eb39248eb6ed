"""Partial sums and Cesaro means of Z^k-graded elements.

For a graded element x with components x_m,

    s_n(x)     = sum_{-n <= m <= n} x_m                       (n in N^k)
    sigma_N(x) = prod_j (N_j + 1)^{-1} sum_{0 <= n <= N} s_n(x)

and counting how often each x_m appears gives the Fejer form

    sigma_N(x) = sum_{-N <= m <= N} prod_j (N_j + 1 - |m_j|) / (N_j + 1) x_m.

The engine only needs the :class:`GradedElement` capability, so matrices
under a torus action and band-limited functions on the circle share it.
"""

from __future__ import annotations

from typing import Any, Callable, Iterable, Protocol, Sequence

import numpy as np

from .matrix_core import InputError, op_norm
from .torus_action import (
    MultiIndex,
    WeightedAction,
    box,
    leq,
    multi_index,
    spectral_component,
    support_degrees,
)


class GradedElement(Protocol):
    """An element together with its homogeneous components.

    Elements returned by :meth:`component`, :meth:`zero` and :meth:`value`
    must support ``+``, ``-`` and multiplication by scalars.
    """

    rank: int

    def component(self, n: MultiIndex) -> Any: ...

    def norm(self, x: Any) -> float: ...

    def zero(self) -> Any: ...

    def value(self) -> Any: ...

    def support(self) -> Iterable[MultiIndex] | None:
        """Finite set of degrees carrying all nonzero components, or None."""
        ...


class _Accumulator:
    # Neumaier-compensated running sum; works elementwise on arrays
    def __init__(self, zero):
        self.s = zero * 0
        self.c = zero * 0

    def add(self, x) -> None:
        t = self.s + x
        if isinstance(t, np.ndarray):
            big = np.abs(self.s) >= np.abs(x)
            self.c = self.c + np.where(big, (self.s - t) + x, (x - t) + self.s)
        else:
            self.c = self.c + (((self.s - t) + x) if abs(self.s) >= abs(x) else ((x - t) + self.s))
        self.s = t

    def total(self):
        return self.s + self.c


class MatrixElement:
    """A matrix graded by the spectral subspaces of a weighted action."""

    def __init__(self, alpha: WeightedAction, a, tol: float = 0.0):
        self.alpha = alpha
        self.a = alpha._check(a)
        self.rank = alpha.rank
        self._support = support_degrees(alpha, self.a, tol)
        self._cache: dict[MultiIndex, np.ndarray] = {}

    def component(self, n: MultiIndex) -> np.ndarray:
        n = tuple(n)
        if n not in self._cache:
            self._cache[n] = spectral_component(self.alpha, self.a, n)
        return self._cache[n]

    def norm(self, x) -> float:
        return op_norm(x)

    def zero(self) -> np.ndarray:
        return np.zeros_like(self.a)

    def value(self) -> np.ndarray:
        return self.a

    def support(self) -> list[MultiIndex]:
        return list(self._support)


class FiniteElement:
    """An element specified directly by finitely many components.

    ``norm`` defaults to the operator norm for 2-d arrays and the Euclidean
    norm otherwise.
    """

    def __init__(self, components: dict, norm: Callable[[Any], float] | None = None):
        if not components:
            raise InputError("FiniteElement needs at least one component")
        comps = {multi_index(k): np.asarray(v) for k, v in components.items()}
        ranks = {len(k) for k in comps}
        if len(ranks) != 1:
            raise InputError("components have inconsistent ranks")
        self.rank = ranks.pop()
        self.components = dict(sorted(comps.items()))
        first = next(iter(self.components.values()))
        self._zero = np.zeros_like(first, dtype=np.result_type(first, np.complex128))
        self._norm = norm

    def component(self, n: MultiIndex):
        return self.components.get(tuple(n), self._zero)

    def norm(self, x) -> float:
        if self._norm is not None:
            return float(self._norm(x))
        x = np.asarray(x)
        if x.ndim == 2 and x.shape[0] == x.shape[1]:
            return op_norm(x)
        return float(np.linalg.norm(x.ravel()))

    def zero(self):
        return self._zero.copy()

    def value(self):
        acc = _Accumulator(self._zero)
        for v in self.components.values():
            acc.add(v)
        return acc.total()

    def support(self) -> list[MultiIndex]:
        return list(self.components)


def _check_nonneg(n, rank: int, name: str) -> MultiIndex:
    n = multi_index(n, rank)
    if any(c < 0 for c in n):
        raise InputError(f"{name} must lie in N^k, got {list(n)}")
    return n


def _degrees_in_box(x: GradedElement, n: MultiIndex) -> Iterable[MultiIndex]:
    lo = tuple(-c for c in n)
    supp = x.support()
    if supp is None:
        return box(lo, n)
    return [m for m in sorted(set(map(tuple, supp))) if leq(lo, m) and leq(m, n)]


def partial_sum(x: GradedElement, n) -> Any:
    """s_n(x): sum of the components over the box -n <= m <= n."""
    n = _check_nonneg(n, x.rank, "n")
    acc = _Accumulator(x.zero())
    for m in _degrees_in_box(x, n):
        acc.add(x.component(m))
    return acc.total()


def fejer_weights(N, m) -> float:
    """prod_j max(0, N_j + 1 - |m_j|) / (N_j + 1)."""
    N = multi_index(N)
    m = multi_index(m, len(N))
    w = 1.0
    for Nj, mj in zip(N, m):
        w *= max(0, Nj + 1 - abs(mj)) / (Nj + 1)
    return w


def cesaro_mean(x: GradedElement, N, method: str = "fejer") -> Any:
    """sigma_N(x).

    ``method="definition"`` averages the partial sums s_n over 0 <= n <= N
    literally; ``method="fejer"`` uses the weighted closed form.  Both sum in
    lexicographic order.
    """
    N = _check_nonneg(N, x.rank, "N")
    if method == "definition":
        acc = _Accumulator(x.zero())
        for n in box((0,) * len(N), N):
            acc.add(partial_sum(x, n))
        return acc.total() * (1.0 / float(np.prod([c + 1 for c in N])))
    if method == "fejer":
        acc = _Accumulator(x.zero())
        for m in _degrees_in_box(x, N):
            acc.add(fejer_weights(N, m) * x.component(m))
        return acc.total()
    raise ValueError(f"unknown method {method!r}")


def convergence_table(x: GradedElement, Ns: Sequence, method: str = "fejer") -> list[tuple[MultiIndex, float]]:
    """(N, ||sigma_N(x) - x||) for each N, in input order."""
    target = x.value()
    rows = []
    for N in Ns:
        N = _check_nonneg(N, x.rank, "N")
        rows.append((N, x.norm(cesaro_mean(x, N, method) - target)))
    return rows


def fejer_tail(x: GradedElement, N) -> Any:
    """sum_m (1 - w_N(m)) x_m over the support; equals x - sigma_N(x)."""
    N = _check_nonneg(N, x.rank, "N")
    supp = x.support()
    if supp is None:
        raise InputError("fejer_tail needs a finitely supported element")
    acc = _Accumulator(x.zero())
    for m in sorted(set(map(tuple, supp))):
        acc.add((1.0 - fejer_weights(N, m)) * x.component(m))
    return acc.total()


def fejer_error_bound(x: GradedElement, N) -> float:
    """sum_m (1 - w_N(m)) ||x_m||, an upper bound for ||sigma_N(x) - x||."""
    N = _check_nonneg(N, x.rank, "N")
    supp = x.support()
    if supp is None:
        raise InputError("fejer_error_bound needs a finitely supported element")
    return float(sum((1.0 - fejer_weights(N, m)) * x.norm(x.component(m))
                     for m in sorted(set(map(tuple, supp)))))


def diagonal(t: int, k: int) -> MultiIndex:
    return (int(t),) * k


def random_finite_element(rng: np.random.Generator, k: int, shape=(3, 3),
                          max_degree: int = 3, n_components: int = 6) -> FiniteElement:
    degs = set()
    while len(degs) < n_components:
        degs.add(tuple(int(v) for v in rng.integers(-max_degree, max_degree + 1, size=k)))
    comps = {g: rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
             for g in sorted(degs)}
    return FiniteElement(comps)


__all__ = [
    "GradedElement", "MatrixElement", "FiniteElement", "partial_sum", "cesaro_mean",
    "fejer_weights", "convergence_table", "fejer_tail", "fejer_error_bound", "diagonal",
    "random_finite_element",
]
