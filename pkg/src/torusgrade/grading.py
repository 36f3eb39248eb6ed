"""Gradings of M_d by Z^k and the torus actions that implement them.

A :class:`GradingSpec` lists, for finitely many degrees g, matrices spanning a
subspace A_g.  :func:`check_grading` verifies the grading axioms (joint
independence, A_g* = A_{-g}, A_g A_h in A_{g+h}) and reports the worst
offender of each.  :func:`grading_from_action` and :func:`action_from_grading`
pass between gradings and torus actions, and :func:`conditional_expectation`
is the degree-zero projection F, which coincides with Haar averaging of the
action.

Only the group Z^k is modelled.  The grading data here is finite
dimensional, so phenomena that live in universal completions are out of
reach: two Fell bundles can have isomorphic fibres yet differ as bundles
while their full cross-sectional algebras agree, and no matrix computation
distinguishes such a pair.  Nothing in this module attempts to.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from . import matrix_core as mc
from .matrix_core import DEFAULT_TOL, InputError, adjoint, hs_norm, op_norm
from .torus_action import (
    MultiIndex,
    WeightedAction,
    character,
    fixed_algebra_basis,
    haar_average,
    multi_index,
    random_action,
    spectral_component,
    torus_point,
)

DEFAULT_SEED = 0xC57A1


class SpecError(InputError):
    """Malformed grading specification."""


class DecompositionError(ValueError):
    """An element does not lie in the span of the grading subspaces."""

    def __init__(self, residual: float, tol: float):
        super().__init__(f"element is outside the graded span: residual {residual:.3e} > tol {tol:.1e}")
        self.residual = residual


def _neg(g: MultiIndex) -> MultiIndex:
    return tuple(-x for x in g)


def _add(g: MultiIndex, h: MultiIndex) -> MultiIndex:
    return tuple(a + b for a, b in zip(g, h))


@dataclass
class GradingSpec:
    """Finite family of subspaces A_g of M_d, each given by spanning matrices.

    Bases are kept verbatim (not orthonormalized) so that specs round-trip.
    """

    dim: int
    rank: int
    subspaces: dict[MultiIndex, list[np.ndarray]]

    def __post_init__(self):
        if self.dim < 1 or self.rank < 1:
            raise SpecError("dim and rank must be positive")
        clean: dict[MultiIndex, list[np.ndarray]] = {}
        for g, basis in self.subspaces.items():
            g = multi_index(g, self.rank)
            if g in clean:
                raise SpecError(f"duplicate degree {list(g)}")
            if len(basis) == 0:
                raise SpecError(f"degree {list(g)} has an empty basis")
            mats = []
            for b in basis:
                b = mc.as_cmatrix(b, f"basis element of degree {list(g)}")
                if b.shape[0] != self.dim:
                    raise SpecError(f"degree {list(g)}: matrix of dim {b.shape[0]}, expected {self.dim}")
                mats.append(b)
            clean[g] = mats
        self.subspaces = dict(sorted(clean.items()))

    @classmethod
    def from_pairs(cls, dim: int, rank: int,
                   pairs: Sequence[tuple[Sequence[int], Sequence[np.ndarray]]]) -> "GradingSpec":
        """Build from (degree, basis) pairs, rejecting repeated degrees."""
        seen: dict[MultiIndex, list[np.ndarray]] = {}
        for g, basis in pairs:
            g = multi_index(g, rank)
            if g in seen:
                raise SpecError(f"duplicate degree {list(g)}")
            seen[g] = list(basis)
        return cls(dim, rank, seen)

    def degrees(self) -> list[MultiIndex]:
        return list(self.subspaces)

    def basis(self, g: MultiIndex) -> list[np.ndarray]:
        return self.subspaces.get(tuple(g), [])

    def union(self) -> tuple[list[np.ndarray], list[MultiIndex]]:
        mats, labels = [], []
        for g, basis in self.subspaces.items():
            mats.extend(basis)
            labels.extend([g] * len(basis))
        return mats, labels

    def conjugated(self, u: np.ndarray) -> "GradingSpec":
        """Image of the grading under a -> u a u*."""
        return GradingSpec(self.dim, self.rank,
                           {g: [u @ b @ adjoint(u) for b in basis]
                            for g, basis in self.subspaces.items()})


@dataclass
class AxiomResult:
    status: bool
    worst_residual: float
    witness: list | None = None

    def to_dict(self) -> dict:
        return {"status": "pass" if self.status else "fail",
                "worst_residual": float(self.worst_residual),
                "witness": self.witness}


@dataclass
class GradingReport:
    independence: AxiomResult
    rank_deficit: int
    adjoint_symmetry: AxiomResult
    multiplicativity: AxiomResult
    total_dim: int
    full_dim: int
    topological: bool

    @property
    def totality(self) -> bool:
        return self.total_dim == self.full_dim

    @property
    def passed(self) -> bool:
        return (self.independence.status and self.adjoint_symmetry.status
                and self.multiplicativity.status)

    def to_dict(self) -> dict:
        ind = self.independence.to_dict()
        ind["rank_deficit"] = self.rank_deficit
        return {
            "independence": ind,
            "adjoint_symmetry": self.adjoint_symmetry.to_dict(),
            "multiplicativity": self.multiplicativity.to_dict(),
            "totality": {"status": "pass" if self.totality else "flagged",
                         "total_dim": self.total_dim, "full_dim": self.full_dim},
            "topological": {"status": "pass" if self.topological else "fail"},
        }


def grading_from_action(alpha: WeightedAction) -> GradingSpec:
    """A_n = span{E_ij : w_i - w_j = n} for every occurring degree n."""
    subspaces: dict[MultiIndex, list[np.ndarray]] = {}
    d = alpha.dim
    for i in range(d):
        for j in range(d):
            subspaces.setdefault(alpha.degree(i, j), []).append(mc.matrix_unit(d, i, j))
    return GradingSpec(d, alpha.rank, subspaces)


def check_grading(spec: GradingSpec, tol: float = DEFAULT_TOL) -> GradingReport:
    """Check the grading axioms on all spanning elements.

    Residuals are absolute HS distances.  A missing subspace A_{-g} or
    A_{g+h} counts as {0}.  Totality (sum of dimensions = d^2) is reported
    but not required, since gradings of subalgebras are legal input.
    """
    mats, _ = spec.union()
    r = mc.numerical_rank(mats, tol)
    deficit = len(mats) - r
    independence = AxiomResult(deficit == 0, float(deficit), None)
    if deficit:
        # witness: first degree whose basis is dependent on what came before
        acc: list[np.ndarray] = []
        for g, basis in spec.subspaces.items():
            for idx, b in enumerate(basis):
                if acc and mc.numerical_rank(acc + [b], tol) <= mc.numerical_rank(acc, tol):
                    independence.witness = [list(g), idx]
                    break
                acc.append(b)
            if independence.witness is not None:
                break

    q_cache: dict[MultiIndex, np.ndarray] = {}

    def residual(x: np.ndarray, g: MultiIndex) -> float:
        basis = spec.basis(g)
        if not basis:
            return hs_norm(x)
        if g not in q_cache:
            q_cache[g] = mc.orthonormal_span(basis, tol)
        q = q_cache[g]
        v = x.ravel()
        return float(np.linalg.norm(v - q @ (q.conj().T @ v)))

    worst_adj, adj_wit = 0.0, None
    for g, basis in spec.subspaces.items():
        for idx, a in enumerate(basis):
            res = residual(adjoint(a), _neg(g))
            if adj_wit is None or res > worst_adj:
                worst_adj, adj_wit = res, [list(g), idx]

    worst_mul, mul_wit = 0.0, None
    for g, bg in spec.subspaces.items():
        for h, bh in spec.subspaces.items():
            gh = _add(g, h)
            for a in bg:
                for b in bh:
                    res = residual(a @ b, gh)
                    if mul_wit is None or res > worst_mul:
                        worst_mul, mul_wit = res, [list(g), list(h), list(gh)]

    total = sum(mc.numerical_rank(b, tol) for b in spec.subspaces.values())
    return GradingReport(
        independence=independence,
        rank_deficit=deficit,
        adjoint_symmetry=AxiomResult(worst_adj <= tol, worst_adj, adj_wit),
        multiplicativity=AxiomResult(worst_mul <= tol, worst_mul, mul_wit),
        total_dim=total,
        full_dim=spec.dim ** 2,
        topological=deficit == 0,
    )


class GradedDecomposer:
    """Least-squares splitting of elements along an independent grading."""

    def __init__(self, spec: GradingSpec, tol: float = DEFAULT_TOL):
        mats, labels = spec.union()
        if mc.numerical_rank(mats, tol) < len(mats):
            raise SpecError("grading subspaces are not jointly independent")
        self.spec = spec
        self.tol = tol
        self._labels = labels
        self._mats = np.stack(mats)
        x = self._mats.reshape(len(mats), -1).T
        self._pinv = np.linalg.pinv(x)
        self._x = x

    def coefficients(self, a) -> np.ndarray:
        a = mc.as_cmatrix(a)
        if a.shape[0] != self.spec.dim:
            raise InputError(f"element of dim {a.shape[0]}, spec has dim {self.spec.dim}")
        v = a.ravel()
        c = self._pinv @ v
        res = float(np.linalg.norm(v - self._x @ c))
        if res > self.tol * max(1.0, float(np.linalg.norm(v))):
            raise DecompositionError(res, self.tol)
        return c

    def components(self, a) -> dict[MultiIndex, np.ndarray]:
        c = self.coefficients(a)
        out: dict[MultiIndex, np.ndarray] = {}
        d = self.spec.dim
        for coef, g, m in zip(c, self._labels, self._mats):
            out.setdefault(g, np.zeros((d, d), dtype=np.complex128))
            out[g] = out[g] + coef * m
        return out

    def __call__(self, z, a) -> np.ndarray:
        z = torus_point(z, self.spec.rank)
        comps = self.components(a)
        total = np.zeros((self.spec.dim, self.spec.dim), dtype=np.complex128)
        for g, ag in comps.items():
            total = total + character(z, g) * ag
        return total


def action_from_grading(spec: GradingSpec, tol: float = DEFAULT_TOL) -> Callable:
    """Evaluator (z, a) -> sum_g z^g a_g, where a = sum_g a_g in the given bases.

    Raises :class:`DecompositionError` when ``a`` is not in the graded span.
    """
    return GradedDecomposer(spec, tol)


@dataclass
class RepresentationReport:
    worst_multiplicative: float
    worst_adjoint: float
    tol: float
    witness: list | None = None

    @property
    def passed(self) -> bool:
        return max(self.worst_multiplicative, self.worst_adjoint) <= self.tol


def check_representation(spec: GradingSpec, gamma, tol: float = 1e-12) -> RepresentationReport:
    """Check that a -> gamma(g) a on each A_g is a representation of the bundle.

    Multiplicative: (gamma(g) a)(gamma(h) b) = gamma(g + h) ab.
    Involutive:     (gamma(g) a)* = gamma(-g) a*.
    """
    z = torus_point(gamma, spec.rank)
    worst_m, worst_a, wit = 0.0, 0.0, None
    for g, bg in spec.subspaces.items():
        cg = character(z, g)
        for a in bg:
            worst_a = max(worst_a, op_norm(adjoint(cg * a) - character(z, _neg(g)) * adjoint(a)))
            for h, bh in spec.subspaces.items():
                ch = character(z, h)
                cgh = character(z, _add(g, h))
                for b in bh:
                    r = op_norm((cg * a) @ (ch * b) - cgh * (a @ b))
                    if r > worst_m:
                        worst_m, wit = r, [list(g), list(h)]
    return RepresentationReport(worst_m, worst_a, tol, wit)


def conditional_expectation(alpha: WeightedAction, a) -> np.ndarray:
    """F(a): the degree-zero component of ``a``."""
    return spectral_component(alpha, a, (0,) * alpha.rank)


def haar_expectation(alpha: WeightedAction, a, M: int | None = None,
                     threads: int = 1) -> np.ndarray:
    """E(a) = integral of alpha_z(a) over T^k, by exact (Nyquist) quadrature."""
    return haar_average(alpha, a, None, M, threads)


@dataclass
class ExpectationReport:
    trials: int
    tol: float
    checks: dict[str, AxiomResult] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.status for c in self.checks.values())


def _random_in_span(rng: np.random.Generator, basis: Sequence[np.ndarray]) -> np.ndarray:
    c = rng.standard_normal(len(basis)) + 1j * rng.standard_normal(len(basis))
    return np.tensordot(c, np.stack(basis), axes=1)


def check_expectation_axioms(alpha: WeightedAction, trials: int = 100,
                             tol: float = 1e-12, seed: int = DEFAULT_SEED,
                             positivity_tol: float = 1e-10) -> ExpectationReport:
    """Verify that F is a faithful conditional expectation onto A_0.

    Over ``trials`` random samples: idempotence, contractivity in operator
    norm, positivity of F(a*a), the bimodule property F(xay) = x F(a) y for
    x, y in A_0, the trace identity trace F(a*a) = ||a||_HS^2, F = id on A_0
    and F = 0 on single nonzero degrees.
    """
    if trials < 1:
        raise InputError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    d = alpha.dim
    fixed = fixed_algebra_basis(alpha)
    nonzero = [n for n in alpha.degrees() if any(n)]
    worst = {k: 0.0 for k in ("idempotent", "contractive", "positive", "bimodule",
                              "trace_identity", "identity_on_A0", "kills_nonzero_degrees")}
    faithful = True
    for _ in range(trials):
        a = mc.random_cmatrix(rng, d)
        fa = conditional_expectation(alpha, a)
        worst["idempotent"] = max(worst["idempotent"],
                                  op_norm(conditional_expectation(alpha, fa) - fa))
        worst["contractive"] = max(worst["contractive"], op_norm(fa) - op_norm(a))
        faa = conditional_expectation(alpha, adjoint(a) @ a)
        herm = (faa + adjoint(faa)) / 2
        worst["positive"] = max(worst["positive"], -float(np.linalg.eigvalsh(herm)[0]))
        if op_norm(faa) <= 0.0:
            faithful = False
        x, y = _random_in_span(rng, fixed), _random_in_span(rng, fixed)
        worst["bimodule"] = max(worst["bimodule"],
                                op_norm(conditional_expectation(alpha, x @ a @ y) - x @ fa @ y))
        worst["trace_identity"] = max(worst["trace_identity"],
                                      abs(np.trace(faa) - hs_norm(a) ** 2))
        a0 = _random_in_span(rng, fixed)
        worst["identity_on_A0"] = max(worst["identity_on_A0"],
                                      op_norm(conditional_expectation(alpha, a0) - a0))
        if nonzero:
            n = nonzero[int(rng.integers(len(nonzero)))]
            an = spectral_component(alpha, a, n)
            worst["kills_nonzero_degrees"] = max(worst["kills_nonzero_degrees"],
                                                 op_norm(conditional_expectation(alpha, an)))
    rep = ExpectationReport(trials, tol)
    for k, v in worst.items():
        lim = positivity_tol if k == "positive" else tol
        rep.checks[k] = AxiomResult(v <= lim, max(v, 0.0))
    rep.checks["faithful"] = AxiomResult(faithful, 0.0)
    return rep


def random_canonical_spec(rng: np.random.Generator, d_max: int = 8, k_max: int = 2,
                          w_max: int = 3) -> GradingSpec:
    return grading_from_action(random_action(rng, d_max, k_max, w_max))


def unit_in_degree_zero(spec: GradingSpec, tol: float = DEFAULT_TOL) -> float:
    """HS residual of the identity against span(A_0)."""
    return mc.subspace_residual(np.eye(spec.dim), spec.basis((0,) * spec.rank), tol)
