"""Function-algebra models on the circle and on a proper arc.

C(T) is modelled by trigonometric polynomials and by grid samples; the
gauge action rotates, and the degree-n component of f is fhat(n) e_n.  For a
proper closed arc X the restrictions e_n|_X remain linearly independent, but
an f in C(X) has many extensions to T and hence no canonical Fourier
coefficients.  :func:`zero_component_norm_lower_bound` measures how badly the
"take the constant coefficient" map fails to be bounded on C(X).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .cesaro import cesaro_mean
from .matrix_core import InputError

DEFAULT_FINE_GRID = 4096
DEFAULT_EXTENSION_BAND = 1023
DEFAULT_ARC = (0.0, 0.5)
DEFAULT_BANDS = (4, 8, 16, 32)
DEFAULT_ITERS = 5000


def circle_grid(M: int) -> np.ndarray:
    """Uniform parameters t_j = j / M on [0, 1)."""
    return np.arange(M) / M


def e_n(n: int, t) -> np.ndarray:
    return np.exp(2j * np.pi * n * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class TrigPoly:
    """sum_{|n| <= B} c_n e^{2 pi i n t}; ``coeffs[n + B]`` holds c_n."""

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        if c.size % 2 == 0:
            raise InputError("TrigPoly needs 2B+1 coefficients")
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_dict(cls, coeffs: dict[int, complex]) -> "TrigPoly":
        B = max((abs(int(n)) for n in coeffs), default=0)
        c = np.zeros(2 * B + 1, dtype=np.complex128)
        for n, v in coeffs.items():
            c[int(n) + B] = v
        return cls(c)

    @classmethod
    def monomial(cls, n: int) -> "TrigPoly":
        return cls.from_dict({n: 1.0})

    @property
    def band(self) -> int:
        return (self.coeffs.size - 1) // 2

    def degrees(self) -> np.ndarray:
        return np.arange(-self.band, self.band + 1)

    def coefficient(self, n: int) -> complex:
        if abs(n) > self.band:
            return 0j
        return complex(self.coeffs[n + self.band])

    def __call__(self, t) -> np.ndarray:
        t = np.atleast_1d(np.asarray(t, dtype=float))
        out = np.zeros(t.shape, dtype=np.complex128)
        # chunked to bound memory for large bands
        for s in range(0, t.size, 1024):
            tt = t[s:s + 1024]
            out[s:s + 1024] = np.exp(2j * np.pi * np.outer(tt, self.degrees())) @ self.coeffs
        return out

    def samples(self, M: int) -> np.ndarray:
        """Values on the uniform M-point grid via an inverse FFT (M > 2B)."""
        if M <= 2 * self.band:
            raise InputError(f"M={M} does not resolve band {self.band}")
        buf = np.zeros(M, dtype=np.complex128)
        buf[self.degrees() % M] = self.coeffs
        return np.fft.ifft(buf) * M

    def sup_norm(self, oversample: int = 4) -> float:
        """Grid maximum with ``oversample`` x (2B+1) points."""
        return float(np.max(np.abs(self.samples(oversample * (2 * self.band + 1)))))

    def rotate(self, z: complex) -> "TrigPoly":
        """Gauge action: (alpha_z f)(w) = f(zw), i.e. c_n -> z^n c_n."""
        return TrigPoly(self.coeffs * complex(z) ** self.degrees())

    def fejer_mean(self, N: int) -> "TrigPoly":
        """Coefficients damped by max(0, 1 - |n|/(N+1))."""
        w = np.maximum(0.0, N + 1 - np.abs(self.degrees())) / (N + 1)
        return TrigPoly(self.coeffs * w)


def fourier_coefficient(samples, n: int) -> complex:
    """(1/M) sum_j f(z_j) z_j^{-n} over the uniform grid z_j = e^{2 pi i j/M}."""
    f = np.asarray(samples, dtype=np.complex128)
    M = f.size
    if 2 * abs(n) >= M:
        warnings.warn(f"degree {n} aliases on a {M}-point grid", stacklevel=2)
    return complex(np.sum(f * e_n(-n, circle_grid(M))) / M)


def fourier_coefficients(samples, B: int) -> np.ndarray:
    """Coefficients for -B..B at once by FFT (the vectorized counterpart)."""
    f = np.asarray(samples, dtype=np.complex128)
    M = f.size
    if 2 * B >= M:
        warnings.warn(f"band {B} aliases on a {M}-point grid", stacklevel=2)
    F = np.fft.fft(f) / M
    return F[np.arange(-B, B + 1) % M]


class CircleFunction:
    """A function on T exposed as a graded element.

    Components are fhat(n) e_n evaluated on the uniform ``eval_size`` grid;
    the coefficients come from an FFT of ``sample_size`` samples.  The norm
    is the grid maximum.
    """

    rank = 1

    def __init__(self, f: Callable[[np.ndarray], np.ndarray], sample_size: int = DEFAULT_FINE_GRID,
                 eval_size: int | None = None):
        self.f = f
        self.sample_size = sample_size
        self.t = circle_grid(eval_size or sample_size)
        F = np.fft.fft(np.asarray(f(circle_grid(sample_size)), dtype=np.complex128)) / sample_size
        self._F = F
        self._value = np.asarray(f(self.t), dtype=np.complex128)

    def coefficient(self, n: int) -> complex:
        return complex(self._F[n % self.sample_size])

    def component(self, n) -> np.ndarray:
        (m,) = n
        return self.coefficient(m) * e_n(m, self.t)

    def norm(self, x) -> float:
        return float(np.max(np.abs(x)))

    def zero(self) -> np.ndarray:
        return np.zeros(self.t.size, dtype=np.complex128)

    def value(self) -> np.ndarray:
        return self._value

    def support(self):
        return None


class PolyOnGrid:
    """A TrigPoly viewed as a graded element through its values on a grid.

    With ``target`` given, :meth:`value` returns it instead of the polynomial
    itself, which measures ||sigma_N(g)|_X - f||.
    """

    rank = 1

    def __init__(self, poly: TrigPoly, t, target=None):
        self.poly = poly
        self.t = np.asarray(t, dtype=float)
        self._target = None if target is None else np.asarray(target, dtype=np.complex128)

    def component(self, n) -> np.ndarray:
        (m,) = n
        return self.poly.coefficient(m) * e_n(m, self.t)

    def norm(self, x) -> float:
        return float(np.max(np.abs(x)))

    def zero(self) -> np.ndarray:
        return np.zeros(self.t.size, dtype=np.complex128)

    def value(self) -> np.ndarray:
        return self.poly(self.t) if self._target is None else self._target

    def support(self):
        return [(int(n),) for n in self.poly.degrees()]


def abs_sin(t) -> np.ndarray:
    """The Lipschitz test function f(e^{2 pi i t}) = |sin(pi t)|."""
    return np.abs(np.sin(np.pi * np.asarray(t, dtype=float)))


@dataclass(frozen=True)
class Arc:
    """The closed arc {e^{2 pi i t} : t0 <= t <= t1} with an M-point grid."""

    t0: float
    t1: float
    size: int = 2049

    def __post_init__(self):
        if not (self.t1 > self.t0):
            raise InputError("arc needs t0 < t1")
        if self.t1 - self.t0 >= 1.0:
            raise InputError("arc must be a proper subset of the circle (t1 - t0 < 1)")
        if self.size < 2:
            raise InputError("arc grid needs at least 2 points")

    @property
    def gap(self) -> float:
        return 1.0 - (self.t1 - self.t0)

    def params(self) -> np.ndarray:
        return self.t0 + np.arange(self.size) * (self.t1 - self.t0) / (self.size - 1)

    def points(self) -> np.ndarray:
        return np.exp(2j * np.pi * self.params())

    def refined(self, factor: int) -> "Arc":
        return Arc(self.t0, self.t1, factor * (self.size - 1) + 1)


@dataclass(frozen=True)
class SampledFunction:
    arc: Arc
    values: np.ndarray

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


def restrict(g: TrigPoly, X: Arc) -> SampledFunction:
    return SampledFunction(X, g(X.params()))


def arc_gram(X: Arc, degrees) -> np.ndarray:
    """Gram matrix (1/M) sum_j conj(e_m(t_j)) e_n(t_j) on the arc grid."""
    degrees = np.asarray(list(degrees))
    V = np.exp(2j * np.pi * np.outer(X.params(), degrees))
    return V.conj().T @ V / X.size


def arc_independence_rank(X: Arc, degrees, tol: float = 1e-13) -> int:
    """Numerical rank of the Gram matrix of {e_n|_X}.

    Singular values are compared with ``tol`` times the largest one.  The
    Gram matrix squares the conditioning of the sampled exponentials, so the
    default threshold is well below the matrix-core default.
    """
    degrees = list(degrees)
    if X.size < 2 * len(degrees):
        raise InputError("arc grid too coarse for the requested degrees")
    s = np.linalg.svd(arc_gram(X, degrees), compute_uv=False)
    return int(np.sum(s > tol * s[0]))


def _arc_interp(f: SampledFunction, t: np.ndarray) -> np.ndarray:
    tp = f.arc.params()
    return np.interp(t, tp, f.values.real) + 1j * np.interp(t, tp, f.values.imag)


@dataclass
class Extension:
    poly: TrigPoly
    method: str
    eps_ext: float


def extend(f: SampledFunction, method: str = "linear_gap", band: int = DEFAULT_EXTENSION_BAND,
           fine: int = DEFAULT_FINE_GRID) -> Extension:
    """Extend ``f`` from its arc to T and project onto band ``band``.

    The arc part is linearly interpolated from the samples.  On the gap
    (t1, t0 + 1) the bridge is either the straight line from f(t1) to f(t0)
    (``linear_gap``) or the two tangent lines at the endpoints blended by a
    raised cosine (``smooth_gap``), which matches values and one-sided slopes
    at both ends and so extends constants constantly.  The result is sampled on
    ``fine`` points, truncated to |n| <= band by FFT, and ``eps_ext`` is the
    grid sup distance between its restriction and ``f``.
    """
    X = f.arc
    if 2 * band >= fine:
        raise InputError("band must satisfy 2*band < fine")
    t = circle_grid(fine)
    s = (t - X.t0) % 1.0  # position measured from t0
    width = X.t1 - X.t0
    in_arc = s <= width + 1e-15
    vals = np.empty(fine, dtype=np.complex128)
    vals[in_arc] = _arc_interp(f, X.t0 + s[in_arc])
    u = (s[~in_arc] - width) / X.gap  # 0 at t1, 1 at t0 + 1
    left, right = f.values[-1], f.values[0]
    if method == "linear_gap":
        vals[~in_arc] = (1 - u) * left + u * right
    elif method == "smooth_gap":
        h = width / (X.size - 1)
        slope_left = (f.values[-1] - f.values[-2]) / h
        slope_right = (f.values[1] - f.values[0]) / h
        from_left = left + slope_left * u * X.gap
        from_right = right - slope_right * (1 - u) * X.gap
        blend = (1 - np.cos(np.pi * u)) / 2
        vals[~in_arc] = (1 - blend) * from_left + blend * from_right
    else:
        raise ValueError(f"unknown extension method {method!r}")
    poly = TrigPoly(fourier_coefficients(vals, band))
    eps = float(np.max(np.abs(poly(X.params()) - f.values)))
    return Extension(poly, method, eps)


def restricted_cesaro_errors(ext: Extension, f: SampledFunction, Ns) -> list[float]:
    """||sigma_N(g)|_X - f||_inf for each N, through the generic Cesaro engine."""
    elem = PolyOnGrid(ext.poly, f.arc.params(), target=f.values)
    return [elem.norm(cesaro_mean(elem, (int(N),)) - f.values) for N in Ns]


def coefficient_distance(p: TrigPoly, q: TrigPoly) -> float:
    """l-infinity distance between coefficient sequences."""
    B = max(p.band, q.band)
    return float(max(abs(p.coefficient(n) - q.coefficient(n)) for n in range(-B, B + 1)))


@dataclass
class LowerBound:
    band: int
    bound: float
    value: float
    fine_value: float
    coeffs: np.ndarray = field(repr=False)
    status: str = "ok"
    iterations: int = 0

    @property
    def fine_bound(self) -> float:
        return 1.0 / self.fine_value


def _fejer_gap_start(X: Arc, B: int) -> np.ndarray:
    # Fejer-damped coefficients of the gap indicator divided by the gap length;
    # c_0 = 1 automatically
    n = np.arange(-B, B + 1)
    a, b = X.t1, X.t0 + 1.0
    with np.errstate(invalid="ignore", divide="ignore"):
        c = (np.exp(-2j * np.pi * n * a) - np.exp(-2j * np.pi * n * b)) / (2j * np.pi * n)
    c[B] = X.gap
    c = c / X.gap
    return c * (B + 1 - np.abs(n)) / (B + 1)


def default_arc_grid(B: int) -> int:
    return max(513, 16 * (2 * B + 1) + 1)


def zero_component_norm_lower_bound(X: Arc, B: int, iters: int = DEFAULT_ITERS,
                                    init: np.ndarray | None = None,
                                    grid: int | None = None) -> LowerBound:
    """Lower bound for the norm of sum c_n e_n|_X -> c_0 on span{e_n : |n| <= B}.

    Minimizes V(c) = max over the arc grid of |sum c_n e_n| subject to
    c_0 = 1 by projected subgradient descent with iterate averaging and
    periodic restarts from the best point.  Every iterate is feasible, so the
    best value V gives the bound 1/V.  The chosen c is re-evaluated on a 4x
    finer grid (``fine_value``) to show how much the grid maximum
    underestimates the true sup.

    ``init`` may hold a feasible coefficient vector of a smaller band (e.g.
    the result for a previous band), which is embedded and used as an extra
    starting point.  Without it, bands above 4 are warm-started from the
    result for B // 2 on the same grid.
    """
    if B < 1:
        raise InputError("band B must be >= 1")
    grid = grid or default_arc_grid(B)
    if init is None and B > 4:
        init = zero_component_norm_lower_bound(X, B // 2, iters, grid=grid).coeffs
    Xg = Arc(X.t0, X.t1, grid)
    n = np.arange(-B, B + 1)
    V = np.exp(2j * np.pi * np.outer(Xg.params(), n))  # (grid, 2B+1)

    def value(c):
        return float(np.max(np.abs(V @ c)))

    starts = [np.eye(2 * B + 1, dtype=np.complex128)[B], _fejer_gap_start(X, B)]
    if init is not None:
        init = np.asarray(init, dtype=np.complex128)
        b0 = (init.size - 1) // 2
        if b0 > B:
            raise InputError("init has a larger band than B")
        c = np.zeros(2 * B + 1, dtype=np.complex128)
        c[B - b0:B + b0 + 1] = init
        c[B] = 1.0
        starts.append(c)
    best_c = min(starts, key=value)
    best = value(best_c)
    c = _fejer_gap_start(X, B)
    avg = c.copy()
    restart = max(50, iters // 10)
    step0 = 0.5 / np.sqrt(2 * B + 1)
    it = 0
    for it in range(1, iters + 1):
        p = V @ c
        j = int(np.argmax(np.abs(p)))
        fv = abs(p[j])
        if fv < best:
            best, best_c = fv, c.copy()
        # subgradient of |p(t_j)| w.r.t. conj(c): conj(e_n(t_j)) p / |p|
        g = np.conj(V[j]) * (p[j] / fv if fv > 0 else 0.0)
        g[B] = 0.0
        gn = np.linalg.norm(g)
        if gn == 0.0:
            break
        k = (it - 1) % restart + 1
        c = c - (step0 * best / np.sqrt(k)) * g / gn
        c[B] = 1.0
        avg += (c - avg) / k
        if it % restart == 0:
            va = value(avg)
            if va < best:
                best, best_c = va, avg.copy()
            c = best_c.copy()
            avg = c.copy()
    va = value(avg)
    if va < best:
        best, best_c = va, avg.copy()
    fine = Xg.refined(4)
    Vf = np.exp(2j * np.pi * np.outer(fine.params(), n))
    fine_value = float(np.max(np.abs(Vf @ best_c)))
    status = "ok" if best < value(starts[0]) or best <= 1.0 else "no_improvement"
    return LowerBound(B, 1.0 / best, best, fine_value, best_c, status, it)


def lower_bound_ladder(X: Arc, bands=DEFAULT_BANDS, iters: int = DEFAULT_ITERS) -> list[LowerBound]:
    """Bounds for increasing bands, each warm-started from the previous one.

    Warm starts on one common grid make the sequence nondecreasing: the
    optimum for a smaller band is feasible for every larger one.
    """
    bands = sorted(int(b) for b in bands)
    grid = default_arc_grid(bands[-1])
    out: list[LowerBound] = []
    prev = None
    for B in bands:
        lb = zero_component_norm_lower_bound(X, B, iters, init=prev, grid=grid)
        out.append(lb)
        prev = lb.coeffs
    return out
