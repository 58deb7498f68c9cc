"""Functionals of the invariant coordinates and their variational derivatives.

A :class:`Functional` bundles a value and a gradient.  Gradients are arrays
shaped like ``state.coords``: row ``i`` is ``delta f / delta a^r`` for the
``i``-th free order ``r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError
from .operators import (
    LaurentOp,
    frac_power,
    from_invariants,
    multiply,
    trace,
)
from .periodic import PeriodicSeq, period_sum, solve_shift_polynomial_lstsq
from .state import GL, SL, InvariantState, sl_constant

ANALYTIC = "analytic"
FINITE_DIFFERENCE = "finite-difference"


@dataclass(frozen=True)
class Functional:
    """A scalar function of the invariants with a gradient contract."""

    evaluate: Callable[[InvariantState], complex]
    gradient: Callable[[InvariantState], np.ndarray]
    name: str = "f"
    grad_kind: str = ANALYTIC

    def __call__(self, state: InvariantState):
        return self.evaluate(state)

    def grad(self, state: InvariantState) -> np.ndarray:
        return np.asarray(self.gradient(state))

    def __add__(self, other: "Functional") -> "Functional":
        return Functional(lambda s: self(s) + other(s),
                          lambda s: self.grad(s) + other.grad(s),
                          f"({self.name}+{other.name})")

    def __sub__(self, other: "Functional") -> "Functional":
        return Functional(lambda s: self(s) - other(s),
                          lambda s: self.grad(s) - other.grad(s),
                          f"({self.name}-{other.name})")

    def scaled(self, c: complex) -> "Functional":
        return Functional(lambda s: c * self(s), lambda s: c * self.grad(s), f"{c}*{self.name}")

    def times(self, other: "Functional") -> "Functional":
        """Pointwise product ``F G`` (Leibniz checks)."""
        return Functional(lambda s: self(s) * other(s),
                          lambda s: self(s) * other.grad(s) + other(s) * self.grad(s),
                          f"{self.name}*{other.name}")


def constant_functional(c: float = 1.0) -> Functional:
    return Functional(lambda s: c, lambda s: np.zeros_like(s.coords), f"const({c})")


def finite_difference_grad(F: Functional, state: InvariantState, h: float = 1e-5) -> np.ndarray:
    """Centered differences ``(F(a + h e) - F(a - h e)) / 2h`` over the free coordinates."""
    if h <= 0:
        raise ValueError("step must be positive")
    x = state.flat()
    out = np.zeros(x.size, dtype=complex)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (F(state.with_flat(x + e)) - F(state.with_flat(x - e))) / (2 * h)
    out = np.real_if_close(out, tol=1000)
    return out.reshape(state.coords.shape)


def as_finite_difference(F: Functional, h: float = 1e-5) -> Functional:
    """Same value, gradient replaced by finite differences."""
    return Functional(F.evaluate, lambda s: finite_difference_grad(F, s, h), F.name, FINITE_DIFFERENCE)


def directional_derivative(F: Functional, state: InvariantState, direction: np.ndarray, h: float = 1e-5):
    x = state.flat()
    d = np.ravel(direction)
    return (F(state.with_flat(x + h * d)) - F(state.with_flat(x - h * d))) / (2 * h)


# -- operators from states and gradients --------------------------------------

def gradient_operator(state: InvariantState, grad: np.ndarray) -> LaurentOp:
    """``sum_r T^{-r} g_r`` over the free orders, in left-coefficient form."""
    terms = {-r: np.roll(grad[i], r) for i, r in enumerate(state.free_orders)}
    return LaurentOp.from_terms(terms, state.N)


def coordinate_gradient(state: InvariantState, V: LaurentOp) -> np.ndarray:
    """Inverse of :func:`gradient_operator`: read ``g_r = shift(v^{-r}, r)``."""
    return np.array([np.roll(V.row(-r), -r) for r in state.free_orders])


def variational_derivative(F: Functional, state: InvariantState) -> LaurentOp:
    """Unreduced ``delta_D F = sum_r T^{-r} delta_{a^r} f`` over the free orders."""
    return gradient_operator(state, F.grad(state))


def reduce_gradient(state: InvariantState, V: LaurentOp) -> LaurentOp:
    """Complete ``V`` to the gauge-invariant representative of the reduced gradient.

    GL (``a^m = -1``): adds ``T^{-m} beta`` with ``beta = Tr(D V)``, so that the
    extension is invariant under left multiplication by sequences
    (``Tr(D V) = 0``).  SL additionally fixes ``a^0``: adds ``g_0`` and
    ``T^{-m} beta`` so that ``Tr(D V) = Tr(V D) = 0``.
    """
    D = from_invariants(state)
    m, N = state.m, state.N
    dv0 = multiply(D, V).row(0)
    if state.normalization == GL:
        return V + LaurentOp.monomial(np.roll(dv0, m), -m, N)
    vd0 = multiply(V, D).row(0)
    beta = solve_shift_polynomial_lstsq([(1.0, 0), (-1.0, -m)], dv0 - vd0)
    g0 = (beta - dv0) / sl_constant(m)
    return V + LaurentOp.monomial(np.roll(beta, m), -m, N) + LaurentOp.monomial(g0, 0, N)


def reduced_derivative(F: Functional, state: InvariantState) -> LaurentOp:
    """Gauge-completed variational derivative used by the quadratic bracket."""
    return reduce_gradient(state, variational_derivative(F, state))


# -- polynomial functionals ---------------------------------------------------

Monomial = tuple[float, Sequence[tuple[int, int]]]


def polynomial_functional(monomials: Sequence[Monomial], name: str = "poly") -> Functional:
    """``sum_n sum_k c_k prod_j a^{r_j}_{n + o_j}`` for monomials ``(c_k, [(r_j, o_j), ...])``.

    Fixed coordinates (``a^0`` in SL mode) enter as constants.
    """
    monomials = [(c, list(factors)) for c, factors in monomials]

    def evaluate(state: InvariantState):
        total = 0.0
        for c, factors in monomials:
            p = np.full(state.N, c, dtype=np.result_type(state.coords, c))
            for r, o in factors:
                p = p * np.roll(state.a(r), -o)
            total = total + p.sum()
        return total

    def gradient(state: InvariantState):
        g = np.zeros((state.m + 1, state.N), dtype=np.result_type(state.coords, float))
        for c, factors in monomials:
            for j, (rj, oj) in enumerate(factors):
                p = np.full(state.N, c, dtype=g.dtype)
                for i, (r, o) in enumerate(factors):
                    if i != j:
                        p = p * np.roll(state.a(r), -o)
                g[rj] += np.roll(p, oj)
        return g[state.free_orders]

    return Functional(evaluate, gradient, name)


def linear_functional(weights: np.ndarray, state_like: InvariantState, name: str = "lin") -> Functional:
    """``sum_{r,n} w[r,n] a^r_n`` over the free coordinates."""
    weights = np.asarray(weights)
    return Functional(lambda s: np.sum(weights * s.coords), lambda s: weights.copy(), name)


def coordinate_sum(r: int) -> Functional:
    """``sum_n a^r_n``."""
    return polynomial_functional([(1.0, [(r, 0)])], f"sum a^{r}")


def random_polynomial(state: InvariantState, rng: np.random.Generator, n_terms: int = 4,
                      max_degree: int = 3, max_offset: int = 2) -> Functional:
    """Random polynomial functional in the free coordinates."""
    free = state.free_orders
    monomials = []
    for _ in range(n_terms):
        deg = int(rng.integers(1, max_degree + 1))
        factors = [(int(rng.choice(free)), int(rng.integers(-max_offset, max_offset + 1))) for _ in range(deg)]
        monomials.append((float(rng.uniform(-1, 1)), factors))
    return polynomial_functional(monomials, "random-poly")


# -- hierarchy and Boussinesq ------------------------------------------------

def _field_for(state: InvariantState) -> str:
    return "real" if state.m % 2 == 1 else "complex"


def hierarchy_value(state: InvariantState, s: int, floor: int = 0):
    """``F_s = sum_n Tr(D^{s/m})``; ``floor`` may be lowered for depth checks."""
    D = from_invariants(state)
    P = frac_power(D, s, state.m, min(floor, 0), field=_field_for(state))
    return period_sum(trace(P))


def Z_s(D: LaurentOp, s: int, m: int, floor: int, field: str = "real") -> LaurentOp:
    """``Z^s = (s/m) D^{(s-m)/m} + (-1)^m (s/m) Tr D^{s/m}`` down to ``floor``."""
    if s == m:
        neg = LaurentOp.identity(D.period)
    else:
        neg = frac_power(D, s - m, m, floor, field=field)
    tr = trace(frac_power(D, s, m, min(floor, 0), field=field))
    out = neg + LaurentOp.monomial(((-1) ** m) * tr.values, 0, D.period)
    return out.scale(s / m).truncate(floor)


def hierarchy_hamiltonian(s: int, margin: int = 0) -> Functional:
    """``F_s(D) = sum_n Tr(D^{s/m})`` with its analytic gradient.

    The gradient in the free coordinates is read from ``(s/m) D^{(s-m)/m}``;
    in SL mode this coincides with the corresponding rows of ``Z^s``.
    ``margin`` certifies that many extra orders below the ones read.
    """
    if s < 1:
        raise ValueError("s must be positive")

    def evaluate(state: InvariantState):
        return hierarchy_value(state, s)

    def gradient(state: InvariantState):
        D = from_invariants(state)
        m = state.m
        if s == m:
            # D^0 = 1 only touches a^0
            g = np.zeros_like(state.coords)
            if state.normalization == GL:
                g[0] = 1.0
            return g
        Zneg = frac_power(D, s - m, m, -m - margin, field=_field_for(state)).scale(s / m)
        return coordinate_gradient(state, Zneg)

    return Functional(evaluate, gradient, f"F_{s}")


def boussinesq_hamiltonian() -> Functional:
    """``H = sum_n ln a^1_n``; requires ``a^1 > 0`` for real states."""

    def _a1(state: InvariantState) -> np.ndarray:
        a1 = state.a(1)
        if not np.iscomplexobj(a1) and np.any(a1 <= 0):
            raise DomainError("Boussinesq Hamiltonian needs a^1 > 0")
        return a1

    def evaluate(state: InvariantState):
        return float(np.sum(np.log(_a1(state)))) if not np.iscomplexobj(state.coords) else np.sum(np.log(_a1(state)))

    def gradient(state: InvariantState):
        g = np.zeros_like(state.coords)
        g[state.free_orders.index(1)] = 1.0 / _a1(state)
        return g

    return Functional(evaluate, gradient, "H")


def pairing(grad: np.ndarray, direction: np.ndarray):
    """``sum_r sum_n grad[r, n] v[r, n]``."""
    return np.sum(np.asarray(grad) * np.asarray(direction))


__all__ = [
    "Functional", "PeriodicSeq", "finite_difference_grad", "from_invariants", "variational_derivative",
    "reduced_derivative", "reduce_gradient", "hierarchy_hamiltonian", "Z_s", "boussinesq_hamiltonian",
    "polynomial_functional", "random_polynomial", "coordinate_sum", "SL", "GL",
]
