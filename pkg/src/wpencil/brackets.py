"""The quadratic bracket with its linear companion, plus the pencil they span.

Conventions.  For functionals ``F, G`` with reduced derivatives ``V, W``:

* ``{F, G}_1 = <r(D V) D - D r(V D), W>`` with ``r(L) = (L_+ - L_-)/2``;
* ``{F, G}_2 = <(D_+ V_-)_+ D_0 - D_0 (V_- D_+)_+, W>``, the coefficient of
  ``lambda`` in the push-forward pencil.  In SL mode it equals
  ``(-1)^{m-1} <[D_+, V_-]_+, W>``.

The Hamiltonian field of ``F`` is the operator velocity ``D_t`` projected back
onto the normalized slice, so that ``sum_{r,n} (da^r_n/dt) dg/da^r_n = {F, g}``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ZeroLambda
from .functionals import (
    Functional,
    finite_difference_grad,
    reduced_derivative,
    variational_derivative,
)
from .operators import (
    LaurentOp,
    from_invariants,
    inner_product,
    minus,
    multiply,
    plus,
    r_map,
    r_plus,
    zero_part,
)
from .periodic import solve_shift_polynomial_lstsq
from .state import GL, SL, InvariantState, sl_constant

QUADRATIC = "quadratic"
LINEAR = "linear"
PENCIL = "pencil"


@dataclass(frozen=True)
class BracketId:
    kind: str = QUADRATIC
    lam: float | None = None

    def __post_init__(self):
        if self.kind not in (QUADRATIC, LINEAR, PENCIL):
            raise ValueError(f"unknown bracket kind {self.kind!r}")
        if self.kind == PENCIL and self.lam is None:
            raise ValueError("pencil brackets need lambda")

    @classmethod
    def parse(cls, text: str) -> "BracketId":
        """``'1'``, ``'2'`` or ``'pencil:<lambda>'``."""
        text = str(text).strip()
        if text in ("1", QUADRATIC):
            return cls(QUADRATIC)
        if text in ("2", LINEAR):
            return cls(LINEAR)
        if text.startswith("pencil:"):
            return cls(PENCIL, float(text.split(":", 1)[1]))
        raise ValueError(f"cannot parse bracket id {text!r}")

    def __str__(self) -> str:
        return {QUADRATIC: "1", LINEAR: "2"}.get(self.kind, f"pencil:{self.lam}")


BRACKET1 = BracketId(QUADRATIC)
BRACKET2 = BracketId(LINEAR)


# -- operator velocities -----------------------------------------------------

def quadratic_velocity(D: LaurentOp, V: LaurentOp, rmap: str = "r") -> LaurentOp:
    """``r(D V) D - D r(V D)``; ``rmap='r_plus'`` gives the same operator."""
    rr = r_map if rmap == "r" else r_plus
    return multiply(rr(multiply(D, V)), D) - multiply(D, rr(multiply(V, D)))


def linear_velocity(D: LaurentOp, V: LaurentOp) -> LaurentOp:
    """``(D_+ V_-)_+ D_0 - D_0 (V_- D_+)_+``; supported on orders ``1..m-1``."""
    Dp, D0, Vm = plus(D), zero_part(D), minus(V)
    return multiply(plus(multiply(Dp, Vm)), D0) - multiply(D0, plus(multiply(Vm, Dp)))


def project_to_slice(E: LaurentOp, state: InvariantState) -> LaurentOp:
    """Remove the gauge components of a velocity of ``D``.

    GL: adds ``e D`` (left multiplication) to clear the ``T^m`` coefficient.
    SL: adds ``g D + D h`` to clear both the ``T^m`` and ``T^0`` coefficients.
    """
    D = from_invariants(state)
    m, N = state.m, state.N
    Em = E.row(m)
    if state.normalization == GL:
        return E + D.left_mul(Em)
    c = sl_constant(m)
    E0 = E.row(0)
    h = solve_shift_polynomial_lstsq([(1.0, 0), (-1.0, m)], -Em - E0 / c)
    g = -E0 / c - h
    return E + D.left_mul(g) + multiply(D, LaurentOp.monomial(h, 0, N))


def slice_rows(E: LaurentOp, state: InvariantState) -> np.ndarray:
    return np.array([E.row(r) for r in state.free_orders])


# -- brackets -------------------------------------------------------------------

def bracket1(F: Functional, G: Functional, state: InvariantState, rmap: str = "r"):
    """Quadratic bracket ``{F, G}_1``."""
    D = from_invariants(state)
    V = reduced_derivative(F, state)
    W = reduced_derivative(G, state)
    return inner_product(quadratic_velocity(D, V, rmap), W)


def bracket1_unreduced(F: Functional, G: Functional, state: InvariantState):
    """``{F, G}_1`` with the bare derivative ``sum_r T^{-r} delta_{a^r} f``.

    Kept for comparison only; it is not a Poisson bracket on the slice.
    """
    D = from_invariants(state)
    V = variational_derivative(F, state)
    W = variational_derivative(G, state)
    return inner_product(quadratic_velocity(D, V), W)


def bracket2(F: Functional, G: Functional, state: InvariantState, form: str | None = None):
    """Linear companion bracket ``{F, G}_2``.

    ``form='GL'`` evaluates the general quadratic-in-``a^0`` expression;
    ``form='SL'`` the commutator form, valid when ``a^0 = (-1)^{m-1}``.
    Defaults to the state's normalization.
    """
    form = form or state.normalization
    D = from_invariants(state)
    V = variational_derivative(F, state)
    W = variational_derivative(G, state)
    if form == GL:
        return inner_product(linear_velocity(D, V), W)
    Dp, Vm = plus(D), minus(V)
    comm = plus(multiply(Dp, Vm) - multiply(Vm, Dp))
    return sl_constant(state.m) * inner_product(comm, W)


def phi_inverse_state(state: InvariantState, lam: float) -> InvariantState:
    """``phi_lambda^{-1}``: ``a^0 -> lambda a^0``."""
    coords = np.array(state.coords, dtype=np.result_type(state.coords, lam))
    coords[0] = coords[0] * lam
    return state.with_coords(coords)


def compose_phi(F: Functional, lam: float) -> Functional:
    """``F o phi_lambda`` where ``phi_lambda`` rescales ``a^0`` by ``1/lambda``."""

    def push(state: InvariantState) -> InvariantState:
        return phi_inverse_state(state, 1.0 / lam)

    def gradient(state: InvariantState):
        g = np.array(F.grad(push(state)), dtype=np.result_type(state.coords, lam, float))
        g[0] = g[0] / lam
        return g

    return Functional(lambda s: F(push(s)), gradient, f"{F.name}@phi({lam})")


def bracket_pencil(F: Functional, G: Functional, state: InvariantState, lam: float,
                   method: str = "linear-combination"):
    """``{F, G}_lambda``.

    ``pushforward`` evaluates ``{F o phi, G o phi}_1(phi^{-1}(D))``;
    ``linear-combination`` evaluates ``{F,G}_1 + (lambda - 1) {F,G}_2``.
    """
    if state.normalization != GL:
        raise ValueError("the pencil moves a^0 and needs a GL state")
    if method == "pushforward":
        if lam == 0:
            raise ZeroLambda("phi_lambda is undefined at lambda = 0")
        return bracket1(compose_phi(F, lam), compose_phi(G, lam), phi_inverse_state(state, lam))
    if method == "linear-combination":
        return bracket1(F, G, state) + (lam - 1.0) * bracket2(F, G, state)
    raise ValueError(f"unknown method {method!r}")


def pencil_laurent_fit(F: Functional, G: Functional, state: InvariantState,
                       lams=(1.0, 2.0, 3.0, -1.0, 0.5, -2.0)) -> dict[int, float]:
    """Least-squares fit of push-forward values on ``lambda^-2 .. lambda^1``."""
    lams = np.asarray(lams, dtype=float)
    vals = np.array([bracket_pencil(F, G, state, lam, "pushforward") for lam in lams])
    powers = [-2, -1, 0, 1]
    A = np.stack([lams ** p for p in powers], axis=1)
    coef, *_ = np.linalg.lstsq(A, vals, rcond=None)
    return dict(zip(powers, coef))


def bracket(F: Functional, G: Functional, state: InvariantState, which: BracketId = BRACKET1):
    if which.kind == QUADRATIC:
        return bracket1(F, G, state)
    if which.kind == LINEAR:
        return bracket2(F, G, state)
    return bracket_pencil(F, G, state, which.lam)


# -- Hamiltonian fields --------------------------------------------------------

def hamiltonian_velocity(F: Functional, state: InvariantState, which: BracketId = BRACKET1) -> LaurentOp:
    """Projected operator velocity ``D_t`` of the ``F``-flow."""
    D = from_invariants(state)
    if which.kind == QUADRATIC:
        return project_to_slice(quadratic_velocity(D, reduced_derivative(F, state)), state)
    if which.kind == LINEAR:
        return linear_velocity(D, variational_derivative(F, state))
    v1 = hamiltonian_velocity(F, state, BRACKET1)
    v2 = hamiltonian_velocity(F, state, BRACKET2)
    return v1 + v2.scale(which.lam - 1.0)


def hamiltonian_field(F: Functional, state: InvariantState, which: BracketId = BRACKET1) -> np.ndarray:
    """``da/dt`` over the free coordinates, shaped like ``state.coords``."""
    return slice_rows(hamiltonian_velocity(F, state, which), state)


def jacobi_residual(F: Functional, G: Functional, H: Functional, state: InvariantState,
                    which: BracketId | Callable = BRACKET1, h: float = 1e-5):
    """``{{F,G},H} + {{G,H},F} + {{H,F},G}`` with finite-difference outer gradients."""
    br = which if callable(which) else (lambda A, B, s: bracket(A, B, s, which))

    def inner(A: Functional, B: Functional) -> Functional:
        value = Functional(lambda s: br(A, B, s), lambda s: None, f"{{{A.name},{B.name}}}")
        return Functional(value.evaluate, lambda s: finite_difference_grad(value, s, h), value.name)

    return (br(inner(F, G), H, state) + br(inner(G, H), F, state) + br(inner(H, F), G, state))
