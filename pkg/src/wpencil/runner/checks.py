"""Individual numerical checks.

Each check returns the largest residual it saw over its random trials.  The verification battery and the test
suite share these so that both measure the same thing.
"""

from __future__ import annotations

from dataclasses import replace
from typing import Callable

import numpy as np

from ..brackets import (
    BRACKET1,
    BRACKET2,
    BracketId,
    bracket,
    bracket1,
    bracket2,
    bracket_pencil,
    hamiltonian_field,
    jacobi_residual,
    pencil_laurent_fit,
)
from ..functionals import (
    Functional,
    boussinesq_hamiltonian,
    directional_derivative,
    finite_difference_grad,
    hierarchy_hamiltonian,
    pairing,
    random_polynomial,
)
from ..operators import (
    LaurentOp,
    frac_power,
    from_invariants,
    inner_product,
    max_abs_diff,
    minus,
    mth_root,
    multiply,
    plus,
    power,
    zero_part,
)
from ..polygons import (
    coordinate_functional,
    derivative_of_functional,
    field_map,
    frame_dets,
    hierarchy_field,
    induced_dynamics,
    induced_dynamics_fd,
    invariants_from_polygon,
    lift_hamiltonian_field,
    next_frame_dets,
    omega2_closed_form,
    omega_geometric,
    q_matrix,
    reconstruct,
)
from ..state import GL, SL, InvariantState, sl_constant
from .flows import FlowConfig, HamiltonianSpec, convergence_order, integrate_flow

HIERARCHY_S = (1, 2, 4, 5)


def root_field(m: int) -> str:
    return "real" if m % 2 else "complex"


def random_op(rng: np.random.Generator, N: int, lo: int = -3, hi: int = 3, floor: int | None = None) -> LaurentOp:
    a, b = sorted(int(v) for v in rng.integers(lo, hi + 1, size=2))
    data = rng.uniform(-1, 1, (b - a + 1, N))
    return LaurentOp(data, a, N, floor)


def _states(rng, m, N, trials, normalization, **kw):
    return [InvariantState.random(m, N, rng, normalization, **kw) for _ in range(trials)]


def _pair(rng, st):
    return random_polynomial(st, rng), random_polynomial(st, rng)


# -- operator algebra -----------------------------------------------------------

def algebra(rng, m, N, trials=100) -> float:
    """Associativity and ``<AB, C> = <A, BC>``; the projections must add back up to ``L``."""
    worst = 0.0
    for _ in range(trials):
        A, B, C = (random_op(rng, N) for _ in range(3))
        worst = max(worst,
                    max_abs_diff(multiply(multiply(A, B), C), multiply(A, multiply(B, C))),
                    abs(inner_product(multiply(A, B), C) - inner_product(A, multiply(B, C))),
                    max_abs_diff(plus(A) + zero_part(A) + minus(A), A))
    return worst


def root_power(rng, m, N, trials=20, depth: int = -4) -> float:
    """``(D^{1/m})^m = D`` on every certified order."""
    worst = 0.0
    for st in _states(rng, m, N, trials, GL):
        D = from_invariants(st)
        R = mth_root(D, m, depth, root_field(m))
        P = power(R, m, floor=depth + m - 1)
        worst = max(worst, max_abs_diff(P, D))
    return worst


# -- variational calculus ---------------------------------------------------

def hierarchy_gradients(rng, m, N, trials=20, s_values=HIERARCHY_S, h=1e-5) -> float:
    """Analytic ``F_s`` gradients against centered differences, relative (unit floor)."""
    worst = 0.0
    for st in _states(rng, m, N, trials, SL):
        for s in s_values:
            F = hierarchy_hamiltonian(s)
            fd = finite_difference_grad(F, st, h)
            worst = max(worst, np.abs(F.grad(st) - fd).max() / max(1.0, np.abs(fd).max()))
    return worst


def pairing_consistency(rng, m, N, trials=20, h=1e-5) -> float:
    """``<grad F, v>`` against the directional derivative for random polynomials."""
    worst = 0.0
    for st in _states(rng, m, N, trials, GL):
        F = random_polynomial(st, rng)
        v = rng.uniform(-1, 1, st.coords.shape)
        worst = max(worst, abs(pairing(F.grad(st), v) - directional_derivative(F, st, v, h)))
    return worst


# -- Poisson axioms -------------------------------------------------------------

def _bracket_fn(which: BracketId) -> Callable:
    return lambda F, G, st: bracket(F, G, st, which)


def antisymmetry(rng, m, N, trials=20, which: BracketId = BRACKET1, normalization=GL) -> float:
    worst = 0.0
    for st in _states(rng, m, N, trials, normalization):
        F, G = _pair(rng, st)
        worst = max(worst, abs(bracket(F, G, st, which) + bracket(G, F, st, which)))
    return worst


def leibniz(rng, m, N, trials=20, which: BracketId = BRACKET1, normalization=GL) -> float:
    """``{F, G H} = {F, G} H + G {F, H}``."""
    worst = 0.0
    for st in _states(rng, m, N, trials, normalization):
        F, G = _pair(rng, st)
        H = random_polynomial(st, rng)
        lhs = bracket(F, G.times(H), st, which)
        rhs = bracket(F, G, st, which) * H(st) + G(st) * bracket(F, H, st, which)
        worst = max(worst, abs(lhs - rhs))
    return worst


def jacobi(rng, m, N, trials=20, which: BracketId = BRACKET1, normalization=GL, h=1e-5) -> float:
    worst = 0.0
    for st in _states(rng, m, N, trials, normalization):
        F, G = _pair(rng, st)
        H = random_polynomial(st, rng)
        worst = max(worst, abs(jacobi_residual(F, G, H, st, which, h)))
    return worst


def compatibility(rng, m, N, trials=20, normalization=GL, h=1e-5) -> float:
    """Jacobi for the sum ``{,}_1 + {,}_2``."""
    summed = lambda F, G, st: bracket1(F, G, st) + bracket2(F, G, st)
    worst = 0.0
    for st in _states(rng, m, N, trials, normalization):
        F, G = _pair(rng, st)
        H = random_polynomial(st, rng)
        worst = max(worst, abs(jacobi_residual(F, G, H, st, summed, h)))
    return worst


# -- pencil ---------------------------------------------------------------------

def pencil_affine(rng, m, N, trials=20, lams=(1.0, 2.0, 3.0)) -> float:
    """Push-forward against ``{,}_1 + (lambda - 1){,}_2``."""
    worst = 0.0
    for st in _states(rng, m, N, trials, GL):
        F, G = _pair(rng, st)
        for lam in lams:
            push = bracket_pencil(F, G, st, lam, "pushforward")
            lin = bracket_pencil(F, G, st, lam, "linear-combination")
            worst = max(worst, abs(push - lin))
    return worst


def pencil_negative_powers(rng, m, N, trials=20) -> float:
    """Largest fitted ``lambda^-2``, ``lambda^-1`` coefficient."""
    worst = 0.0
    for st in _states(rng, m, N, trials, GL):
        F, G = _pair(rng, st)
        fit = pencil_laurent_fit(F, G, st)
        worst = max(worst, abs(fit[-2]), abs(fit[-1]))
    return worst


# -- hierarchy --------------------------------------------------------------------

def involutivity(rng, m, N, trials=20, which: BracketId = BRACKET1, s_values=HIERARCHY_S) -> float:
    worst = 0.0
    Fs = [hierarchy_hamiltonian(s) for s in s_values]
    for st in _states(rng, m, N, trials, SL):
        for i, F in enumerate(Fs):
            for G in Fs[i + 1:]:
                worst = max(worst, abs(bracket(F, G, st, which)))
    return worst


def bracket2_kernel(rng, m, N, trials=20) -> float:
    """Bracket-2 fields of ``F_1 .. F_{m-1}``."""
    worst = 0.0
    for st in _states(rng, m, N, trials, SL):
        for s in range(1, m):
            worst = max(worst, np.abs(hamiltonian_field(hierarchy_hamiltonian(s), st, BRACKET2)).max())
    return worst


# -- geometry -----------------------------------------------------------------------

def determinant_relation(rng, m, N, trials=20) -> float:
    """``a^0_n = (-1)^{m-1} d_{n+1} / d_n`` on reconstructed polygons."""
    worst = 0.0
    for st in _states(rng, m, N, trials, GL):
        poly = reconstruct(st)
        ratio = next_frame_dets(poly) / frame_dets(poly)
        worst = max(worst, np.abs(st.a(0) - sl_constant(m) * ratio).max())
    return worst


def round_trip(rng, m, N, trials=20) -> float:
    worst = 0.0
    for norm in (GL, SL):
        for st in _states(rng, m, N, trials, norm):
            back = invariants_from_polygon(reconstruct(st), norm)
            worst = max(worst, np.abs(back.coords - st.coords).max())
    return worst


def omega2_closed(rng, m, N, trials=20) -> float:
    """``{F, G}_2 = omega_2(X^g, X^f)`` via the double sum."""
    worst = 0.0
    for norm in (GL, SL):
        for st in _states(rng, m, N, trials, norm):
            F, G = _pair(rng, st)
            worst = max(worst, abs(bracket2(F, G, st) - omega2_closed_form(G, F, st)))
    return worst


def omega2_oracle(rng, m, N, trials=5, h=1e-5) -> float:
    """Geometric ``omega_2`` by finite differences against the closed form."""
    worst = 0.0
    for norm in (GL, SL):
        for st in _states(rng, m, N, trials, norm):
            F, G = _pair(rng, st)
            poly = reconstruct(st)
            geo = omega_geometric(2, field_map(G, norm), field_map(F, norm), poly, h)
            worst = max(worst, abs(geo - omega2_closed_form(G, F, st)))
    return worst


def omega1_oracle(rng, m, N, trials=5, h=1e-5) -> float:
    """``{F, G}_1 = (-1)^m omega_1(X^g, X^f)`` on projective lifts."""
    worst = 0.0
    for st in _states(rng, m, N, trials, SL):
        F, G = _pair(rng, st)
        poly = reconstruct(st)
        geo = omega_geometric(1, field_map(G, SL), field_map(F, SL), poly, h)
        worst = max(worst, abs(bracket1(F, G, st) - (-1) ** m * geo))
    return worst


def omega1_hamiltonian(rng, m, N, trials=2, h=1e-5) -> float:
    """``omega_1(Y, X^f) = (-1)^{m-1} Y(f)`` for lifted coordinate fields ``Y``."""
    worst = 0.0
    for st in _states(rng, m, N, trials, SL):
        F = random_polynomial(st, rng)
        poly = reconstruct(st)
        Xf = field_map(F, SL)
        for r in st.free_orders:
            for n in range(N):
                Yf = field_map(coordinate_functional(st, r, n), SL)
                lhs = omega_geometric(1, Yf, Xf, poly, h)
                rhs = sl_constant(m) * derivative_of_functional(F, poly, Yf(poly), SL, h)
                worst = max(worst, abs(lhs - rhs))
    return worst


def q_first_row(rng, m, N, trials=20) -> float:
    """``Q_{1, r+1} = -a^0 df/da^r`` for the lifted field of ``f``."""
    worst = 0.0
    for norm in (GL, SL):
        for st in _states(rng, m, N, trials, norm):
            F = random_polynomial(st, rng)
            poly = reconstruct(st)
            X = lift_hamiltonian_field(F, poly, norm)
            grad = dict(zip(st.free_orders, F.grad(st)))
            Q = np.array([q_matrix(poly, X, n) for n in range(N)])
            for r in range(1, m):
                worst = max(worst, np.abs(Q[:, 0, r] + st.a(0) * grad[r]).max())
    return worst


def lift_consistency(rng, m, N, trials=20, h=1e-5) -> float:
    """Finite-difference invariant dynamics of ``Y^F`` against the bracket-1 field."""
    worst = 0.0
    for norm in (GL, SL):
        for st in _states(rng, m, N, trials, norm):
            F = random_polynomial(st, rng)
            poly = reconstruct(st)
            induced = induced_dynamics_fd(poly, lift_hamiltonian_field(F, poly, norm), h)
            start = 0 if norm == GL else 1
            worst = max(worst, np.abs(induced[start:] - hamiltonian_field(F, st)).max(),
                        np.abs(induced[:start]).max(initial=0.0))
    return worst


def hierarchy_lift(rng, m, N, trials=20, s_values=(1, 2), h=1e-5) -> float:
    """``X^{F_s}`` on projective lifts induces the bracket-1 field of ``F_s``."""
    worst = 0.0
    for st in _states(rng, m, N, trials, SL):
        poly = reconstruct(st)
        for s in s_values:
            X = hierarchy_field(poly, s)
            # complex branches (even m) give complex fields: use the exact linearization
            induced = induced_dynamics(poly, X) if np.iscomplexobj(X) else induced_dynamics_fd(poly, X, h)
            target = hamiltonian_field(hierarchy_hamiltonian(s), st)
            worst = max(worst, np.abs(induced[1:] - target).max(), np.abs(induced[0]).max())
    return worst


# -- flows ---------------------------------------------------------------------

def boussinesq_agreement(seed: int, m: int, N: int, dt=1e-3, T=1.0) -> float:
    """Bracket-1 and bracket-2 Boussinesq trajectories from one initial state."""
    cfg = FlowConfig(m, N, SL, seed=seed, a1_range=(0.5, 1.5),
                     hamiltonian=HamiltonianSpec("boussinesq", None), dt=dt, steps=int(round(T / dt)))
    t1 = integrate_flow(cfg)
    t2 = integrate_flow(replace(cfg, bracket=BRACKET2))
    return float(np.abs(t1.coords - t2.coords).max())


def hierarchy_drift(seed: int, m: int, N: int, dt=1e-3, steps=1000, flow_s=1, monitor_s=2) -> float:
    cfg = FlowConfig(m, N, SL, seed=seed, hamiltonian=HamiltonianSpec("F_s", flow_s), dt=dt, steps=steps)
    traj = integrate_flow(cfg)
    G = hierarchy_hamiltonian(monitor_s)
    vals = np.array([G(s) for s in traj.states()])
    return float(np.abs(vals - vals[0]).max())


def boussinesq_order(seed: int, m: int, N: int, dts=(1e-2, 5e-3, 2.5e-3), T=1.0, monitor_s=2):
    """Convergence order of the ``F_{monitor_s}`` drift along the Boussinesq flow."""
    cfg = FlowConfig(m, N, SL, seed=seed, a1_range=(0.5, 1.5),
                     hamiltonian=HamiltonianSpec("boussinesq", None), dt=dts[0], steps=int(round(T / dts[0])))
    return convergence_order(cfg, hierarchy_hamiltonian(monitor_s), dts, T)


def hierarchy_order(seed: int, m: int, N: int, dts=(0.1, 0.05, 0.025), T=1.0, flow_s=1, monitor_s=2):
    """Convergence order of the ``F_{monitor_s}`` drift along the ``F_{flow_s}`` flow.

    Steps are coarse on purpose: at ``dt = 1e-3`` the drift is already at roundoff.
    """
    cfg = FlowConfig(m, N, SL, seed=seed, hamiltonian=HamiltonianSpec("F_s", flow_s),
                     dt=dts[0], steps=int(round(T / dts[0])))
    return convergence_order(cfg, hierarchy_hamiltonian(monitor_s), dts, T)
