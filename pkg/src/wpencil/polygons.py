"""Twisted polygons in R^m and their invariant coordinates.

A twisted polygon is stored by one period of vertices ``gamma_0..gamma_{N-1}``
(rows of ``vertices``) and the monodromy ``M`` with ``gamma_{n+N} = M gamma_n``.
The frame ``rho_n`` has the consecutive vertices ``gamma_n..gamma_{n+m-1}`` as
columns and ``d_n = det rho_n``.  The invariants solve
``gamma_{n+m} = a^{m-1}_n gamma_{n+m-1} + ... + a^0_n gamma_n``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateFrame, DegenerateSeed
from .functionals import Functional, reduced_derivative
from .operators import LaurentOp, apply, frac_power, from_invariants, multiply, r_map, twisted_window
from .state import GL, SL, InvariantState, sl_constant

FieldMap = Callable[["TwistedPolygon"], np.ndarray]

# |det| below this (relative to the frame scale) counts as degenerate
FRAME_RTOL = 1e-12


@dataclass(frozen=True)
class TwistedPolygon:
    vertices: np.ndarray
    monodromy: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        M = np.array(self.monodromy, dtype=float)
        if v.ndim != 2 or M.shape != (v.shape[1], v.shape[1]):
            raise ValueError("vertices must be (N, m) and monodromy (m, m)")
        v.setflags(write=False)
        M.setflags(write=False)
        object.__setattr__(self, "vertices", v)
        object.__setattr__(self, "monodromy", M)

    @property
    def N(self) -> int:
        return self.vertices.shape[0]

    @property
    def m(self) -> int:
        return self.vertices.shape[1]

    def window(self, start: int, count: int) -> np.ndarray:
        return twisted_window(self.vertices, self.monodromy, start, count)

    def frame(self, n: int) -> np.ndarray:
        """``rho_n`` with vertices as columns."""
        return self.window(n, self.m).T

    def frames(self) -> np.ndarray:
        """All frames ``rho_0..rho_{N-1}``, shape ``(N, m, m)``."""
        w = self.window(0, self.N + self.m)
        return np.stack([w[n:n + self.m].T for n in range(self.N)])

    def moved(self, field: np.ndarray, h: float) -> "TwistedPolygon":
        """``gamma + h X`` with the monodromy held fixed."""
        field = np.real_if_close(field)
        if np.iscomplexobj(field):
            raise ValueError("a real polygon cannot move along a complex field")
        return TwistedPolygon(self.vertices + h * field, self.monodromy)

    def transformed(self, g: np.ndarray) -> "TwistedPolygon":
        """Image under ``x -> g x``; the monodromy is conjugated accordingly."""
        g = np.asarray(g, dtype=float)
        return TwistedPolygon(self.vertices @ g.T, g @ self.monodromy @ np.linalg.inv(g))

    def to_json(self) -> dict:
        return {"m": self.m, "N": self.N, "vertices": self.vertices.tolist(),
                "monodromy": self.monodromy.tolist()}

    @classmethod
    def from_json(cls, obj: dict) -> "TwistedPolygon":
        poly = cls(np.asarray(obj["vertices"], dtype=float), np.asarray(obj["monodromy"], dtype=float))
        if ("m" in obj and int(obj["m"]) != poly.m) or ("N" in obj and int(obj["N"]) != poly.N):
            raise ValueError("m/N fields disagree with the vertex array")
        return poly

    def dumps(self) -> str:
        return json.dumps(self.to_json())


def reconstruct(state: InvariantState, seed: np.ndarray | None = None) -> TwistedPolygon:
    """Run the recursion from ``m`` seed vertices (columns of ``seed``).

    The default seed is the identity frame, so ``d_0 = 1``; in SL mode a
    user seed is rescaled to unit determinant.
    """
    m, N = state.m, state.N
    seed = np.eye(m) if seed is None else np.array(seed, dtype=float)
    det = np.linalg.det(seed)
    if seed.shape != (m, m) or abs(det) <= FRAME_RTOL * max(1.0, np.abs(seed).max()) ** m:
        raise DegenerateSeed("seed frame is singular")
    if state.normalization == SL and not np.isclose(det, 1.0):
        seed = seed.copy()
        seed[:, 0] /= det
    a = np.real_if_close(state.full())
    if np.iscomplexobj(a):
        raise ValueError("polygons need real invariants")
    pts = np.zeros((N + m, m))
    pts[:m] = seed.T
    for n in range(N):
        pts[n + m] = a[:m, n] @ pts[n:n + m]
    rho0 = pts[:m].T
    rhoN = pts[N:N + m].T
    M = rhoN @ np.linalg.inv(rho0)
    return TwistedPolygon(pts[:N], M)


def invariants_from_polygon(poly: TwistedPolygon, normalization: str = GL) -> InvariantState:
    """Solve ``rho_n x = gamma_{n+m}`` for every ``n``; ``x = (a^0_n .. a^{m-1}_n)``.

    In SL mode the extracted ``a^0`` is checked against ``(-1)^{m-1}`` and dropped.
    """
    m, N = poly.m, poly.N
    w = poly.window(0, N + m)
    rows = np.zeros((m, N))
    for n in range(N):
        rho = w[n:n + m].T
        if abs(np.linalg.det(rho)) <= FRAME_RTOL * max(1.0, np.abs(rho).max()) ** m:
            raise DegenerateFrame(f"frame {n} is singular")
        rows[:, n] = np.linalg.solve(rho, w[n + m])
    if normalization == SL:
        if not np.allclose(rows[0], sl_constant(m), atol=1e-8):
            raise ValueError("polygon is not an SL lift: a^0 differs from (-1)^(m-1)")
        return InvariantState(m, rows[1:], SL)
    return InvariantState(m, rows, GL)


def frame_dets(poly: TwistedPolygon) -> np.ndarray:
    """``d_n`` for ``n = 0..N-1``."""
    return np.linalg.det(poly.frames())


def next_frame_dets(poly: TwistedPolygon) -> np.ndarray:
    """``d_{n+1}`` for ``n = 0..N-1``; the last one is ``det(M) d_0``."""
    d = frame_dets(poly)
    return np.append(d[1:], np.linalg.det(poly.monodromy) * d[0])


def frame_det(poly: TwistedPolygon, n: int) -> float:
    return float(np.linalg.det(poly.frame(n)))


def extend_field(poly: TwistedPolygon, field: np.ndarray, start: int, count: int) -> np.ndarray:
    return twisted_window(np.asarray(field), poly.monodromy, start, count)


def theta(poly: TwistedPolygon, n: int, field: np.ndarray) -> float:
    """``theta_n(X) = det(X_n, gamma_{n+1}, ..., gamma_{n+m-1})``."""
    rho = poly.frame(n).copy()
    X = extend_field(poly, field, n, 1)[0]
    rho = rho.astype(np.result_type(rho, X))
    rho[:, 0] = X
    return np.linalg.det(rho)


def thetas(poly: TwistedPolygon, field: np.ndarray) -> np.ndarray:
    """``theta_n(X)`` for ``n = 0..N-1``."""
    frames = poly.frames().astype(np.result_type(float, field))
    frames[:, :, 0] = np.asarray(field)
    return np.linalg.det(frames)


def q_matrix(poly: TwistedPolygon, field: np.ndarray, n: int) -> np.ndarray:
    """``Q_n`` with ``rho_n Q_n = (X_n, ..., X_{n+m-1})``."""
    rho = poly.frame(n)
    if abs(np.linalg.det(rho)) <= FRAME_RTOL * max(1.0, np.abs(rho).max()) ** poly.m:
        raise DegenerateFrame(f"frame {n} is singular")
    X = extend_field(poly, field, n, poly.m).T
    return np.linalg.solve(rho, X)


def apply_operator(L: LaurentOp, poly: TwistedPolygon, field: np.ndarray | None = None) -> np.ndarray:
    """``L`` applied to the polygon (or to a field along it)."""
    target = poly.vertices if field is None else field
    return apply(L, target, poly.monodromy)


def induced_dynamics(poly: TwistedPolygon, field: np.ndarray) -> np.ndarray:
    """Exact first-order change of the invariants ``a^0..a^{m-1}`` under ``gamma -> gamma + t X``.

    Differentiating the kernel relation gives ``rho_n (d a_n / dt) = X_{n+m} - sum_k a^k_n X_{n+k}``.
    Returns an ``(m, N)`` array.
    """
    m, N = poly.m, poly.N
    a = invariants_from_polygon(poly).full()
    Xw = extend_field(poly, field, 0, N + m)
    w = poly.window(0, N + m)
    out = np.zeros((m, N), dtype=np.result_type(float, field))
    for n in range(N):
        rhs = Xw[n + m] - a[:m, n] @ Xw[n:n + m]
        out[:, n] = np.linalg.solve(w[n:n + m].T, rhs)
    return out


def induced_dynamics_fd(poly: TwistedPolygon, field: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Centered finite difference of the invariants along the field."""
    plus = invariants_from_polygon(poly.moved(field, h)).full()[: poly.m]
    minus = invariants_from_polygon(poly.moved(field, -h)).full()[: poly.m]
    return (plus - minus) / (2 * h)



# -- lifted fields -------------------------------------------------------------

def lift_operator(F: Functional, state: InvariantState) -> LaurentOp:
    """``r(V D)`` with ``V`` the reduced derivative of ``F``."""
    D = from_invariants(state)
    return r_map(multiply(reduced_derivative(F, state), D))


def lift_hamiltonian_field(F: Functional, poly: TwistedPolygon, normalization: str = GL) -> np.ndarray:
    """``Y^F = r(V D)(gamma)``; its induced invariant dynamics are the quadratic-bracket field of ``F``."""
    state = invariants_from_polygon(poly, normalization)
    return np.real_if_close(apply_operator(lift_operator(F, state), poly))


def hierarchy_operator(state: InvariantState, s: int) -> LaurentOp:
    """``(s/m)(P_+ + Tr P)`` with ``P = D^{s/m}``."""
    D = from_invariants(state)
    m = state.m
    P = frac_power(D, s, m, 0, field="real" if m % 2 else "complex")
    # strictly positive part plus the trace: every order from 0 up
    rows = {k: P.row(k) for k in range(0, P.max_order + 1)}
    return LaurentOp.from_terms(rows, state.N).scale(s / m)


def hierarchy_field(poly: TwistedPolygon, s: int, normalization: str = SL) -> np.ndarray:
    state = invariants_from_polygon(poly, normalization)
    return np.real_if_close(apply_operator(hierarchy_operator(state, s), poly))


def field_map(F: Functional, normalization: str = GL) -> FieldMap:
    """``gamma -> Y^F(gamma)`` as a closure, for geometric evaluations."""
    return lambda poly: lift_hamiltonian_field(F, poly, normalization)


# -- the forms ---------------------------------------------------------------------

def _at(seq: np.ndarray, k: int) -> np.ndarray:
    """``seq_{n+k}`` as a sequence in ``n``."""
    return np.roll(seq, -k)


def omega2_closed_form(f: Functional, g: Functional, state: InvariantState):
    """``omega_2(X^f, X^g)`` as a double sum in ``a^0``, ``a^r`` and the gradients of ``f, g``."""
    m = state.m
    a = state.full()
    N = state.N
    zero = np.zeros(N)

    def grads(F):
        G = F.grad(state)
        full = {r: zero for r in range(m + 1)}
        full.update({r: G[i] for i, r in enumerate(state.free_orders)})
        return full

    df, dg = grads(f), grads(g)
    a0 = a[0]
    total = 0.0
    for r in range(1, m):
        total += np.sum(a0 * _at(dg[r], -r) * df[m - r])
        total -= np.sum(_at(a0, m - r) * df[m - r] * _at(dg[r], m - r))
    for r in range(1, m - 1):
        for s in range(1, m - r):
            # the shifts here run backwards (n - s); with n + s the sum is not antisymmetric
            total -= np.sum(a0 * _at(a[r + s], -s) * df[r] * _at(dg[s], -s))
        for s in range(r + 1, m):
            total += np.sum(_at(a0, m - s) * a[r + m - s] * _at(dg[r], m - s) * df[m - s])
    return total


def derivative_along(phi: Callable[[TwistedPolygon], np.ndarray], poly: TwistedPolygon,
                     field: np.ndarray, h: float = 1e-5) -> np.ndarray:
    """Centered difference of ``phi`` along ``gamma + t X`` (monodromy fixed)."""
    return (np.asarray(phi(poly.moved(field, h))) - np.asarray(phi(poly.moved(field, -h)))) / (2 * h)


def lie_bracket(Y: FieldMap, X: FieldMap, poly: TwistedPolygon, h: float = 1e-5) -> np.ndarray:
    """``[Y, X] = dX(Y) - dY(X)`` by centered differences."""
    return derivative_along(X, poly, Y(poly), h) - derivative_along(Y, poly, X(poly), h)


def kernel_operator(poly: TwistedPolygon) -> LaurentOp:
    """The monic operator annihilating ``gamma`` (general ``a^0``)."""
    return from_invariants(invariants_from_polygon(poly, GL))


def _apply_kernel(poly: TwistedPolygon, field: np.ndarray) -> np.ndarray:
    return apply_operator(kernel_operator(poly), poly, field)


def omega2_geometric(X: FieldMap, Y: FieldMap, poly: TwistedPolygon, h: float = 1e-5):
    """``sum_n d(theta_n / d_n)(Y, X)`` by finite differences."""
    Xv, Yv = X(poly), Y(poly)
    d = frame_dets(poly)
    y_theta_x = derivative_along(lambda P: thetas(P, X(P)), poly, Yv, h)
    x_theta_y = derivative_along(lambda P: thetas(P, Y(P)), poly, Xv, h)
    bracket = lie_bracket(Y, X, poly, h)
    xd = derivative_along(frame_dets, poly, Xv, h)
    yd = derivative_along(frame_dets, poly, Yv, h)
    terms = (y_theta_x - x_theta_y - thetas(poly, bracket)
             + (thetas(poly, Yv) * xd - thetas(poly, Xv) * yd) / d) / d
    return float(np.real(np.sum(terms)))


def omega1_geometric(X: FieldMap, Y: FieldMap, poly: TwistedPolygon, h: float = 1e-5):
    """Quadratic form built from ``theta_n`` of ``D(X)``, ``D(Y)``.

    Both lines carry the factor 1/2; only then do the ``a^0`` variations cancel.
    In the projective normalization the second line vanishes identically.
    """
    Xv, Yv = X(poly), Y(poly)
    d = frame_dets(poly)
    d_next = next_frame_dets(poly)
    x_theta_dy = derivative_along(lambda P: thetas(P, _apply_kernel(P, Y(P))), poly, Xv, h)
    y_theta_dx = derivative_along(lambda P: thetas(P, _apply_kernel(P, X(P))), poly, Yv, h)
    x_dy = derivative_along(lambda P: _apply_kernel(P, Y(P)), poly, Xv, h)
    y_dx = derivative_along(lambda P: _apply_kernel(P, X(P)), poly, Yv, h)
    xd = derivative_along(frame_dets, poly, Xv, h)
    yd = derivative_along(frame_dets, poly, Yv, h)
    first = (x_theta_dy - y_theta_dx - thetas(poly, x_dy - y_dx)) / d_next
    second = (thetas(poly, _apply_kernel(poly, Yv)) * xd
              - thetas(poly, _apply_kernel(poly, Xv)) * yd) / (d * d_next)
    return float(np.real(0.5 * np.sum(first - second)))


def omega_geometric(which: int, X: FieldMap, Y: FieldMap, poly: TwistedPolygon, h: float = 1e-5):
    if int(which) == 1:
        return omega1_geometric(X, Y, poly, h)
    if int(which) == 2:
        return omega2_geometric(X, Y, poly, h)
    raise ValueError("which must be 1 or 2")


def derivative_of_functional(F: Functional, poly: TwistedPolygon, field: np.ndarray,
                             normalization: str = GL, h: float = 1e-5):
    """``Y(f)``: rate of change of ``F(invariants(gamma))`` along ``gamma + t Y``."""
    value = lambda P: F(invariants_from_polygon(P, normalization))
    return float(np.real(derivative_along(value, poly, field, h)))


def coordinate_functional(state: InvariantState, r: int, n: int) -> Functional:
    """``a^r_n`` as a functional."""
    idx = state.free_orders.index(r)

    def gradient(s: InvariantState):
        g = np.zeros(s.coords.shape)
        g[idx, n] = 1.0
        return g

    return Functional(lambda s: s.coords[idx, n], gradient, f"a^{r}_{n}")
