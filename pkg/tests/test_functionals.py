import numpy as np
import pytest

from wpencil import GL, SL, DomainError, InvariantState, LaurentOp, Z_s
from wpencil.brackets import quadratic_velocity
from wpencil.functionals import (
    FINITE_DIFFERENCE,
    as_finite_difference,
    boussinesq_hamiltonian,
    constant_functional,
    coordinate_sum,
    directional_derivative,
    finite_difference_grad,
    hierarchy_hamiltonian,
    hierarchy_value,
    linear_functional,
    pairing,
    polynomial_functional,
    random_polynomial,
    reduce_gradient,
    reduced_derivative,
    variational_derivative,
)
from wpencil.operators import from_invariants, inner_product, max_abs_diff, multiply, trace
from wpencil.state import sl_constant


def test_linear_functional_derivative_is_inverse_shift(gl_state):
    V = variational_derivative(coordinate_sum(1), gl_state)
    assert V.allclose(LaurentOp.monomial(1.0, -1, gl_state.N))


def test_constant_functional_has_zero_derivative(gl_state):
    assert variational_derivative(constant_functional(4.0), gl_state).is_zero


def test_polynomial_gradient_matches_finite_differences(rng, gl_state):
    for _ in range(5):
        F = random_polynomial(gl_state, rng)
        np.testing.assert_allclose(F.grad(gl_state), finite_difference_grad(F, gl_state), atol=1e-8)


def test_fixed_coordinates_enter_as_constants(sl_state):
    F = polynomial_functional([(1.0, [(0, 0), (1, 0)])])
    assert F(sl_state) == pytest.approx(sl_constant(3) * sl_state.a(1).sum())
    np.testing.assert_allclose(F.grad(sl_state)[0], sl_constant(3))


def test_finite_differences_exact_on_linear_and_quadratic(rng, gl_state):
    w = rng.normal(size=gl_state.coords.shape)
    F = linear_functional(w, gl_state)
    for h in (1e-1, 1e-3, 1e-6):
        np.testing.assert_allclose(finite_difference_grad(F, gl_state, h), w, atol=1e-9)
    Q = polynomial_functional([(1.0, [(1, 0), (1, 0)])])
    g = finite_difference_grad(Q, gl_state, 1e-2)
    np.testing.assert_allclose(g[1], 2 * gl_state.a(1), atol=1e-12)
    with pytest.raises(ValueError):
        finite_difference_grad(F, gl_state, 0.0)
    assert as_finite_difference(F).grad_kind == FINITE_DIFFERENCE


def test_pairing_matches_directional_derivative(rng, gl_state):
    F = random_polynomial(gl_state, rng)
    v = rng.normal(size=gl_state.coords.shape)
    assert pairing(F.grad(gl_state), v) == pytest.approx(directional_derivative(F, gl_state, v), abs=1e-8)


def test_leading_shift_has_trivial_hierarchy():
    # D = -T^3: every a^r vanishes, the cube root is -T
    st = InvariantState(3, np.zeros((3, 4)), GL)
    assert abs(hierarchy_value(st, 1)) < 1e-15
    Z = Z_s(from_invariants(st), 1, 3, floor=-4)
    assert Z.allclose(LaurentOp.monomial(1 / 3, -2, 4).truncate(-4))


def test_hierarchy_gradients_match_finite_differences(rng):
    for _ in range(3):
        st = InvariantState.random(3, 4, rng, SL)
        for s in (1, 2, 4, 5):
            F = hierarchy_hamiltonian(s)
            fd = finite_difference_grad(F, st)
            assert np.abs(F.grad(st) - fd).max() / max(1.0, np.abs(fd).max()) < 1e-6


def test_hierarchy_gradient_agrees_with_z_rows(sl_state):
    D = from_invariants(sl_state)
    for s in (1, 2):
        Z = Z_s(D, s, 3, floor=-4)
        g = hierarchy_hamiltonian(s).grad(sl_state)
        for i, r in enumerate(sl_state.free_orders):
            np.testing.assert_allclose(g[i], np.roll(Z.row(-r), -r), atol=1e-13)


def test_multiples_of_the_order_are_constant_in_sl(sl_state, rng):
    F3 = hierarchy_hamiltonian(3)
    other = InvariantState.random(3, 4, rng, SL)
    assert F3(sl_state) == pytest.approx(F3(other))
    assert np.all(F3.grad(sl_state) == 0)


def test_hierarchy_is_shift_covariant(sl_state):
    rolled = sl_state.with_coords(np.roll(sl_state.coords, 1, axis=1))
    for s in (1, 2, 4):
        F = hierarchy_hamiltonian(s)
        assert abs(F(rolled) - F(sl_state)) < 1e-12


def test_lowering_the_floor_changes_nothing(sl_state):
    for s in (1, 2, 4, 5):
        assert abs(hierarchy_value(sl_state, s, 0) - hierarchy_value(sl_state, s, -5)) < 1e-12
        g0 = hierarchy_hamiltonian(s).grad(sl_state)
        g5 = hierarchy_hamiltonian(s, margin=5).grad(sl_state)
        assert np.abs(g0 - g5).max() < 1e-12


def test_even_order_hierarchy_is_complex(rng):
    st = InvariantState.random(2, 3, rng, SL)
    assert np.iscomplexobj(hierarchy_hamiltonian(1).grad(st))


def test_boussinesq_examples():
    H = boussinesq_hamiltonian()
    ones = InvariantState(3, np.ones((2, 4)), SL)
    assert H(ones) == 0.0
    np.testing.assert_allclose(H.grad(ones)[0], 1.0)
    e = np.e
    st = InvariantState(3, np.array([[1, e, 1, e], [0, 0, 0, 0]]), SL)
    assert H(st) == pytest.approx(2.0)
    with pytest.raises(DomainError):
        H(InvariantState(3, np.array([[1, -1, 1, 1], [0, 0, 0, 0.0]]), SL))


def test_gl_reduction_absorbs_appended_low_terms(rng, gl_state):
    V = variational_derivative(random_polynomial(gl_state, rng), gl_state)
    extra = LaurentOp.monomial(rng.normal(size=4), -3, 4)
    assert max_abs_diff(reduce_gradient(gl_state, V), reduce_gradient(gl_state, V + extra)) < 1e-14


def test_gl_reduced_derivative_is_left_gauge_invariant(rng, gl_state):
    V = reduced_derivative(random_polynomial(gl_state, rng), gl_state)
    D = from_invariants(gl_state)
    assert np.abs(trace(multiply(D, V)).values).max() < 1e-13


def test_sl_reduction_is_unique_up_to_its_kernel(rng, sl_state):
    F, G = random_polynomial(sl_state, rng), random_polynomial(sl_state, rng)
    V = variational_derivative(F, sl_state)
    A = reduce_gradient(sl_state, V)
    B = reduce_gradient(sl_state, V + LaurentOp.monomial(rng.normal(size=4), -3, 4))
    diff = B - A
    kappa = diff.row(-3)[0]
    np.testing.assert_allclose(diff.row(-3), kappa, atol=1e-13)
    np.testing.assert_allclose(diff.row(0), kappa / sl_constant(3), atol=1e-13)
    assert np.abs(diff.row(-1)).max() < 1e-13 and np.abs(diff.row(-2)).max() < 1e-13
    D = from_invariants(sl_state)
    W = reduced_derivative(G, sl_state)
    assert abs(inner_product(quadratic_velocity(D, A), W) - inner_product(quadratic_velocity(D, B), W)) < 1e-13
