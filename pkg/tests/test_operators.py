import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wpencil import (
    SL,
    BranchUnavailable,
    InsufficientDepth,
    InvariantState,
    LaurentOp,
    NonInvertible,
    SingularSystem,
    frac_power,
    from_invariants,
    inner_product,
    invert,
    mth_root,
    multiply,
    trace,
)
from wpencil.operators import (
    apply,
    max_abs_diff,
    minus,
    plus,
    power,
    project,
    r_map,
    r_plus,
    zero_part,
)
from wpencil.polygons import reconstruct
from wpencil.runner.checks import random_op


def T(k, N, c=1.0):
    return LaurentOp.monomial(c, k, N)


def test_shift_times_inverse_shift_is_identity():
    assert multiply(T(1, 3), T(-1, 3)).allclose(LaurentOp.identity(3))


def test_composition_shifts_the_right_coefficient():
    prod = multiply(T(1, 2, np.array([1.0, 2.0])), T(2, 2, np.array([3.0, 4.0])))
    assert prod.max_order == 3 and prod.min_order == 3
    np.testing.assert_array_equal(prod.row(3), [4.0, 6.0])


def test_projections_of_a_three_term_operator():
    L = LaurentOp.from_terms({1: 2.0, 0: 3.0, -1: 5.0}, 4)
    assert plus(L).allclose(T(1, 4, 2.0))
    assert zero_part(L).allclose(LaurentOp.identity(4).scale(3.0))
    assert minus(L).allclose(T(-1, 4, 5.0))
    assert project(project(L, "plus"), "minus").is_zero


def test_r_maps():
    L = T(1, 3) + T(-1, 3)
    assert r_map(L).allclose((T(1, 3) - T(-1, 3)).scale(0.5))
    assert r_map(LaurentOp.identity(3).scale(7.0)).is_zero


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_projection_partition_and_r_plus_identity(seed):
    L = random_op(np.random.default_rng(seed), 5)
    assert (plus(L) + zero_part(L) + minus(L)).allclose(L)
    assert max_abs_diff(r_plus(L) - r_map(L), L.scale(0.5)) < 1e-15


def test_trace_of_off_diagonal_monomial_vanishes():
    assert np.all(trace(T(2, 4, 3.0)).values == 0)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pairing_is_symmetric_and_invariant(seed):
    rng = np.random.default_rng(seed)
    A, B, C = (random_op(rng, 4) for _ in range(3))
    assert abs(inner_product(A, B) - inner_product(B, A)) < 1e-12
    assert abs(inner_product(multiply(A, B), C) - inner_product(A, multiply(B, C))) < 1e-12
    assert max_abs_diff(multiply(multiply(A, B), C), multiply(A, multiply(B, C))) < 1e-12


def test_pairing_refuses_truncated_operands():
    A = LaurentOp.from_terms({2: 1.0, 1: 1.0}, 3, floor=1)
    # order 0 of A B sees A_{-1} B_1, and A_{-1} is below the floor
    B = LaurentOp.from_terms({1: 1.0, -1: 1.0}, 3)
    with pytest.raises(InsufficientDepth):
        inner_product(A, B)
    assert inner_product(A, LaurentOp.from_terms({-1: 1.0}, 3)) == pytest.approx(3.0)


def test_reading_below_the_floor_raises():
    A = LaurentOp.from_terms({1: 1.0, 0: 2.0}, 3, floor=-2)
    assert np.all(A.row(-2) == 0)
    with pytest.raises(InsufficientDepth):
        A.row(-3)


def test_invert_monomial_and_identity():
    c = np.array([1.0, 2.0, 4.0])
    inv = invert(T(1, 3, c), floor=-5)
    assert inv.allclose(T(-1, 3, np.roll(1 / c, 1)).truncate(-5))
    assert invert(LaurentOp.identity(3), -4).allclose(LaurentOp.identity(3).truncate(-4))


def test_invert_random_operator_up_to_floor(rng):
    L = LaurentOp(rng.uniform(0.5, 1.5, (3, 5)), -1, 5)
    inv = invert(L, floor=-8)
    prod = multiply(L, inv)
    assert prod.floor is not None
    for k in range(prod.floor, prod.max_order + 1):
        np.testing.assert_allclose(prod.row(k), 1.0 if k == 0 else 0.0, atol=1e-12)


def test_invert_rejects_vanishing_leading_coefficient():
    with pytest.raises(NonInvertible):
        invert(T(1, 3, np.array([1.0, 0.0, 1.0])), -2)


def test_root_of_pure_shift():
    R = mth_root(T(3, 4, -1.0), 3, floor=-4)
    assert R.allclose(T(1, 4, -1.0).truncate(-4))
    assert frac_power(T(3, 4, -1.0), 2, 3, floor=-3).allclose(T(2, 4).truncate(-3))


def test_root_cubes_back_to_operator(rng):
    for _ in range(10):
        D = from_invariants(InvariantState.random(3, 4, rng))
        R = mth_root(D, 3, floor=-4)
        P = power(R, 3, floor=R.floor + 2)
        for k in range(P.floor, 4):
            np.testing.assert_allclose(P.row(k), D.row(k), atol=1e-11)


def test_root_needs_coprime_period(rng):
    D = from_invariants(InvariantState.random(3, 3, rng))
    with pytest.raises(SingularSystem):
        mth_root(D, 3, floor=-2)


def test_even_order_root_branches(rng):
    D = from_invariants(InvariantState.random(2, 3, rng))
    with pytest.raises(BranchUnavailable):
        mth_root(D, 2, floor=-2)
    R = mth_root(D, 2, floor=-3, field="complex")
    np.testing.assert_allclose(R.row(1), np.exp(1j * np.pi / 2))
    P = power(R, 2, floor=-2)
    for k in range(-2, 3):
        np.testing.assert_allclose(P.row(k), D.row(k), atol=1e-11)


def test_odd_order_branches_agree(rng):
    D = from_invariants(InvariantState.random(3, 4, rng))
    real = mth_root(D, 3, floor=-3)
    cplx = mth_root(D, 3, floor=-3, field="complex")
    assert max_abs_diff(real, cplx) < 1e-12


def test_fractional_power_round_trips(rng):
    D = from_invariants(InvariantState.random(3, 5, rng))
    assert max_abs_diff(frac_power(D, 3, 3, floor=-2), D.truncate(-2)) < 1e-11
    prod = multiply(frac_power(D, -1, 3, floor=-5), frac_power(D, 1, 3, floor=-5))
    for k in range(prod.floor, prod.max_order + 1):
        np.testing.assert_allclose(prod.row(k), 1.0 if k == 0 else 0.0, atol=1e-11)


def test_zero_invariants_give_canonical_operator():
    D = from_invariants(InvariantState(3, np.zeros((2, 4)), SL))
    assert D.allclose(LaurentOp.from_terms({3: -1.0, 0: 1.0}, 4))


def test_apply_shifts_with_monodromy(rng):
    poly = reconstruct(InvariantState.random(3, 4, rng))
    out = apply(T(4, 4), poly.vertices, poly.monodromy)
    np.testing.assert_allclose(out[0], poly.monodromy @ poly.vertices[0], atol=1e-12)
    np.testing.assert_allclose(apply(T(1, 4), poly.vertices, poly.monodromy)[1], poly.vertices[2])
