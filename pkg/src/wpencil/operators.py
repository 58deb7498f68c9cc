"""Laurent operators in the shift ``T`` with N-periodic coefficients.

An operator ``L = sum_i b^i T^i`` is stored as a dense block of coefficient
rows, one row per order, coefficients written to the *left* of the shift.
Composition follows ``(a T^i)(b T^j) = a * shift(b, i) T^{i+j}``.

Pseudodifference operators have infinite tails of negative powers; here every
operator carries an optional ``floor``: the lowest order whose coefficient is
known exactly.  ``floor=None`` means the operator is a finite sum and exact at
every order.  Products propagate floors conservatively, and any request for a
coefficient below the floor raises :class:`InsufficientDepth`, so a reported
trace or pairing is either exact (up to rounding) or refused.
"""

from __future__ import annotations

import math
from typing import Mapping, Union

import numpy as np

from .errors import BranchUnavailable, InsufficientDepth, NonInvertible, PeriodMismatch
from .periodic import PeriodicSeq, solve_shift_polynomial
from .state import InvariantState

Coeff = Union[PeriodicSeq, np.ndarray, complex, float, int]

_NEG_INF = -math.inf


def _as_row(c: Coeff, period: int) -> np.ndarray:
    if isinstance(c, PeriodicSeq):
        if c.period != period:
            raise PeriodMismatch(f"coefficient period {c.period} != {period}")
        return c.values
    arr = np.asarray(c)
    if arr.ndim == 0:
        return np.full(period, arr.item())
    if arr.shape != (period,):
        raise PeriodMismatch(f"coefficient shape {arr.shape} != ({period},)")
    return arr


def _f(floor):
    return _NEG_INF if floor is None else floor


class LaurentOp:
    """Immutable operator ``sum_i b^i T^i`` with period-N coefficient rows.

    Attributes:
        period: common period N of all coefficients.
        low: order of ``data[0]``.
        data: array of shape ``(K, N)``; row ``k`` holds the order ``low + k``.
        floor: lowest exactly known order, or ``None`` for a finite operator.
    """

    __slots__ = ("period", "low", "data", "floor")

    def __init__(self, data: np.ndarray, low: int, period: int, floor: int | None = None):
        data = np.asarray(data)
        if data.ndim != 2 or data.shape[1] != period:
            raise ValueError(f"data must have shape (K, {period}), got {data.shape}")
        if data.dtype != float and data.dtype != complex:
            data = data.astype(complex if np.iscomplexobj(data) else float)
        if floor is not None and low < floor:
            data = data[floor - low:]
            low = floor
        # strip identically zero rows at the top, and at the bottom when exact
        nonzero = data.any(axis=1)
        if not nonzero.all():
            nz = np.flatnonzero(nonzero)
            if nz.size == 0:
                data = data[:0]
                low = floor if floor is not None else 0
            else:
                bottom = nz[0] if floor is None else 0
                data = data[bottom:nz[-1] + 1]
                low = low + bottom
        if not data.flags.c_contiguous:
            data = np.ascontiguousarray(data)
        data.setflags(write=False)
        self.period = period
        self.low = int(low)
        self.data = data
        self.floor = floor

    # -- constructors ---------------------------------------------------
    @classmethod
    def from_terms(cls, terms: Mapping[int, Coeff], period: int, floor: int | None = None) -> "LaurentOp":
        if not terms:
            return cls.zero(period, floor)
        lo, hi = min(terms), max(terms)
        rows = [_as_row(terms.get(i, 0.0), period) for i in range(lo, hi + 1)]
        dtype = np.result_type(*rows)
        return cls(np.array(rows, dtype=dtype), lo, period, floor)

    @classmethod
    def zero(cls, period: int, floor: int | None = None) -> "LaurentOp":
        return cls(np.zeros((0, period)), 0 if floor is None else floor, period, floor)

    @classmethod
    def identity(cls, period: int) -> "LaurentOp":
        return cls(np.ones((1, period)), 0, period)

    @classmethod
    def monomial(cls, coeff: Coeff, order: int, period: int) -> "LaurentOp":
        return cls(_as_row(coeff, period)[None, :], order, period)

    # -- structure --------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.data.shape[0] == 0

    @property
    def max_order(self) -> int | None:
        return None if self.is_zero else self.low + self.data.shape[0] - 1

    @property
    def min_order(self) -> int | None:
        """Lowest stored order (the floor for truncated operators)."""
        if self.floor is not None:
            return self.floor
        return None if self.is_zero else self.low

    @property
    def is_complex(self) -> bool:
        return np.iscomplexobj(self.data)

    def orders(self) -> range:
        return range(self.low, self.low + self.data.shape[0])

    def row(self, order: int) -> np.ndarray:
        if self.floor is not None and order < self.floor:
            raise InsufficientDepth(f"order {order} lies below the certified floor {self.floor}")
        k = order - self.low
        if 0 <= k < self.data.shape[0]:
            return self.data[k]
        return np.zeros(self.period, dtype=self.data.dtype)

    def coeff(self, order: int) -> PeriodicSeq:
        return PeriodicSeq(self.row(order))

    def terms(self) -> dict[int, PeriodicSeq]:
        return {o: PeriodicSeq(r) for o, r in zip(self.orders(), self.data) if np.any(r != 0)}

    def truncate(self, floor: int | None) -> "LaurentOp":
        """Forget every order below ``floor``."""
        if floor is None:
            return self
        new = max(floor, _f(self.floor))
        new = int(new)
        return LaurentOp(self.data, self.low, self.period, new)

    def __repr__(self) -> str:
        parts = [f"{o}: {np.round(r, 6).tolist()}" for o, r in zip(self.orders(), self.data)]
        return f"LaurentOp(N={self.period}, floor={self.floor}, {{{', '.join(reversed(parts))}}})"

    # -- arithmetic -------------------------------------------------------
    def _check(self, other: "LaurentOp") -> None:
        if self.period != other.period:
            raise PeriodMismatch(f"periods {self.period} and {other.period} differ")

    def __add__(self, other: "LaurentOp") -> "LaurentOp":
        if not isinstance(other, LaurentOp):
            other = LaurentOp.monomial(other, 0, self.period)
        self._check(other)
        floor = max(_f(self.floor), _f(other.floor))
        floor = None if floor == _NEG_INF else int(floor)
        if self.is_zero and other.is_zero:
            return LaurentOp.zero(self.period, floor)
        orders = [o for op in (self, other) if not op.is_zero for o in (op.low, op.max_order)]
        lo, hi = min(orders), max(orders)
        out = np.zeros((hi - lo + 1, self.period), dtype=np.result_type(self.data, other.data))
        for op in (self, other):
            if not op.is_zero:
                out[op.low - lo: op.low - lo + op.data.shape[0]] += op.data
        return LaurentOp(out, lo, self.period, floor)

    __radd__ = __add__

    def __neg__(self) -> "LaurentOp":
        return LaurentOp(-self.data, self.low, self.period, self.floor)

    def __sub__(self, other: "LaurentOp") -> "LaurentOp":
        if not isinstance(other, LaurentOp):
            other = LaurentOp.monomial(other, 0, self.period)
        return self + (-other)

    def __rsub__(self, other) -> "LaurentOp":
        return (-self) + other

    def scale(self, c: complex) -> "LaurentOp":
        return LaurentOp(self.data * c, self.low, self.period, self.floor)

    def __mul__(self, c):
        if isinstance(c, LaurentOp):
            raise TypeError("use @ or multiply() for operator composition")
        return self.scale(c)

    __rmul__ = __mul__

    def __matmul__(self, other: "LaurentOp") -> "LaurentOp":
        return multiply(self, other)

    def left_mul(self, seq: Coeff) -> "LaurentOp":
        """``s L`` for a multiplication operator ``s``."""
        row = _as_row(seq, self.period)
        return LaurentOp(self.data * row[None, :], self.low, self.period, self.floor)

    def allclose(self, other: "LaurentOp", atol: float = 1e-12) -> bool:
        return max_abs_diff(self, other) <= atol


def product_floor(a: LaurentOp, b: LaurentOp) -> float:
    """Lowest order of ``a @ b`` that is fully determined by the known coefficients."""
    if a.is_zero and a.floor is None or b.is_zero and b.floor is None:
        return _NEG_INF
    amax = _NEG_INF if a.is_zero else a.max_order
    bmax = _NEG_INF if b.is_zero else b.max_order
    return max(_f(a.floor) + bmax, _f(b.floor) + amax)


def multiply(a: LaurentOp, b: LaurentOp, floor: int | None = None) -> LaurentOp:
    """Composition ``a b``, truncated below ``floor`` when given.

    The result's floor is the larger of the requested one and the depth the
    operands can certify.
    """
    a._check(b)
    pf = product_floor(a, b)
    if floor is not None:
        pf = max(pf, floor)
    res_floor = None if pf == _NEG_INF else int(pf)
    if a.is_zero or b.is_zero:
        return LaurentOp.zero(a.period, res_floor)
    ka, kb = a.data.shape[0], b.data.shape[0]
    lo = a.low + b.low
    idx = np.arange(a.period)
    out = np.zeros((ka + kb - 1, a.period), dtype=np.result_type(a.data, b.data))
    for i in range(ka):
        oa = a.low + i
        if res_floor is not None and oa + b.max_order < res_floor:
            continue
        out[i:i + kb] += a.data[i][None, :] * b.data[:, (idx + oa) % a.period]
    return LaurentOp(out, lo, a.period, res_floor)


def power(a: LaurentOp, k: int, floor: int | None = None) -> LaurentOp:
    """``a^k`` for ``k >= 0``."""
    if k < 0:
        raise ValueError("use invert() for negative powers")
    out = LaurentOp.identity(a.period)
    top = max(a.max_order or 0, 0)
    for i in range(k):
        f = None if floor is None else floor - (k - 1 - i) * top
        out = multiply(out, a, f)
    return out


def max_abs_diff(a: LaurentOp, b: LaurentOp) -> float:
    """Largest coefficient difference over the orders both operands certify."""
    d = a - b
    return float(np.abs(d.data).max()) if not d.is_zero else 0.0


# -- projections and r-matrices ---------------------------------------------

def project(L: LaurentOp, part: str) -> LaurentOp:
    """Positive (``'plus'``), negative (``'minus'``) or order-zero (``'zero'``) part."""
    if part == "plus":
        lo, hi = 1, None
    elif part == "minus":
        lo, hi = None, -1
    elif part == "zero":
        lo, hi = 0, 0
    else:
        raise ValueError(f"unknown part {part!r}")
    floor = L.floor
    if floor is not None and lo is not None and floor <= lo:
        floor = None
    if floor is not None and hi is not None and floor > hi:
        # nothing in this range is known
        return LaurentOp.zero(L.period, floor)
    if L.is_zero:
        return LaurentOp.zero(L.period, floor)
    orders = np.arange(L.low, L.low + L.data.shape[0])
    mask = np.ones_like(orders, dtype=bool)
    if lo is not None:
        mask &= orders >= lo
    if hi is not None:
        mask &= orders <= hi
    data = np.where(mask[:, None], L.data, 0)
    return LaurentOp(data, L.low, L.period, floor)


def plus(L: LaurentOp) -> LaurentOp:
    return project(L, "plus")


def minus(L: LaurentOp) -> LaurentOp:
    return project(L, "minus")


def zero_part(L: LaurentOp) -> LaurentOp:
    return project(L, "zero")


def r_map(L: LaurentOp) -> LaurentOp:
    """``r(L) = (L_+ - L_-) / 2``."""
    return (plus(L) - minus(L)).scale(0.5)


def r_plus(L: LaurentOp) -> LaurentOp:
    """``r^+(L) = L_+ + L_0 / 2``."""
    return plus(L) + zero_part(L).scale(0.5)


# -- trace pairing ------------------------------------------------------------

def trace(L: LaurentOp) -> PeriodicSeq:
    """The order-zero coefficient sequence."""
    if L.floor is not None and L.floor > 0:
        raise InsufficientDepth(f"trace needs order 0, operator is certified only down to {L.floor}")
    return PeriodicSeq(L.row(0))


def inner_product(a: LaurentOp, b: LaurentOp):
    """``<a, b> = sum_n Tr(a b)(n)`` over one period."""
    a._check(b)
    if product_floor(a, b) > 0:
        raise InsufficientDepth(
            f"pairing needs order 0 of the product; operands certify only down to {product_floor(a, b)}"
        )
    total = 0.0
    for oa, row in zip(a.orders(), a.data):
        if b.is_zero or not (b.low <= -oa <= b.max_order):
            continue
        total = total + np.dot(row, np.roll(b.row(-oa), -oa))
    return total


# -- inversion, roots, fractional powers -------------------------------------

def invert(L: LaurentOp, floor: int) -> LaurentOp:
    """Inverse pseudodifference operator, certified down to ``floor`` where possible.

    Raises:
        NonInvertible: if the leading coefficient has a zero entry.
    """
    if L.is_zero:
        raise NonInvertible("the zero operator is not invertible")
    k = L.max_order
    lead = L.row(k)
    if np.any(np.abs(lead) == 0):
        raise NonInvertible("leading coefficient vanishes somewhere")
    depth = -k - floor  # number of correction rows below the leading one
    if L.floor is not None:
        depth = min(depth, k - L.floor)
    depth = max(depth, 0)
    N = L.period
    rows = []
    for j in range(depth + 1):
        acc = np.zeros(N, dtype=np.result_type(L.data, complex if L.is_complex else float))
        if j == 0:
            acc = acc + 1.0
        for i in range(1, j + 1):
            acc = acc - L.row(k - i) * np.roll(rows[j - i], -(k - i))
        rows.append(np.roll(acc / lead, k))
    data = np.array(rows[::-1])
    res_floor = -k - depth
    return LaurentOp(data, res_floor, N, max(res_floor, floor))


def leading_root(m: int, field: str = "real") -> complex:
    """Branch for the leading coefficient ``c`` of ``(-T^m)^{1/m} = c T``."""
    if m % 2 == 1:
        return -1.0 if field == "real" else complex(-1.0)
    if field != "complex":
        raise BranchUnavailable(f"c^{m} = -1 has no real solution; use field='complex'")
    return complex(np.exp(1j * np.pi / m))


def mth_root(D: LaurentOp, m: int, floor: int, field: str = "real") -> LaurentOp:
    """``R = D^{1/m}`` with ``R = c T + r_0 + r_{-1} T^{-1} + ...``.

    ``D`` must have order ``m`` with leading coefficient the constant ``-1``.
    Coefficients are peeled top-down: the unknown row at order ``-j`` solves
    ``c^{m-1} (1 + T + ... + T^{m-1}) x = residual``.

    Raises:
        SingularSystem: if ``gcd(N, m) != 1``.
        BranchUnavailable: real field with even ``m``.
    """
    if D.max_order != m:
        raise ValueError(f"expected an operator of order {m}, got {D.max_order}")
    if not np.allclose(D.row(m), -1.0, atol=1e-14, rtol=0):
        raise ValueError("leading coefficient must be the constant -1")
    c = leading_root(m, field)
    N = D.period
    cm1 = c ** (m - 1)
    ones = [(1.0, p) for p in range(m)]
    dtype = complex if (field == "complex" or D.is_complex) else float
    R = LaurentOp(np.full((1, N), c, dtype=dtype), 1, N)
    for j in range(0, 1 - floor):
        order = m - 1 - j
        partial = power(R, m, floor=order)
        resid = D.row(order) - partial.row(order)
        x = solve_shift_polynomial(ones, PeriodicSeq(resid / cm1))
        R = R + LaurentOp.monomial(x.values.astype(dtype), -j, N)
    return R.truncate(floor)


def root_floor_for(s: int, floor: int) -> int:
    """Floor needed on ``D^{1/m}`` so that ``D^{s/m}`` is certified down to ``floor``."""
    if s > 0:
        return floor - (s - 1)
    return floor + (-s) + 1


def frac_power(D: LaurentOp, s: int, m: int, floor: int, field: str = "real", root: LaurentOp | None = None) -> LaurentOp:
    """``D^{s/m}`` for a nonzero integer ``s``, certified down to ``floor``."""
    if s == 0:
        raise ValueError("s must be nonzero")
    rf = root_floor_for(s, floor)
    if root is None or _f(root.floor) > rf:
        root = mth_root(D, m, rf, field)
    else:
        root = root.truncate(rf)
    if s > 0:
        return power(root, s, floor)
    inv = invert(root, floor + (-s) - 1)
    return power(inv, -s, floor)


def from_invariants(state: InvariantState) -> LaurentOp:
    """``D = -T^m + a^{m-1} T^{m-1} + ... + a^0`` honoring the normalization."""
    full = state.full()
    return LaurentOp.from_terms({r: full[r] for r in range(state.m + 1)}, state.N)


# -- difference operators on polygons ----------------------------------------

def twisted_window(values: np.ndarray, monodromy: np.ndarray, start: int, count: int) -> np.ndarray:
    """Rows ``start .. start+count-1`` of the twisted sequence ``x_{n+N} = M x_n``.

    ``values`` has shape ``(N, d)``; returns shape ``(count, d)``.
    """
    N = values.shape[0]
    idx = np.arange(start, start + count)
    q, r = np.divmod(idx, N)
    out = np.empty((count, values.shape[1]), dtype=np.result_type(values, monodromy))
    cache: dict[int, np.ndarray] = {}
    for k in np.unique(q):
        k = int(k)
        if k not in cache:
            cache[k] = (np.linalg.matrix_power(monodromy, k) if k >= 0
                        else np.linalg.matrix_power(np.linalg.inv(monodromy), -k))
        sel = q == k
        out[sel] = values[r[sel]] @ cache[k].T
    return out


def apply(L: LaurentOp, values: np.ndarray, monodromy: np.ndarray) -> np.ndarray:
    """Apply a finite operator to a twisted sequence of vectors.

    ``(L x)_n = sum_i b^i_n x_{n+i}`` for ``n = 0..N-1``, with indices outside
    one period resolved through the monodromy.
    """
    if L.floor is not None:
        raise InsufficientDepth("only finite operators act on polygons")
    N = L.period
    values = np.asarray(values)
    if values.ndim == 1:
        values = values[:, None]
    if L.is_zero:
        return np.zeros_like(values, dtype=np.result_type(values, monodromy))
    window = twisted_window(values, np.asarray(monodromy), L.low, N + L.data.shape[0] - 1)
    out = np.zeros((N, values.shape[1]), dtype=np.result_type(window, L.data))
    for k, row in enumerate(L.data):
        out += row[:, None] * window[k:k + N]
    return out
