"""N-periodic scalar sequences and shift-polynomial solves.

A sequence ``s`` of period ``N`` is stored by its values on one period,
``s.values[n]`` for ``n = 0..N-1``; access at any integer index is reduced
mod ``N``.  The shift ``T`` acts by ``(T s)_n = s_{n+1}``.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import PeriodMismatch, SingularSystem

# Relative size below which a circulant eigenvalue is treated as zero.
SINGULAR_RTOL = 1e-10


class PeriodicSeq:
    """Immutable N-periodic sequence of real or complex scalars."""

    __slots__ = ("_values",)

    def __init__(self, values: Iterable[complex] | np.ndarray):
        arr = np.array(values, copy=True)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("a periodic sequence needs a non-empty 1-d array of values")
        if not np.iscomplexobj(arr):
            arr = arr.astype(float)
        arr.setflags(write=False)
        self._values = arr

    @classmethod
    def constant(cls, c: complex, period: int) -> "PeriodicSeq":
        return cls(np.full(period, c))

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def period(self) -> int:
        return self._values.size

    def __len__(self) -> int:
        return self.period

    def __getitem__(self, n: int) -> complex:
        return self._values[n % self.period]

    def __repr__(self) -> str:
        return f"PeriodicSeq({self._values.tolist()})"

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PeriodicSeq):
            return NotImplemented
        return self.period == other.period and bool(np.array_equal(self._values, other._values))

    __hash__ = None  # type: ignore[assignment]

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, PeriodicSeq):
            if other.period != self.period:
                raise PeriodMismatch(f"periods {self.period} and {other.period} differ")
            return other._values
        return other

    def __add__(self, other):
        return PeriodicSeq(self._values + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return PeriodicSeq(self._values - self._coerce(other))

    def __rsub__(self, other):
        return PeriodicSeq(self._coerce(other) - self._values)

    def __mul__(self, other):
        return PeriodicSeq(self._values * self._coerce(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return PeriodicSeq(self._values / self._coerce(other))

    def __rtruediv__(self, other):
        return PeriodicSeq(self._coerce(other) / self._values)

    def __neg__(self):
        return PeriodicSeq(-self._values)

    def allclose(self, other: "PeriodicSeq", atol: float = 1e-12) -> bool:
        return self.period == other.period and bool(np.allclose(self._values, other._values, rtol=0, atol=atol))


def shift(s: PeriodicSeq, k: int) -> PeriodicSeq:
    """Return ``T^k s``, i.e. the sequence ``n -> s[n+k]``."""
    return PeriodicSeq(np.roll(s.values, -k))


def period_sum(s: PeriodicSeq) -> complex:
    """Sum of ``s`` over one period."""
    total = s.values.sum()
    return total.real if not np.iscomplexobj(total) else total


def shift_circulant(terms: Sequence[tuple[complex, int]], period: int) -> np.ndarray:
    """Dense matrix of ``sum_j c_j T^{e_j}`` acting on period-N sequences."""
    dtype = complex if any(np.iscomplexobj(np.asarray(c)) for c, _ in terms) else float
    mat = np.zeros((period, period), dtype=dtype)
    rows = np.arange(period)
    for c, e in terms:
        mat[rows, (rows + e) % period] += c
    return mat


def shift_symbol(terms: Sequence[tuple[complex, int]], period: int) -> np.ndarray:
    """Eigenvalues ``sum_j c_j w^{k e_j}`` of the circulant, ``w = exp(2 pi i / N)``."""
    k = np.arange(period)
    out = np.zeros(period, dtype=complex)
    for c, e in terms:
        out += c * np.exp(2j * np.pi * k * e / period)
    return out


def apply_shift_polynomial(terms: Sequence[tuple[complex, int]], x: PeriodicSeq) -> PeriodicSeq:
    """Forward application ``sum_j c_j shift(x, e_j)``."""
    acc = np.zeros(x.period, dtype=np.result_type(x.values, *[np.asarray(c) for c, _ in terms]))
    for c, e in terms:
        acc = acc + c * np.roll(x.values, -e)
    return PeriodicSeq(acc)


def solve_shift_polynomial(terms: Sequence[tuple[complex, int]], rhs: PeriodicSeq) -> PeriodicSeq:
    """Solve ``sum_j c_j shift(x, e_j) = rhs`` for the periodic sequence ``x``.

    Singularity is decided from the circulant's Fourier symbol; the solve
    itself is a dense LU factorization.

    Raises:
        SingularSystem: if some eigenvalue of the circulant vanishes.
    """
    period = rhs.period
    symbol = np.abs(shift_symbol(terms, period))
    scale = max(symbol.max(), 1.0)
    if symbol.min() <= SINGULAR_RTOL * scale:
        raise SingularSystem(
            f"shift polynomial {list(terms)} is singular on period {period} "
            f"(smallest circulant eigenvalue {symbol.min():.3e})"
        )
    mat = shift_circulant(terms, period)
    return PeriodicSeq(np.linalg.solve(mat, rhs.values))


def solve_shift_polynomial_lstsq(
    terms: Sequence[tuple[complex, int]], rhs: np.ndarray, atol: float = 1e-9
) -> np.ndarray:
    """Minimum-norm solution of a possibly singular circulant system.

    Used for gauge fixing, where the kernel (constants) is a genuine symmetry
    and the right-hand side is known to lie in the range.  Raises
    ``SingularSystem`` if the system is inconsistent.
    """
    mat = shift_circulant(terms, rhs.size)
    x, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
    resid = np.abs(mat @ x - rhs).max()
    if resid > atol * max(1.0, np.abs(rhs).max()):
        raise SingularSystem(f"inconsistent gauge system, residual {resid:.3e}")
    return x


def co_prime(period: int, m: int) -> bool:
    return np.gcd(period, m) == 1
