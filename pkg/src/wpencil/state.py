"""Invariant coordinates ``a^r_n`` of monic difference operators."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import SingularSystem
from .periodic import co_prime

GL = "GL"
SL = "SL"


def sl_constant(m: int) -> float:
    """Fixed zero-order coefficient ``(-1)^{m-1}`` of the SL normalization."""
    return float((-1) ** (m - 1))


@dataclass(frozen=True)
class InvariantState:
    """Coordinates of ``D = -T^m + a^{m-1} T^{m-1} + ... + a^0``.

    Only the free coordinates are stored: ``r = 0..m-1`` in GL mode and
    ``r = 1..m-1`` in SL mode (where ``a^0 = (-1)^{m-1}``).  ``coords`` has
    shape ``(len(free_orders), N)``, rows ordered by increasing ``r``.
    """

    m: int
    coords: np.ndarray
    normalization: str = GL
    require_coprime: bool = field(default=False, compare=False)

    def __post_init__(self):
        if self.normalization not in (GL, SL):
            raise ValueError(f"normalization must be 'GL' or 'SL', not {self.normalization!r}")
        coords = np.array(self.coords, copy=True)
        if not np.iscomplexobj(coords):
            coords = coords.astype(float)
        if coords.ndim != 2 or coords.shape[0] != len(self.free_orders):
            raise ValueError(
                f"{self.normalization} state of order {self.m} needs {len(self.free_orders)} coordinate rows"
            )
        coords.setflags(write=False)
        object.__setattr__(self, "coords", coords)
        if self.require_coprime and not self.coprime:
            raise SingularSystem(f"gcd(N={self.N}, m={self.m}) != 1")

    @property
    def N(self) -> int:
        return self.coords.shape[1]

    @property
    def free_orders(self) -> list[int]:
        start = 0 if self.normalization == GL else 1
        return list(range(start, self.m))

    @property
    def coprime(self) -> bool:
        return co_prime(self.N, self.m)

    def a(self, r: int) -> np.ndarray:
        """Coefficient sequence ``a^r`` including the fixed ones."""
        if r == self.m:
            return np.full(self.N, -1.0)
        if r == 0 and self.normalization == SL:
            return np.full(self.N, sl_constant(self.m))
        return self.coords[self.free_orders.index(r)]

    def full(self) -> np.ndarray:
        """All coefficients ``a^0 .. a^m`` as an ``(m+1, N)`` array."""
        return np.array([self.a(r) for r in range(self.m + 1)])

    def flat(self) -> np.ndarray:
        return self.coords.ravel().copy()

    def with_flat(self, x: np.ndarray) -> "InvariantState":
        return InvariantState(self.m, np.reshape(x, self.coords.shape), self.normalization)

    def with_coords(self, coords: np.ndarray) -> "InvariantState":
        return InvariantState(self.m, coords, self.normalization)

    def to_gl(self) -> "InvariantState":
        return InvariantState(self.m, self.full()[: self.m], GL)

    @classmethod
    def from_full(cls, full: np.ndarray, normalization: str = GL) -> "InvariantState":
        """Build from an ``(m, N)`` or ``(m+1, N)`` table of ``a^0..a^{m-1}[, a^m]``."""
        full = np.asarray(full)
        m = full.shape[0] - 1 if np.allclose(full[-1], -1.0) and full.shape[0] > 1 else full.shape[0]
        rows = full[:m] if normalization == GL else full[1:m]
        return cls(m, rows, normalization)

    @classmethod
    def random(cls, m: int, N: int, rng: np.random.Generator, normalization: str = GL,
               low: float = -1.0, high: float = 1.0, a1_range: tuple[float, float] | None = None,
               a0_range: tuple[float, float] = (0.5, 1.5)) -> "InvariantState":
        """Random state with coordinates uniform in ``[low, high]``.

        In GL mode ``a^0`` is drawn from ``a0_range`` (kept away from zero so
        that frames stay non-degenerate); ``a1_range`` overrides the range of
        ``a^1`` (e.g. positive values for logarithmic functionals).
        """
        start = 0 if normalization == GL else 1
        rows = []
        for r in range(start, m):
            if r == 0:
                lo, hi = a0_range
                sign = rng.choice([-1.0, 1.0])
                rows.append(sign * rng.uniform(lo, hi, N))
            elif r == 1 and a1_range is not None:
                rows.append(rng.uniform(*a1_range, N))
            else:
                rows.append(rng.uniform(low, high, N))
        return cls(m, np.array(rows).reshape(m - start, N), normalization)

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "N": self.N,
            "normalization": self.normalization,
            "a": {str(r): np.asarray(self.a(r)).real.tolist() for r in self.free_orders},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "InvariantState":
        m = int(obj["m"])
        norm = obj.get("normalization", GL)
        start = 0 if norm == GL else 1
        rows = [np.asarray(obj["a"][str(r)], dtype=float) for r in range(start, m)]
        state = cls(m, np.array(rows), norm)
        if "N" in obj and int(obj["N"]) != state.N:
            raise ValueError("N does not match the length of the coefficient sequences")
        return state
