"""Acceptance battery at desk scale: m = 3, N = 4, 20 random states, fixed seed.

Each test prints one line ``criterion <k> PASS|FAIL ...`` listing every
sub-measurement with its tolerance; the lines are repeated in the terminal
summary.  Run with ``pytest tests/test_acceptance.py -v`` (add ``-s`` to see
the lines as they are produced).
"""

from __future__ import annotations

from dataclasses import replace
from functools import partial

import numpy as np
import pytest

from wpencil import BRACKET1, BRACKET2, GL, SL, InvariantState, SingularSystem, jacobi_residual, mth_root
from wpencil.brackets import bracket1, bracket2
from wpencil.functionals import random_polynomial
from wpencil.operators import from_invariants
from wpencil.runner import checks as C
from wpencil.runner import integrate_flow, verify_suite
from wpencil.runner.flows import FlowConfig, HamiltonianSpec

SEED = 20240517
M, N = 3, 4
TRIALS = 20


def gen(criterion: int, part: int = 0) -> np.random.Generator:
    return np.random.default_rng([SEED, criterion, part])


class Criterion:
    """Collects (label, value, tolerance) triples and renders one summary line."""

    def __init__(self, number: int, title: str):
        self.number, self.title = number, title
        self.parts: list[tuple[str, str, bool]] = []

    def below(self, label: str, value: float, tol: float) -> None:
        value = float(abs(value))
        self.parts.append((label, f"{value:.2e} < {tol:.0e}", bool(np.isfinite(value) and value < tol)))

    def near(self, label: str, value: float, target: float, tol: float) -> None:
        ok = bool(np.isfinite(value) and abs(value - target) <= tol)
        self.parts.append((label, f"{value:.3f} = {target:g} +- {tol:g}", ok))

    def holds(self, label: str, ok: bool) -> None:
        self.parts.append((label, "yes" if ok else "no", bool(ok)))

    @property
    def ok(self) -> bool:
        return all(p[2] for p in self.parts)

    def finish(self, emit) -> None:
        status = "PASS" if self.ok else "FAIL"
        detail = "; ".join(f"{label}: {text}{'' if ok else ' [!]'}" for label, text, ok in self.parts)
        emit(f"criterion {self.number:2d} {status}  {self.title} | {detail}")
        failed = [label for label, _, ok in self.parts if not ok]
        assert not failed, f"criterion {self.number} failed: {failed}"


def test_criterion_01_operator_algebra(acceptance_line):
    c = Criterion(1, "operator algebra, 100 triples")
    c.below("assoc/adjoint/partition", C.algebra(gen(1), M, N, 100), 1e-12)
    c.finish(acceptance_line)


def test_criterion_02_roots(acceptance_line):
    c = Criterion(2, "cube root of D")
    c.below("R^3 = D to certified depth", C.root_power(gen(2), M, N, TRIALS), 1e-11)
    D33 = from_invariants(InvariantState.random(3, 3, gen(2, 1), GL))
    try:
        mth_root(D33, 3, floor=-3)
        raised = False
    except SingularSystem:
        raised = True
    c.holds("(3,3) raises SingularSystem", raised)
    c.finish(acceptance_line)


def test_criterion_03_variational_calculus(acceptance_line):
    c = Criterion(3, "variational calculus")
    c.below("Z^s vs FD, s=1,2,4,5 (rel)", C.hierarchy_gradients(gen(3), M, N, TRIALS), 1e-6)
    c.below("pairing consistency", C.pairing_consistency(gen(3, 1), M, N, TRIALS), 1e-5)
    c.finish(acceptance_line)


def _sweep_slope(which, rng) -> float | None:
    """O(h^2) check: slope of log|residual| vs log h on the first triple above roundoff."""
    hs = np.array([4e-2, 2e-2, 1e-2])
    for _ in range(10):
        st = InvariantState.random(M, N, rng, GL)
        F, G, H = (random_polynomial(st, rng) for _ in range(3))
        r = np.array([abs(jacobi_residual(F, G, H, st, which, h)) for h in hs])
        if r.min() > 1e-10:
            return float(np.polyfit(np.log(hs), np.log(r), 1)[0])
    return None


def test_criterion_04_poisson_axioms(acceptance_line):
    c = Criterion(4, "Poisson axioms")
    c.below("antisymmetry 1", C.antisymmetry(gen(4, 1), M, N, TRIALS), 1e-13)
    c.below("antisymmetry 2", C.antisymmetry(gen(4, 2), M, N, TRIALS, which=BRACKET2), 1e-13)
    c.below("Leibniz 1", C.leibniz(gen(4, 3), M, N, TRIALS), 1e-9)
    c.below("Leibniz 2", C.leibniz(gen(4, 4), M, N, TRIALS, which=BRACKET2), 1e-9)
    c.below("Jacobi 1 (GL)", C.jacobi(gen(4, 5), M, N, TRIALS), 1e-5)
    c.below("Jacobi 1 (SL)", C.jacobi(gen(4, 6), M, N, TRIALS, normalization=SL), 1e-5)
    c.below("Jacobi 2", C.jacobi(gen(4, 7), M, N, TRIALS, which=BRACKET2), 1e-5)
    c.below("Jacobi 1+2", C.compatibility(gen(4, 8), M, N, TRIALS), 1e-5)
    summed = lambda F, G, s: bracket1(F, G, s) + bracket2(F, G, s)
    for label, which, part in (("1", BRACKET1, 9), ("1+2", summed, 10)):
        slope = _sweep_slope(which, gen(4, part))
        if slope is None:
            c.holds(f"h-sweep {label} above roundoff", False)
        else:
            c.near(f"h-sweep slope {label}", slope, 2.0, 0.1)
    c.finish(acceptance_line)


def test_criterion_05_pencil(acceptance_line):
    c = Criterion(5, "pencil")
    c.below("affine in lambda, push-forward = combination", C.pencil_affine(gen(5), M, N, TRIALS), 1e-9)
    c.below("lambda^-2, lambda^-1 coefficients", C.pencil_negative_powers(gen(5, 1), M, N, TRIALS), 1e-9)
    c.finish(acceptance_line)


def test_criterion_06_involutivity(acceptance_line):
    c = Criterion(6, "hierarchy involutivity")
    c.below("{F_p,F_s}_1, p,s in 1,2,4,5", C.involutivity(gen(6), M, N, TRIALS), 1e-9)
    c.below("{F_p,F_s}_2", C.involutivity(gen(6, 1), M, N, TRIALS, which=BRACKET2), 1e-9)
    c.below("bracket-2 fields of F_1, F_2", C.bracket2_kernel(gen(6, 2), M, N, TRIALS), 1e-12)
    c.finish(acceptance_line)


def test_criterion_07_geometry(acceptance_line):
    c = Criterion(7, "polygon geometry")
    c.below("determinant relation", C.determinant_relation(gen(7), M, N, TRIALS), 1e-10)
    c.below("omega_2 double sum vs bracket 2", C.omega2_closed(gen(7, 1), M, N, TRIALS), 1e-10)
    c.below("omega_2 geometric vs double sum", C.omega2_oracle(gen(7, 2), M, N, TRIALS), 1e-4)
    c.below("omega_1 geometric vs bracket 1, sign (-1)^m", C.omega1_oracle(gen(7, 3), M, N, TRIALS), 1e-4)
    c.below("Q first row", C.q_first_row(gen(7, 4), M, N, TRIALS), 1e-8)
    c.below("round trip", C.round_trip(gen(7, 5), M, N, TRIALS), 1e-10)
    c.finish(acceptance_line)


def test_criterion_08_lifts(acceptance_line):
    c = Criterion(8, "lift consistency")
    c.below("Y^F induced vs bracket-1 field", C.lift_consistency(gen(8), M, N, TRIALS), 1e-6)
    c.below("X^{F_s} induced vs bracket-1 field", C.hierarchy_lift(gen(8, 1), M, N, TRIALS), 1e-6)
    c.finish(acceptance_line)


def test_criterion_09_flows(acceptance_line):
    c = Criterion(9, "flows")
    c.below("Boussinesq b1 vs b2, T=1, dt=1e-3", C.boussinesq_agreement(SEED, M, N, dt=1e-3, T=1.0), 1e-8)
    c.below("F_2 drift on F_1 flow, 1000 x 1e-3", C.hierarchy_drift(SEED, M, N, dt=1e-3, steps=1000), 1e-8)
    order, _ = C.hierarchy_order(SEED, M, N)
    c.near("convergence order", order, 4.0, 0.2)
    c.finish(acceptance_line)


def test_criterion_10_determinism(acceptance_line):
    c = Criterion(10, "determinism")
    first = verify_suite(SEED, [(M, N)]).dumps()
    second = verify_suite(SEED, [(M, N)]).dumps()
    c.holds("verification reports byte-identical", first == second)
    cfg = FlowConfig(M, N, SL, seed=SEED, hamiltonian=HamiltonianSpec("F_s", 1), dt=1e-2, steps=20)
    c.holds("trajectories byte-identical", integrate_flow(cfg).to_csv() == integrate_flow(replace(cfg)).to_csv())
    c.finish(acceptance_line)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
