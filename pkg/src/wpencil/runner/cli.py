"""Command line: ``wpencil verify | flow | bracket | root | polygon | invariants``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ..brackets import BracketId, bracket
from ..errors import WPencilError
from ..functionals import Functional, coordinate_sum
from ..operators import frac_power, from_invariants
from ..polygons import TwistedPolygon, invariants_from_polygon, reconstruct
from ..state import GL, SL, InvariantState
from .flows import FlowConfig, HamiltonianSpec, conservation_report, integrate_flow, monitors_for
from .verify import DEFAULT_SIZES, verify_suite


def _read_json(path: str) -> dict:
    return json.loads(Path(path).read_text())


def _write(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text if text.endswith("\n") else text + "\n")
    else:
        Path(out).write_text(text)


def parse_sizes(text: str) -> list[tuple[int, int]]:
    """``'3:4,3:5'`` -> ``[(3, 4), (3, 5)]``."""
    sizes = []
    for item in text.split(","):
        m, N = item.strip().split(":")
        sizes.append((int(m), int(N)))
    return sizes


def state_from_config(obj: dict) -> InvariantState:
    """Explicit coefficients (``a`` table or ``initial`` array) or a seeded random state."""
    norm = obj.get("normalization", SL)
    m = int(obj["m"])
    if "a" in obj:
        return InvariantState.from_json({**obj, "normalization": norm})
    if isinstance(obj.get("initial"), dict):
        return InvariantState.from_json({"m": m, "normalization": norm, **obj["initial"]})
    if obj.get("initial") is not None:
        return InvariantState(m, np.asarray(obj["initial"], dtype=float), norm)
    rng = np.random.default_rng(int(obj.get("seed", 0)))
    a1 = tuple(obj["a1_range"]) if obj.get("a1_range") else None
    return InvariantState.random(m, int(obj["N"]), rng, norm, float(obj.get("low", -1.0)),
                                 float(obj.get("high", 1.0)), a1_range=a1)


def parse_functional(text: str) -> Functional:
    """``F_s``, ``boussinesq``, ``sum:a<r>``, inline JSON or ``@file.json`` (custom monomials)."""
    text = text.strip()
    if text.startswith("sum:a"):
        return coordinate_sum(int(text[5:]))
    if text.startswith("@"):
        return HamiltonianSpec.from_json(_read_json(text[1:])).build()
    if text.startswith("{"):
        return HamiltonianSpec.from_json(json.loads(text)).build()
    return HamiltonianSpec.parse(text).build()


def _number(x) -> float | list[float]:
    x = complex(x)
    return x.real if abs(x.imag) <= 1e-14 * max(1.0, abs(x)) else [x.real, x.imag]


# -- subcommands ---------------------------------------------------------------

def cmd_verify(args) -> int:
    sizes = parse_sizes(args.sizes) if args.sizes else list(DEFAULT_SIZES)
    report = verify_suite(args.seed, sizes)
    _write(report.dumps(), args.out)
    if args.out not in (None, "-"):
        print(json.dumps(report.summary()))
    return 0 if report.ok else 1


def cmd_flow(args) -> int:
    cfg = FlowConfig.from_json(_read_json(args.config))
    traj = integrate_flow(cfg)
    _write(traj.to_csv(), args.out)
    drifts = conservation_report(traj, monitors_for(cfg))
    text = json.dumps({"steps": cfg.steps, "dt": cfg.dt, "drifts": drifts}, indent=2, sort_keys=True)
    if args.report:
        Path(args.report).write_text(text)
    elif args.out not in (None, "-"):
        print(text)
    return 0


def cmd_bracket(args) -> int:
    state = state_from_config(_read_json(args.config))
    which = BracketId.parse(args.which)
    value = bracket(parse_functional(args.f), parse_functional(args.g), state, which)
    print(json.dumps({"which": str(which), "f": args.f, "g": args.g, "value": _number(value)}))
    return 0


def cmd_root(args) -> int:
    state = state_from_config(_read_json(args.config))
    field = "real" if state.m % 2 else "complex"
    P = frac_power(from_invariants(state), args.s, state.m, args.depth, field=field)
    rows = {}
    for order in range(P.max_order, args.depth - 1, -1):
        row = P.row(order)
        rows[str(order)] = row.real.tolist() if not np.iscomplexobj(row) or np.abs(row.imag).max() < 1e-14 \
            else {"re": row.real.tolist(), "im": row.imag.tolist()}
    out = {"m": state.m, "N": state.N, "s": args.s, "certified_floor": P.floor, "field": field, "orders": rows}
    _write(json.dumps(out, indent=2), args.out)
    return 0


def cmd_polygon(args) -> int:
    state = state_from_config(_read_json(args.invariants))
    seed = None if args.seed_frame is None else np.asarray(json.loads(args.seed_frame), dtype=float)
    _write(json.dumps(reconstruct(state, seed).to_json(), indent=2), args.out)
    return 0


def cmd_invariants(args) -> int:
    poly = TwistedPolygon.from_json(_read_json(args.polygon))
    state = invariants_from_polygon(poly, args.normalization)
    _write(json.dumps(state.to_json(), indent=2), args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wpencil", description="Lattice operator brackets and their hierarchy flows.")
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the verification battery")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--sizes", help="comma-separated m:N pairs (default 2:3,3:4,3:5)")
    v.add_argument("--out", help="report path (default stdout)")
    v.set_defaults(func=cmd_verify)

    f = sub.add_parser("flow", help="integrate a Hamiltonian flow to CSV")
    f.add_argument("--config", required=True)
    f.add_argument("--out", help="trajectory CSV (default stdout)")
    f.add_argument("--report", help="write the drift table here")
    f.set_defaults(func=cmd_flow)

    b = sub.add_parser("bracket", help="evaluate a bracket at one state")
    b.add_argument("--config", required=True)
    b.add_argument("--f", required=True)
    b.add_argument("--g", required=True)
    b.add_argument("--which", default="1", help="1, 2 or pencil:<lambda>")
    b.set_defaults(func=cmd_bracket)

    r = sub.add_parser("root", help="coefficients of D^{s/m}")
    r.add_argument("--config", required=True)
    r.add_argument("--s", type=int, required=True)
    r.add_argument("--depth", type=int, default=-3, help="lowest order to certify")
    r.add_argument("--out")
    r.set_defaults(func=cmd_root)

    g = sub.add_parser("polygon", help="reconstruct a twisted polygon from invariants")
    g.add_argument("--invariants", required=True)
    g.add_argument("--seed-frame", help="JSON m x m matrix whose columns are the first vertices")
    g.add_argument("--out")
    g.set_defaults(func=cmd_polygon)

    i = sub.add_parser("invariants", help="extract invariants from a polygon")
    i.add_argument("--polygon", required=True)
    i.add_argument("--normalization", choices=(GL, SL), default=GL)
    i.add_argument("--out")
    i.set_defaults(func=cmd_invariants)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (WPencilError, ValueError, KeyError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
