"""Command-line front end: eval, certify, optimize, scan, simulate.

Exit codes: 0 success, 2 game parameters outside the feasible region,
3 malformed input, 4 signaling behavior, 5 solver failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from . import bell, game, montecarlo, optimize, quantum
from .errors import (
    DimensionMismatch,
    DomainError,
    EmptyRegion,
    InvalidParams,
    NotAProbabilityTable,
    SignalingInput,
    SolverError,
)

EXIT_OK = 0
EXIT_INVALID_GAME = 2
EXIT_MALFORMED = 3
EXIT_SIGNALING = 4
EXIT_SOLVER = 5

PRESETS = ("uniform", "pr-box", "canonical-quantum", "deterministic:<f1f2>")


class InputError(Exception):
    """Unreadable or ill-formed input file or option."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_MALFORMED, f"{self.prog}: error: {message}\n")


def fmt(v: float) -> str:
    return f"{v:.9f}"


def _load_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise InputError(f"no such file: {path}") from None
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read {path}: {exc}") from None


def load_game(path: str) -> tuple[game.PayoffTable, game.TypePrior]:
    """Read a game config; the table is tilted when ``zeta`` is present and nonzero."""
    data = _load_json(path)
    if not isinstance(data, dict):
        raise InputError("game config must be a JSON object")
    unknown = set(data) - set(game.PARAM_NAMES) - {"zeta", "prior"}
    if unknown:
        raise InputError(f"unknown game config keys: {', '.join(sorted(unknown))}")
    try:
        params = game.VrpParams(*(float(data[k]) for k in game.PARAM_NAMES))
        zeta = float(data.get("zeta", 0.0))
        prior = game.TypePrior(data["prior"]) if "prior" in data else game.TypePrior.uniform()
    except KeyError as exc:
        raise InputError(f"game config is missing {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, InvalidParams):
            raise
        raise InputError(f"bad game config value: {exc}") from None
    if zeta < 0:
        raise InvalidParams(f"zeta must be nonnegative, got {zeta}")
    if zeta:
        return game.build_tilted_payoff_table(game.TiltedVrpParams(params, zeta)), prior
    return game.build_payoff_table(params), prior


def load_behavior(source: str) -> bell.Behavior:
    """Resolve a preset name or a JSON file holding a behavior or quantum strategy."""
    if source == "uniform":
        return bell.Behavior([[0.25] * 4] * 4)
    if source == "pr-box":
        return bell.pr_box()
    if source == "canonical-quantum":
        return quantum.behavior_from_quantum(quantum.canonical_chsh_strategy())
    if source.startswith("deterministic:"):
        try:
            return bell.DeterministicStrategy.from_code(source.split(":", 1)[1]).behavior()
        except DomainError as exc:
            raise InputError(str(exc)) from None
    data = _load_json(source)
    if isinstance(data, dict) and "table" in data:
        return bell.Behavior.from_json(data)
    if isinstance(data, dict) and "theta" in data:
        try:
            return quantum.behavior_from_quantum(quantum.QuantumStrategy.from_json(data))
        except DomainError as exc:
            raise InputError(str(exc)) from None
    raise InputError(f'{source}: expected a "table" behavior or a quantum strategy object')


def _write_json(path: str, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def cmd_eval(args) -> int:
    table, prior = load_game(args.game)
    b = load_behavior(args.behavior)
    print(f"earnings: {fmt(game.earnings(table, prior, b))}")
    base = table.base_params
    if prior.is_uniform:
        print(f"chsh: {fmt(bell.chsh_value(b))}")
        if table.zeta:
            tp = table.params
            print(f"tilted_chsh: {fmt(bell.tilted_value(b, tp.zeta))}")
            print(f"tilted_oracle: {fmt(game.tilted_earnings_oracle(tp, b))}")
            d = game.tilted_discrepancy(tp, b)
            print(f"scaled_closed_form: {fmt(d.scaled_form)}")
            if not d.agrees:
                print(
                    f"note: scaled closed form differs from trace form by {fmt(d.difference)} "
                    f"(coefficient {fmt(d.coefficient)} != 2)"
                )
        else:
            print(f"closed_form: {fmt(game.earnings_closed_form(base, b))}")
    if args.export_behavior:
        _write_json(args.export_behavior, b.to_json())
    return EXIT_OK


def cmd_certify(args) -> int:
    b = load_behavior(args.behavior)
    verdict = bell.certify_local(b)
    if verdict.is_local:
        print(f"Local, CHSH = {fmt(bell.chsh_value(b))}")
        model = bell.lhv_decomposition(b)
        for code, w in model.support().items():
            print(f"  weight {code}: {fmt(w)}")
    else:
        signs = ",".join(f"{s:+d}" for s in verdict.relabeling)
        print(f"Nonlocal, CHSH = {fmt(verdict.value)}")
        print(f"  witness relabeling ({signs}) on <11>,<12>,<21>,<22>")
    if args.export_behavior:
        _write_json(args.export_behavior, b.to_json())
    return EXIT_OK


def _settings(args) -> optimize.SearchSettings:
    try:
        return optimize.SearchSettings(grid_step=args.grid_step, refine_tol=args.refine_tol)
    except DomainError as exc:
        raise InputError(str(exc)) from None


def cmd_optimize(args) -> int:
    table, prior = load_game(args.game)
    try:
        classes = [optimize.StrategyClass(c.strip()) for c in args.classes.split(",") if c.strip()]
    except ValueError as exc:
        raise InputError(f"unknown strategy class: {exc}") from None
    results = optimize.optimize_all(table, prior, classes, _settings(args))
    for cls, res in results.items():
        print(f"{cls.value:<10} {fmt(res.value)}  chsh {fmt(res.bell_value)}  witness {json.dumps(res.witness_json(), sort_keys=True)}")
        for key in ("tsirelson_cap", "matched_state_value"):
            if key in res.diagnostics:
                print(f"{'':<10} {key}: {fmt(res.diagnostics[key])}")
    if args.out:
        _write_json(args.out, {cls.value: res.to_json() for cls, res in results.items()})
    return EXIT_OK


def cmd_scan(args) -> int:
    data = _load_json(args.region)
    if not isinstance(data, dict):
        raise InputError("region must be a JSON object")
    try:
        axes, zetas = optimize.parse_region(data)
        if args.zeta:
            zetas = [float(z) for z in args.zeta.split(",")]
    except (DomainError, ValueError, TypeError) as exc:
        raise InputError(f"bad region: {exc}") from None
    result = optimize.advantage_scan(axes, zetas, _settings(args), args.workers)
    with open(args.out, "w", newline="") as fh:
        optimize.write_scan_csv(result, fh)
    print(f"rows: {len(result.rows)}  skipped invalid points: {result.skipped}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    table, prior = load_game(args.game)
    b = load_behavior(args.behavior)
    if args.rounds < 1:
        raise InputError("--rounds must be >= 1")
    out = montecarlo.simulate_rounds(table, prior, b, args.rounds, args.seed, args.workers, keep_log=bool(args.log))
    report, log = out if args.log else (out, None)
    Path(args.out).write_text(report.dumps())
    if log is not None:
        with open(args.log, "w", newline="") as fh:
            montecarlo.write_round_log(log, fh)
    print(f"empirical_mean: {fmt(report.empirical_mean)}")
    print(f"analytic_mean: {fmt(report.analytic_mean)}")
    print(f"std_error: {fmt(report.std_error)}")
    print(f"z_score: {fmt(report.z_score)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nonlocal-vrp", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    behavior_help = f"preset ({', '.join(PRESETS)}) or JSON file"

    p = sub.add_parser("eval", help="expected earnings of a game under a behavior")
    p.add_argument("--game", required=True)
    p.add_argument("--behavior", required=True, help=behavior_help)
    p.add_argument("--export-behavior", metavar="PATH")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("certify", help="local/nonlocal verdict for a behavior")
    p.add_argument("--behavior", required=True, help=behavior_help)
    p.add_argument("--export-behavior", metavar="PATH")
    p.set_defaults(func=cmd_certify)

    def search_opts(p):
        p.add_argument("--grid-step", type=float, default=math.pi / 24)
        p.add_argument("--refine-tol", type=float, default=1e-6)

    p = sub.add_parser("optimize", help="classical / quantum / no-signaling optima")
    p.add_argument("--game", required=True)
    p.add_argument("--classes", default="classical,quantum,ns")
    p.add_argument("--out", metavar="PATH", help="write outcomes (with witness behaviors) as JSON")
    search_opts(p)
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("scan", help="quantum advantage over a parameter grid")
    p.add_argument("--region", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--zeta", help="comma-separated zeta list, overrides the region file")
    p.add_argument("--workers", type=int)
    search_opts(p)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("simulate", help="Monte Carlo delivery rounds")
    p.add_argument("--game", required=True)
    p.add_argument("--behavior", required=True, help=behavior_help)
    p.add_argument("--rounds", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--log", metavar="PATH", help="per-round CSV log")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (InvalidParams, EmptyRegion) as exc:
        print(f"error: invalid game parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID_GAME
    except SignalingInput as exc:
        print(f"error: signaling behavior: {exc}", file=sys.stderr)
        return EXIT_SIGNALING
    except (InputError, NotAProbabilityTable, DimensionMismatch, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    except SolverError as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
