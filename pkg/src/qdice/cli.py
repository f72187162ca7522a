"""Command-line front end.

Subcommands: ``simulate`` (Monte Carlo over one flip or a dice ladder),
``cheat`` (closed-form and brute-force cheat values), ``solve`` (fairness
optimizations) and ``bound-check`` (ladder bias composition). Every command
emits one structured report with the top-level keys
{version, inputs, analytic, monte_carlo, bounds}; sections that do not
apply are null. Reports are deterministic for a fixed configuration and
seed. Exit codes: 0 success, 2 validation error, 3 solver/bracketing error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from typing import Sequence

from . import __version__, adversary, dicer, fairness
from .errors import BracketError, ParameterError, QdiceError
from .wcf import (
    AliceDelta,
    AliceGeneral,
    BobClaimWin,
    CheatSpec,
    Honest,
    ProtocolParams,
    honest_win_prob,
    run_trials,
)

CHEAT_CHOICES = ("honest", "alice-delta", "alice-general", "bob-claim-win")
SOLVE_TARGETS = ("balanced", "dice3-case1", "dice3-case2")

EXIT_OK = 0
EXIT_IO = 1
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def _parse_complex_list(text: str) -> tuple[complex, ...]:
    try:
        return tuple(complex(part) for part in text.split(","))
    except ValueError as exc:
        raise ParameterError(f"cannot parse complex list {text!r}: {exc}")


def _parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ParameterError(f"cannot parse number list {text!r}: {exc}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qdice",
        description="Weak imbalanced coin flipping and N-sided dice rolling toolkit",
    )
    parser.add_argument("--version", action="version", version=f"qdice {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--format", choices=("json", "csv"), default="json")
        p.add_argument("--out", metavar="PATH", help="write the report here instead of stdout")
        p.add_argument("--config", metavar="PATH", help="JSON file with defaults for any flag")

    sim = sub.add_parser("simulate", help="Monte Carlo protocol runs")
    sim.add_argument("--p", type=float, help="responder's honest winning probability")
    sim.add_argument("--eta", type=float, help="protocol security parameter")
    sim.add_argument("--cheat", choices=CHEAT_CHOICES)
    sim.add_argument("--delta", type=float, help="tilt for --cheat alice-delta")
    sim.add_argument("--alphas", help="comma-separated uu,ud,du,dd amplitudes for alice-general")
    sim.add_argument("--dice", type=int, metavar="N", help="simulate the N-party ladder instead")
    sim.add_argument("--honest", action="store_true", help="all ladder parties play honestly")
    sim.add_argument("--honest-party", type=int, help="sole honest party; the rest collude")
    sim.add_argument("--case", type=int, choices=(1, 2), help="stage-two layout for --dice 3")
    sim.add_argument("--trials", type=int)
    sim.add_argument("--seed", type=int)
    add_common(sim)

    cheat = sub.add_parser("cheat", help="optimal cheating probabilities")
    cheat.add_argument("--p", type=float)
    cheat.add_argument("--eta", type=float)
    cheat.add_argument("--grid", type=int, help="delta grid points for the oracle")
    cheat.add_argument("--samples", type=int, help="random preparations for the oracle")
    cheat.add_argument("--ancilla-dim", type=int, choices=(1, 2))
    cheat.add_argument("--seed", type=int)
    add_common(cheat)

    solve = sub.add_parser("solve", help="fairness optimizations")
    solve.add_argument("target", choices=SOLVE_TARGETS)
    solve.add_argument("--bracket", help="override bracket as lo,hi")
    add_common(solve)

    bound = sub.add_parser("bound-check", help="ladder bias composition bound")
    bound.add_argument("--dice", type=int, metavar="N")
    bound.add_argument("--party", type=int)
    bound.add_argument("--biases", help="comma-separated per-stage biases")
    add_common(bound)

    return parser


#: hard defaults, filled in only after an optional config file was applied so
#: that config values beat defaults while explicit flags beat both
_DEFAULTS = {
    "cheat": "honest",
    "case": 1,
    "trials": 10_000,
    "seed": 0,
    "grid": 10_000,
    "samples": 2_000,
    "ancilla_dim": 1,
}


def _apply_config(args: argparse.Namespace) -> None:
    if getattr(args, "config", None):
        with open(args.config) as handle:
            overrides = json.load(handle)
        if not isinstance(overrides, dict):
            raise ParameterError("config file must hold a JSON object")
        for key, value in overrides.items():
            attr = key.replace("-", "_")
            if not hasattr(args, attr):
                raise ParameterError(f"unknown config key {key!r}")
            if getattr(args, attr) in (None, False):
                setattr(args, attr, value)
    for attr, value in _DEFAULTS.items():
        if getattr(args, attr, None) is None and hasattr(args, attr):
            setattr(args, attr, value)
    seed = getattr(args, "seed", 0)
    if not 0 <= seed < 2**64:
        raise ParameterError(f"seed must be an unsigned 64-bit value, got {seed}")


def _require(args: argparse.Namespace, *names: str) -> None:
    for name in names:
        if getattr(args, name) is None:
            raise ParameterError(f"--{name.replace('_', '-')} is required (flag or config file)")


def _base_report(inputs: dict) -> dict:
    return {
        "version": f"qdice {__version__}",
        "inputs": inputs,
        "analytic": None,
        "monte_carlo": None,
        "bounds": None,
    }


def _cheat_spec(args: argparse.Namespace) -> CheatSpec:
    if args.cheat == "honest":
        return Honest()
    if args.cheat == "bob-claim-win":
        return BobClaimWin()
    if args.cheat == "alice-delta":
        if args.delta is None:
            raise ParameterError("--cheat alice-delta requires --delta")
        return AliceDelta(args.delta)
    if args.alphas is None:
        raise ParameterError("--cheat alice-general requires --alphas uu,ud,du,dd")
    return AliceGeneral(_parse_complex_list(args.alphas))


def _analytic_cheat_win(params: ProtocolParams, cheat: CheatSpec) -> float | None:
    """Expected winning probability of the declared cheater, if any."""
    if isinstance(cheat, AliceDelta):
        return adversary.alice_value_at_delta(params, cheat.delta)
    if isinstance(cheat, AliceGeneral):
        return adversary.general_cheat_value(params, cheat)
    if isinstance(cheat, BobClaimWin):
        return adversary.bob_optimal_value(params).value
    return None


def _cmd_simulate_flip(args: argparse.Namespace) -> dict:
    if args.p is None or args.eta is None:
        raise ParameterError("simulate needs --p and --eta (or --dice N)")
    params = ProtocolParams(args.p, args.eta)
    cheat = _cheat_spec(args)
    stats = run_trials(params, cheat, args.trials, args.seed)
    report = _base_report(
        {
            "command": "simulate",
            "p": params.p,
            "eta": params.eta,
            "cheat": cheat.name,
            "delta": getattr(cheat, "delta", None),
            "alphas": args.alphas,
            "trials": args.trials,
            "seed": args.seed,
        }
    )
    report["analytic"] = {
        "honest_alice": honest_win_prob(params),
        "honest_bob": params.p,
        "cheater_win": _analytic_cheat_win(params, cheat),
    }
    report["monte_carlo"] = stats.to_dict()
    return report


def _cmd_simulate_dice(args: argparse.Namespace) -> dict:
    n = args.dice
    if args.honest_party is not None and args.honest:
        raise ParameterError("--honest and --honest-party are mutually exclusive")
    if n == 3:
        spec = dicer.LadderSpec.three_sided(case=args.case)
    else:
        spec = dicer.LadderSpec.uniform(n, eta=0.0)
    coalition = None
    if args.honest_party is not None:
        coalition = dicer.Coalition(honest_party=args.honest_party)
    report_obj = dicer.simulate_dice(spec, args.trials, args.seed, coalition=coalition)
    report = _base_report(
        {
            "command": "simulate",
            "dice": n,
            "case": args.case if n == 3 else None,
            "honest_party": args.honest_party,
            "trials": args.trials,
            "seed": args.seed,
        }
    )
    analytic: dict = {"honest_probs": [float(f) for f in report_obj.honest_probs]}
    if coalition is not None:
        analytic["expected_honest_losing"] = dicer.expected_coalition_losing(spec, coalition)
    report["analytic"] = analytic
    frequencies = report_obj.frequencies()
    report["monte_carlo"] = {
        "trials": report_obj.trials,
        "seed": args.seed,
        "counts": {str(i + 1): c for i, c in enumerate(report_obj.win_counts)},
        "frequencies": {str(i + 1): f for i, f in enumerate(frequencies)},
        "standard_errors": {
            str(i + 1): (f * (1 - f) / report_obj.trials) ** 0.5 for i, f in enumerate(frequencies)
        },
        "stage_aborts": report_obj.stage_aborts,
    }
    return report


def _cmd_cheat(args: argparse.Namespace) -> dict:
    _require(args, "p", "eta")
    params = ProtocolParams(args.p, args.eta)
    closed = adversary.alice_optimal_value(params)
    oracle = adversary.brute_force_alice(
        params,
        grid_points=args.grid,
        ancilla_dim=args.ancilla_dim,
        random_samples=args.samples,
        seed=args.seed,
    )
    report = _base_report(
        {
            "command": "cheat",
            "p": params.p,
            "eta": params.eta,
            "grid": args.grid,
            "samples": args.samples,
            "ancilla_dim": args.ancilla_dim,
            "seed": args.seed,
        }
    )
    report["analytic"] = {
        "honest_alice": honest_win_prob(params),
        "honest_bob": params.p,
        "alice_optimal": closed.value,
        "alice_delta_star": closed.optimizer,
        "alice_brute_force": oracle.value,
        "bob_optimal": adversary.bob_optimal_value(params).value,
    }
    return report


def _cmd_solve(args: argparse.Namespace) -> dict:
    bracket = None
    if args.bracket:
        parts = _parse_float_list(args.bracket)
        if len(parts) != 2:
            raise ParameterError("--bracket expects lo,hi")
        bracket = (parts[0], parts[1])
    report = _base_report({"command": "solve", "target": args.target, "bracket": list(bracket) if bracket else None})
    if args.target == "balanced":
        solution = fairness.solve_balanced(bracket or fairness.BALANCED_BRACKET)
        report["analytic"] = {
            "eta_star": solution.eta_star,
            "alice_optimal": solution.achieved_values[0],
            "bob_optimal": solution.achieved_values[1],
            "residual": solution.residual,
            "bias": solution.achieved_values[0] - 0.5,
        }
    else:
        case = 1 if args.target.endswith("case1") else 2
        optimum = dicer.optimize_three_sided(case, bracket=bracket)
        report["analytic"] = {
            "eta_star": optimum.eta_star,
            "worst_case": optimum.worst_case,
            "bias": optimum.bias,
            "residual": optimum.solution.residual,
            "per_party_losing": list(optimum.report.worst_case_losing),
        }
        report["bounds"] = {
            "epsilon": max(optimum.report.biases),
            "bound": optimum.report.bound,
            "holds": optimum.report.bound_holds,
        }
    return report


def _cmd_bound_check(args: argparse.Namespace) -> dict:
    _require(args, "dice", "party", "biases")
    biases = _parse_float_list(args.biases)
    check = dicer.bias_bound_check(args.party, args.dice, biases)
    losing = dicer.worst_case_losing_prob(args.party, args.dice, biases)
    report = _base_report(
        {
            "command": "bound-check",
            "dice": args.dice,
            "party": args.party,
            "biases": list(biases),
        }
    )
    report["analytic"] = {"worst_case_losing": losing}
    report["bounds"] = {"epsilon": check.epsilon, "bound": check.bound, "holds": check.holds}
    return report


def _render_csv(report: dict) -> str:
    mc = report.get("monte_carlo")
    if not mc:
        raise ParameterError("csv output is only available for reports with a Monte Carlo section")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["outcome", "count", "frequency", "standard_error"])
    for key in sorted(mc["counts"]):
        writer.writerow(
            [key, mc["counts"][key], mc["frequencies"][key], mc["standard_errors"][key]]
        )
    return buffer.getvalue()


def _round_floats(node):
    """Print probabilities (and every other float) at 7 significant digits."""
    if isinstance(node, dict):
        return {key: _round_floats(value) for key, value in node.items()}
    if isinstance(node, list):
        return [_round_floats(value) for value in node]
    if isinstance(node, float) and not isinstance(node, bool) and math.isfinite(node):
        return float(f"{node:.7g}")
    return node


def _emit(report: dict, args: argparse.Namespace) -> None:
    report = _round_floats(report)
    if args.format == "csv":
        text = _render_csv(report)
    else:
        text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _apply_config(args)
        if args.command == "simulate":
            report = _cmd_simulate_dice(args) if args.dice else _cmd_simulate_flip(args)
        elif args.command == "cheat":
            report = _cmd_cheat(args)
        elif args.command == "solve":
            report = _cmd_solve(args)
        else:
            report = _cmd_bound_check(args)
        _emit(report, args)
    except BracketError as exc:
        print(f"qdice: solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ParameterError, QdiceError) as exc:
        print(f"qdice: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"qdice: i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
