# ===================================================================================
# Project: Unsharp
# File: app/cli.py
# Description: This file contains the command-line front end. It parses JSON inputs, dispatches to the library
#              (through the graphs for jm-check and seq-scan) and emits JSON or CSV.
#              Exit codes: 0 success, 2 input error, 3 numerical failure.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

import os
import sys
import argparse
import asyncio
from typing import Any, Callable, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

# Dynamically add the project root directory to sys.path
current_file_path = os.path.abspath(__file__)
project_root = os.path.abspath(os.path.join(current_file_path, "../.."))
if project_root not in sys.path:
    sys.path.append(project_root)

from logger import logging
from config import settings
from app.core.exceptions import InvalidOperatorError, OracleConvergenceError
from app.core.operators import (
    DensityOperator,
    DiscretePOM,
    Effect,
    QubitEffect,
    density_from_bloch,
    matrix_to_qubit_effect,
    qubit_effect_to_matrix,
    trace_distance,
)
from app.core.utils import (
    classical_state_from_json,
    dump_csv,
    dump_json,
    load_json_input,
    matrix_from_json,
    matrix_to_json,
    qubit_effect_from_json,
    region_from_json,
)
from app.graphs.jm_checker import create_jm_checker_graph
from app.graphs.seq_scanner import create_seq_scanner_graph
from app.graphs.states import JMCheckState, SeqScanState
from app.measurement.classical import (
    ICObservable,
    barycenter,
    duality_check,
    embed,
    misra_reduce,
    reconstruct,
    surjectivity_witness,
    tetrahedral_observable,
)
from app.measurement.joint import jm_closed_form, jm_oracle
from app.measurement.sphere import covariant_effect, monte_carlo_effect

EXIT_OK = 0
EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3

SUBCOMMANDS = ("jm-check", "jm-scan", "oracle", "spin-pom", "seq-scan", "tomo", "classical")
TABLE_COMMANDS = ("jm-scan", "seq-scan")


class CommandFailure(Exception):
    """A graph ended in its error node."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


class CommandSpec(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    subcommand: Literal["jm-check", "jm-scan", "oracle", "spin-pom", "seq-scan", "tomo", "classical"]
    input: str = "-"
    output: str = "-"
    seed: int = Field(default=settings.DEFAULT_SEED, ge=0)
    format: Literal["json", "csv"] = "json"


# --- Helper Functions ---
def _linspace(grid: Any, name: str) -> np.ndarray:
    if not isinstance(grid, dict) or not {"start", "stop", "num"} <= set(grid):
        raise InvalidOperatorError(f"'{name}' must look like {{\"start\": .., \"stop\": .., \"num\": ..}}")
    num = int(grid["num"])
    if num < 1:
        raise InvalidOperatorError(f"'{name}' range is empty")
    return np.linspace(float(grid["start"]), float(grid["stop"]), num)


def _observable(payload: Dict[str, Any]) -> ICObservable:
    """Tetrahedral observable unless the payload lists its own effects under 'observable'."""
    if "observable" not in payload:
        return tetrahedral_observable()
    effects = tuple(qubit_effect_to_matrix(qubit_effect_from_json(e)) for e in payload["observable"])
    return ICObservable.from_pom(DiscretePOM(outcomes=tuple(range(1, len(effects) + 1)), effects=effects))


def _require_dict(payload: Any) -> Dict[str, Any]:
    if not isinstance(payload, dict):
        raise InvalidOperatorError("Input must be a JSON object")
    return payload


def _qubit_json(q: QubitEffect) -> Dict[str, Any]:
    return {"a0": q.a0, "a": q.a.tolist()}


# --- Subcommands ---
def jm_check_cmd(payload: Any, command: CommandSpec) -> str:
    result = asyncio.run(create_jm_checker_graph().ainvoke(JMCheckState(payload=payload)))
    if result.get("error"):
        raise CommandFailure(result["error"], result.get("exit_code", EXIT_INPUT_ERROR))
    output = dict(result["report"])
    output["oracle_verdict"] = result["oracle_verdict"]
    output["oracle_candidate"] = result["oracle_candidate"]
    output["agreement"] = result["agreement"]
    return dump_json(output)


def jm_scan_cmd(payload: Any, command: CommandSpec) -> str:
    payload = _require_dict(payload)
    a_lengths = _linspace(payload.get("a"), "a")
    b_lengths = _linspace(payload.get("b"), "b")
    angles = _linspace(payload.get("angle_deg"), "angle_deg")

    rows = []
    for a_len in a_lengths:
        for b_len in b_lengths:
            for angle in angles:
                theta = np.deg2rad(angle)
                qa = QubitEffect(a0=0.5, a=[0.0, 0.0, a_len])
                qb = QubitEffect(a0=0.5, a=[b_len * np.sin(theta), 0.0, b_len * np.cos(theta)])
                report = jm_closed_form(qa, qb)
                rows.append([float(a_len), float(b_len), float(angle), report.margin, report.verdict])
    header = ["a", "b", "angle_deg", "margin", "verdict"]
    if command.format == "json":
        return dump_json([dict(zip(header, row)) for row in rows])
    return dump_csv(header, rows)


def oracle_cmd(payload: Any, command: CommandSpec) -> str:
    payload = _require_dict(payload)
    if "a" not in payload or "b" not in payload:
        raise InvalidOperatorError('Input must look like {"a": {...}, "b": {...}}')
    verdict, candidate = jm_oracle(qubit_effect_from_json(payload["a"]), qubit_effect_from_json(payload["b"]))
    return dump_json({
        "verdict": verdict,
        "g0": candidate.g0,
        "g": candidate.g.tolist(),
        "max_violation": candidate.max_violation,
        "objective": candidate.objective,
    })


def spin_pom_cmd(payload: Any, command: CommandSpec) -> str:
    payload = _require_dict(payload)
    region = region_from_json(payload)
    effect = covariant_effect(region)
    estimate, stderr = monte_carlo_effect(region, samples=payload.get("samples"), seed=command.seed)
    exact = matrix_to_qubit_effect(effect)
    sampled = matrix_to_qubit_effect(estimate)
    return dump_json({
        "effect": matrix_to_json(effect.matrix),
        **_qubit_json(exact),
        "monte_carlo": {**_qubit_json(sampled), "stderr": stderr.tolist(), "seed": command.seed},
    })


def seq_scan_cmd(payload: Any, command: CommandSpec) -> str:
    payload = _require_dict(payload)
    state = SeqScanState(n=payload.get("n", []), m=payload.get("m", []), lambdas=payload.get("lambdas", []))
    result = asyncio.run(create_seq_scanner_graph().ainvoke(state))
    if result.get("error"):
        raise CommandFailure(result["error"], result.get("exit_code", EXIT_INPUT_ERROR))
    header = ["lambda", "first_acc", "second_acc", "jm_sum"]
    rows = [[row["sharpness"], row["first_acc"], row["second_acc"], row["jm_sum"]] for row in result["table"]]
    if command.format == "json":
        return dump_json([dict(zip(header, row)) for row in rows])
    return dump_csv(header, rows)


def tomo_cmd(payload: Any, command: CommandSpec) -> str:
    payload = _require_dict(payload)
    observable = _observable(payload)
    if "p" in payload:
        rho = reconstruct(payload["p"], observable)
        return dump_json({"rho": matrix_to_json(rho.matrix), "bloch": rho.bloch_vector().tolist()})

    if "rho" in payload:
        rho = DensityOperator(matrix=matrix_from_json(payload["rho"]))
    elif "bloch" in payload:
        rho = density_from_bloch(payload["bloch"])
    else:
        raise InvalidOperatorError("tomo input needs 'rho', 'bloch' or 'p'")
    p = embed(rho, observable)
    rebuilt = reconstruct(p, observable)
    return dump_json({
        "p": p.tolist(),
        "reconstructed": matrix_to_json(rebuilt.matrix),
        "trace_distance": trace_distance(rho, rebuilt),
    })


def classical_cmd(payload: Any, command: CommandSpec) -> str:
    payload = _require_dict(payload)
    if "state" not in payload and "witness" not in payload:
        raise InvalidOperatorError("classical input needs 'state' and/or 'witness'")
    output: Dict[str, Any] = {}
    if "state" in payload:
        mu = classical_state_from_json(payload["state"])
        rho = misra_reduce(mu)
        output["rho"] = matrix_to_json(rho.matrix)
        output["bloch"] = barycenter(mu).tolist()
        if "effect" in payload:
            lhs, rhs = duality_check(mu, qubit_effect_to_matrix(qubit_effect_from_json(payload["effect"])))
            output["duality"] = {"lhs": lhs, "rhs": rhs}
    if "witness" in payload:
        target: Effect = qubit_effect_to_matrix(qubit_effect_from_json(payload["witness"]))
        witness = surjectivity_witness(target, _observable(payload))
        output["witness"] = {"f": witness.f.tolist(), "proper": witness.proper, "violated": witness.violated}
    return dump_json(output)


HANDLERS: Dict[str, Callable[[Any, CommandSpec], str]] = {
    "jm-check": jm_check_cmd,
    "jm-scan": jm_scan_cmd,
    "oracle": oracle_cmd,
    "spin-pom": spin_pom_cmd,
    "seq-scan": seq_scan_cmd,
    "tomo": tomo_cmd,
    "classical": classical_cmd,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="unsharp",
        description="Joint measurability, fuzzy spin observables, sequential disturbance and classical representations of qubit measurements.",
    )
    subparsers = parser.add_subparsers(dest="subcommand", required=True)
    for name in SUBCOMMANDS:
        sub = subparsers.add_parser(name)
        sub.add_argument("-i", "--input", default="-", help="JSON file, inline JSON, or '-' for stdin")
        sub.add_argument("-o", "--output", default="-", help="output file or '-' for stdout")
        sub.add_argument("--seed", type=int, default=settings.DEFAULT_SEED, help="RNG seed (UNSHARP_SEED overrides)")
        sub.add_argument(
            "--format",
            choices=("json", "csv"),
            default="csv" if name in TABLE_COMMANDS else "json",
        )
    return parser


def run(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, run one subcommand and return the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT_ERROR if e.code else EXIT_OK

    try:
        seed = os.getenv(settings.SEED_ENV_VAR)
        command = CommandSpec(
            subcommand=args.subcommand,
            input=args.input,
            output=args.output,
            seed=int(seed) if seed is not None else args.seed,
            format=args.format,
        )
        if command.format == "csv" and command.subcommand not in TABLE_COMMANDS:
            raise InvalidOperatorError(f"{command.subcommand} only emits JSON")
        payload = load_json_input(command.input)
        logging.info(f"Running {command.subcommand} (seed {command.seed}, format {command.format})")
        text = HANDLERS[command.subcommand](payload, command)
    except CommandFailure as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OracleConvergenceError as e:
        logging.error(f"Numerical failure in {args.subcommand}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL_ERROR
    except (ValueError, KeyError, TypeError, OSError) as e:
        logging.error(f"Input error in {args.subcommand}: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    if command.output == "-":
        sys.stdout.write(text)
    else:
        with open(command.output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
