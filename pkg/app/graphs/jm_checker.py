# ===================================================================================
# Project: Unsharp
# File: app/graphs/jm_checker.py
# Description: This file contains the implementation of the joint-measurability checker Graph: parse two qubit
#              effects, evaluate the closed-form coexistence inequality, run the feasibility oracle and compare.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

import os
import sys
import asyncio
from typing import Any, Dict, Literal, Optional
from langgraph.graph import StateGraph, START, END
from langchain_core.runnables import RunnableConfig

# Dynamically add the project root directory to sys.path
current_file_path = os.path.abspath(__file__)
project_root = os.path.abspath(os.path.join(current_file_path, "../../.."))
if project_root not in sys.path:
    sys.path.append(project_root)

from logger import logging
from app.core.exceptions import OracleConvergenceError
from app.core.utils import qubit_effect_from_json, qubit_effect_to_json
from app.graphs.states import JMCheckState
from app.measurement.joint import jm_closed_form, jm_oracle, verdicts_agree

EXIT_INPUT_ERROR = 2
EXIT_NUMERICAL_ERROR = 3


# Node: Parse the two effects
async def parse_effects(
    state: JMCheckState, *, config: Optional[RunnableConfig] = None
) -> Dict[str, Any]:
    payload = state.payload
    try:
        if not isinstance(payload, dict) or "a" not in payload or "b" not in payload:
            raise ValueError('Input must look like {"a": {"a0": .., "a": [..]}, "b": {"a0": .., "a": [..]}}')
        qa = qubit_effect_from_json(payload["a"])
        qb = qubit_effect_from_json(payload["b"])
    except ValueError as e:
        logging.error(f"Rejected jm-check input: {e}")
        return {"error": str(e), "exit_code": EXIT_INPUT_ERROR}

    logging.info(f"Parsed effects: A=({qa.a0}, {qa.a.tolist()}), B=({qb.a0}, {qb.a.tolist()})")
    return {"effect_a": qubit_effect_to_json(qa), "effect_b": qubit_effect_to_json(qb), "error": None}


# Node: Closed-form coexistence inequality
async def closed_form(
    state: JMCheckState, *, config: Optional[RunnableConfig] = None
) -> Dict[str, Any]:
    report = jm_closed_form(qubit_effect_from_json(state.effect_a), qubit_effect_from_json(state.effect_b))
    logging.info(f"Closed-form verdict {report.verdict} with margin {report.margin:.3e}")
    return {"report": report.model_dump()}


# Node: Feasibility oracle (blocking work runs in a thread)
async def run_oracle(
    state: JMCheckState, *, config: Optional[RunnableConfig] = None
) -> Dict[str, Any]:
    qa = qubit_effect_from_json(state.effect_a)
    qb = qubit_effect_from_json(state.effect_b)
    try:
        verdict, candidate = await asyncio.to_thread(jm_oracle, qa, qb)
    except OracleConvergenceError as e:
        logging.error(f"Oracle failed: {e}")
        return {"error": str(e), "exit_code": EXIT_NUMERICAL_ERROR}

    return {
        "oracle_verdict": verdict,
        "oracle_candidate": {
            "g0": candidate.g0,
            "g": candidate.g.tolist(),
            "max_violation": candidate.max_violation,
            "objective": candidate.objective,
        },
    }


# Node: Compare both verdicts (a Boundary verdict is inconclusive)
async def cross_check(
    state: JMCheckState, *, config: Optional[RunnableConfig] = None
) -> Dict[str, Any]:
    agreement = verdicts_agree(state.report["verdict"], state.oracle_verdict)
    if not agreement:
        logging.warning(f"Verdicts disagree: closed form {state.report['verdict']}, oracle {state.oracle_verdict}")
    return {"agreement": agreement}


async def end_with_error(
    state: JMCheckState, *, config: Optional[RunnableConfig] = None
) -> Dict[str, Any]:
    logging.error(f"jm-check ended with error (exit code {state.exit_code}): {state.error}")
    return {}


# Conditional functions
def check_parsed(state: JMCheckState) -> Literal["closed_form", "end_with_error"]:
    if state.error:
        return "end_with_error"
    return "closed_form"


def check_oracle(state: JMCheckState) -> Literal["cross_check", "end_with_error"]:
    if state.error:
        return "end_with_error"
    return "cross_check"


def create_jm_checker_graph():
    """Create and return the joint-measurability checker graph."""
    builder = StateGraph(JMCheckState)

    builder.add_node("parse_effects", parse_effects)
    builder.add_node("closed_form", closed_form)
    builder.add_node("run_oracle", run_oracle)
    builder.add_node("cross_check", cross_check)
    builder.add_node("end_with_error", end_with_error)

    builder.add_edge(START, "parse_effects")

    builder.add_conditional_edges(
        "parse_effects",
        check_parsed,
        {
            "closed_form": "closed_form",
            "end_with_error": "end_with_error"
        }
    )

    builder.add_edge("closed_form", "run_oracle")

    builder.add_conditional_edges(
        "run_oracle",
        check_oracle,
        {
            "cross_check": "cross_check",
            "end_with_error": "end_with_error"
        }
    )

    builder.add_edge("cross_check", END)
    builder.add_edge("end_with_error", END)

    jm_checker_graph = builder.compile()
    jm_checker_graph.name = "JMCheckerGraph"

    return jm_checker_graph


# Example usage
async def async_main(payload: Any) -> Dict[str, Any]:
    graph = create_jm_checker_graph()
    final_state = await graph.ainvoke(JMCheckState(payload=payload))
    logging.info(f"JM checker graph completed. Final state: {final_state}")
    return final_state


if __name__ == "__main__":
    example = {"a": {"a0": 0.5, "a": [0, 0, 0.25]}, "b": {"a0": 0.5, "a": [0.25, 0, 0]}}
    print(asyncio.run(async_main(example)))
