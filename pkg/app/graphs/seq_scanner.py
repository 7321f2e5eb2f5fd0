# ===================================================================================
# Project: Unsharp
# File: app/graphs/seq_scanner.py
# Description: This file contains the implementation of the sequential trade-off scan Graph. Each sharpness value
#              is evaluated in its own parallel branch; rows are collected and ordered by sharpness.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

import os
import sys
import asyncio
from typing import Any, Dict, List, Optional, Union
from langgraph.graph import StateGraph, START, END
from langgraph.types import Send
from langchain_core.runnables import RunnableConfig

# Dynamically add the project root directory to sys.path
current_file_path = os.path.abspath(__file__)
project_root = os.path.abspath(os.path.join(current_file_path, "../../.."))
if project_root not in sys.path:
    sys.path.append(project_root)

from logger import logging
from app.graphs.states import ScanRowState, SeqScanState
from app.measurement.sequential import check_orthogonal_axes, tradeoff_row

EXIT_INPUT_ERROR = 2


# Node: Validate axes and sharpness values
async def validate_scheme(
    state: SeqScanState, *, config: Optional[RunnableConfig] = None
) -> Dict[str, Any]:
    try:
        n, m = check_orthogonal_axes(state.n, state.m)
        if not state.lambdas:
            raise ValueError("At least one λ value is required")
        outside = [lam for lam in state.lambdas if not 0.0 <= lam <= 1.0]
        if outside:
            raise ValueError(f"λ values outside [0, 1]: {outside}")
    except ValueError as e:
        logging.error(f"Rejected seq-scan input: {e}")
        return {"error": str(e), "exit_code": EXIT_INPUT_ERROR}

    logging.info(f"Scanning {len(state.lambdas)} sharpness values for n={n.tolist()}, m={m.tolist()}")
    return {"n": n.tolist(), "m": m.tolist(), "error": None}


# Node: One trade-off row
async def scan_row(
    state: ScanRowState, *, config: Optional[RunnableConfig] = None
) -> Dict[str, List[Dict[str, float]]]:
    row = await asyncio.to_thread(tradeoff_row, state.n, state.m, state.sharpness)
    return {"rows": [row.model_dump()]}


# Node: Order rows by sharpness so the table does not depend on evaluation order
async def collect_rows(
    state: SeqScanState, *, config: Optional[RunnableConfig] = None
) -> Dict[str, Any]:
    table = sorted(state.rows, key=lambda row: row["sharpness"])
    logging.info(f"Collected {len(table)} trade-off rows")
    return {"table": table}


async def end_with_error(
    state: SeqScanState, *, config: Optional[RunnableConfig] = None
) -> Dict[str, Any]:
    logging.error(f"seq-scan ended with error (exit code {state.exit_code}): {state.error}")
    return {}


def scan_in_parallel(state: SeqScanState) -> Union[str, List[Send]]:
    """Create one scan_row task per sharpness value."""
    if state.error:
        return "end_with_error"
    return [
        Send("scan_row", ScanRowState(n=state.n, m=state.m, sharpness=lam)) for lam in state.lambdas
    ]


def create_seq_scanner_graph():
    """Create and return the sequential scan graph."""
    builder = StateGraph(SeqScanState)
    builder.add_node("validate_scheme", validate_scheme)
    builder.add_node("scan_row", scan_row)
    builder.add_node("collect_rows", collect_rows)
    builder.add_node("end_with_error", end_with_error)

    builder.add_edge(START, "validate_scheme")
    builder.add_conditional_edges(
        "validate_scheme",
        scan_in_parallel,
        path_map=["scan_row", "end_with_error"],
    )
    builder.add_edge("scan_row", "collect_rows")
    builder.add_edge("collect_rows", END)
    builder.add_edge("end_with_error", END)

    seq_scanner_graph = builder.compile()
    seq_scanner_graph.name = "SeqScannerGraph"

    return seq_scanner_graph


# Example usage:
async def async_main(n, m, lambdas):
    graph = create_seq_scanner_graph()
    final_state = await graph.ainvoke(SeqScanState(n=n, m=m, lambdas=lambdas))
    logging.info(f"Sequential scan graph completed. Final state: {final_state}")
    return final_state


if __name__ == "__main__":
    print(asyncio.run(async_main([0, 0, 1], [1, 0, 0], [0.0, 0.5, 0.8, 1.0])))
