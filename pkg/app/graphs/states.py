# ===================================================================================
# Project: Unsharp
# File: app/graphs/states.py
# Description: This file contains the state schemas used by the graphs. States hold JSON-ready values only.
# Created: [17-10-2026]
# Updated: [17-10-2026]
# Version: 1.0.0
# ===================================================================================

from typing import List, Dict, Any, Optional, Annotated
from operator import add
from pydantic import BaseModel, Field


# State used by the joint-measurability checker graph
class JMCheckState(BaseModel):
    """Closed-form verdict cross-checked against the feasibility oracle"""
    payload: Any = None
    effect_a: Optional[Dict[str, Any]] = None
    effect_b: Optional[Dict[str, Any]] = None

    # Results
    report: Optional[Dict[str, Any]] = None
    oracle_verdict: Optional[str] = None
    oracle_candidate: Optional[Dict[str, Any]] = None
    agreement: Optional[bool] = None

    # Error handling
    error: Optional[str] = None
    exit_code: int = 0


# states used by the sequential scan graph
class ScanRowState(BaseModel):
    """Private state for the scan_row node in the sequential scan graph"""
    n: List[float]
    m: List[float]
    sharpness: float


class SeqScanState(BaseModel):
    """Accuracy/disturbance trade-off over a list of sharpness values"""
    n: List[float] = Field(default_factory=list)
    m: List[float] = Field(default_factory=list)
    lambdas: List[float] = Field(default_factory=list)
    rows: Annotated[List[Dict[str, float]], add] = Field(default_factory=list)
    table: List[Dict[str, float]] = Field(default_factory=list)

    # Error handling
    error: Optional[str] = None
    exit_code: int = 0
