"""Simulated tutoring systems: problem generation, grading, hints, locking."""

from .base import (
    DOMAINS,
    FRACTIONS,
    MC_ADDITION,
    HintPackage,
    TutorSession,
    gen_problem,
    kc_labels,
    load_problems,
    problem_to_dict,
    problem_from_dict,
    session_for,
)
from .mc import MCProblem, MCSession
from .fractions import FractionProblem, FractionSession

__all__ = [
    "FRACTIONS",
    "MC_ADDITION",
    "DOMAINS",
    "HintPackage",
    "TutorSession",
    "MCProblem",
    "MCSession",
    "FractionProblem",
    "FractionSession",
    "gen_problem",
    "kc_labels",
    "load_problems",
    "problem_to_dict",
    "problem_from_dict",
    "session_for",
]
