"""Solver-agnostic MILP model, LP writer, external solver adapters and audit."""
from .audit import AuditError, AuditReport, audit_feasibility
from .lpformat import LpParseError, read_lp, write_lp
from .model import EQ, GE, LE, MilpModel, ModelBuilder, ModelError
from .solvers import (
    ERROR,
    FEASIBLE_TIME_LIMIT,
    INFEASIBLE,
    NO_INCUMBENT,
    OPTIMAL,
    SolutionParseError,
    SolveOutcome,
    SolverConfig,
    SolverError,
    SolverNotFound,
    find_cbc,
    highs_template,
    named_solver,
    parse_solution,
    solve,
)
