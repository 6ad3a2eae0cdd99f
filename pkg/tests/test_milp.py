import math

import numpy as np
import pytest

from ocforest.milp import (ERROR, FEASIBLE_TIME_LIMIT, INFEASIBLE, NO_INCUMBENT, OPTIMAL, AuditError,
                           LpParseError, ModelBuilder, ModelError, SolutionParseError, SolveOutcome,
                           SolverConfig, SolverError, SolverNotFound, audit_feasibility, find_cbc,
                           named_solver, parse_solution, read_lp, solve, write_lp)
from ocforest.milp.lpformat import fmt

from conftest import HAVE_HIGHS, highs_read, random_model


def same_model(a, b):
    """Name-keyed exact comparison of two models."""
    assert set(a.var_names) == set(b.var_names)
    for n in a.var_names:
        i, j = a.column(n), b.column(n)
        assert (a.is_binary[i], a.lower[i], a.upper[i], a.objective[i]) == \
               (b.is_binary[j], b.lower[j], b.upper[j], b.objective[j]), n
    assert a.objective_constant == b.objective_constant
    assert a.row_names == b.row_names
    for k in range(a.num_rows):
        ca, va = a.row(k)
        cb, vb = b.row(k)
        assert dict(zip((a.var_names[c] for c in ca), va)) == dict(zip((b.var_names[c] for c in cb), vb))
        assert a.senses[k] == b.senses[k] and a.rhs[k] == b.rhs[k]


def one_var_model():
    b = ModelBuilder("one")
    x = b.add_var("x", binary=True)
    b.set_objective(x, 1.0)
    b.add_row("c1", [x], [1.0], ">=", 1.0)
    return b.build()


# ---------------------------------------------------------------- model


def test_builder_validation():
    b = ModelBuilder()
    x = b.add_var("x")
    with pytest.raises(ModelError):
        b.add_var("x")
    with pytest.raises(ModelError):
        b.add_var("1bad")
    with pytest.raises(ModelError):
        b.add_var("y", lower=2, upper=1)
    with pytest.raises(ModelError):
        b.add_row("r", [x], [1.0], "<", 0)
    with pytest.raises(ModelError):
        b.add_row("r", [7], [1.0], "<=", 0)
    with pytest.raises(ModelError):
        b.add_row("r", [x, x], [1.0, -1.0], "<=", 0)
    b.add_row("r", [x], [1.0], "<=", 0)
    with pytest.raises(ModelError):
        b.add_row("r", [x], [1.0], "<=", 0)


def test_binaries_forced_to_unit_bounds():
    b = ModelBuilder()
    b.add_var("z", binary=True, lower=-3, upper=9)
    m = b.build()
    assert (m.lower[0], m.upper[0]) == (0.0, 1.0)
    with pytest.raises(ValueError):
        m.objective[0] = 2.0


def test_with_rows_appends():
    m = one_var_model().with_rows([("extra", [0], [2.0], "<=", 2.0)])
    assert m.row_names == ("c1", "extra")


# ---------------------------------------------------------------- LP format


def test_lp_text_shape():
    text = write_lp(one_var_model())
    assert text.splitlines() == ["\\ one", "Minimize", " obj: + 1 x", "Subject To", " c1: + 1 x >= 1",
                                 "Bounds", "Binaries", " x", "End"]


def test_seventeen_digits():
    assert fmt(0.1) == "0.10000000000000001"
    assert float(fmt(1 / 3)) == 1 / 3
    assert fmt(math.inf) == "+inf"


def test_long_rows_wrap_and_parse():
    b = ModelBuilder()
    cols = [b.add_var(f"v{j}") for j in range(30)]
    b.add_row("big", cols, [1.0 + j for j in range(30)], "=", 3.0)
    m = b.build()
    text = write_lp(m)
    assert max(len(l) for l in text.splitlines()) < 300
    same_model(m, read_lp(text))


@pytest.mark.parametrize("seed", range(40))
def test_round_trip_random(seed):
    m = random_model(np.random.default_rng(seed))
    text = write_lp(m)
    back = read_lp(text, m.name)
    same_model(m, back)
    assert write_lp(back) == text or set(back.var_names) == set(m.var_names)


@pytest.mark.skipif(not HAVE_HIGHS, reason="highspy not installed")
@pytest.mark.parametrize("seed", range(20))
def test_reference_reader_agrees(seed, tmp_path):
    m = random_model(np.random.default_rng(seed))
    ref = highs_read(write_lp(m), tmp_path)
    assert ref["offset"] == m.objective_constant
    for j, n in enumerate(m.var_names):
        lo, hi, cost, integer = ref["cols"][n]
        assert (lo, hi, cost, integer) == (m.lower[j], m.upper[j], m.objective[j], bool(m.is_binary[j]))
    for k, rn in enumerate(m.row_names):
        lo, hi = ref["rows"][rn]
        r = m.rhs[k]
        expect = {"<=": (-math.inf, r), ">=": (r, math.inf), "=": (r, r)}[m.senses[k]]
        assert (lo, hi) == expect
        cols, vals = m.row(k)
        for c, v in zip(cols, vals):
            assert ref["entries"][(rn, m.var_names[c])] == v
    assert len(ref["entries"]) == m.indices.size


@pytest.mark.parametrize(
    "text",
    ["x + y\n", "Minimize\n obj: x\nSubject To\n + x >= 1\nEnd\n",
     "Minimize\n obj: x\nSubject To\n r: x >= 1 <= 2\nEnd\n",
     "Minimize\n obj: x\nSubject To\n r: x >= y\nEnd\n",
     "Minimize\n obj: x\nBounds\n x weird\nEnd\n"],
)
def test_lp_parse_errors(text):
    with pytest.raises(LpParseError):
        read_lp(text)


# ---------------------------------------------------------------- solution parsing


def _xy_model():
    b = ModelBuilder("xy")
    x = b.add_var("x", binary=True)
    y = b.add_var("y", upper=4.0)
    b.set_objective(x, 2.0)
    b.set_objective(y, -1.0)
    b.objective_constant = 1.0
    b.add_row("r", [x, y], [1.0, 1.0], "<=", 3.0)
    return b.build()


def test_parse_plain_fills_zeros_and_recomputes_objective():
    out = parse_solution("plain", "status optimal\nobjective -2\ny 3\n", _xy_model())
    assert out.status == OPTIMAL
    assert out.assignment == {"x": 0.0, "y": 3.0}
    assert out.objective_value == pytest.approx(-2.0, abs=1e-6)
    assert out.gap == 0.0


def test_parse_plain_infeasible_has_no_assignment():
    out = parse_solution("plain", "status infeasible\n", _xy_model())
    assert out.status == INFEASIBLE and out.assignment is None


def test_parse_plain_time_limit_gap():
    out = parse_solution("plain", "status feasible-time-limit\nbound -3\ny 2\n", _xy_model())
    assert out.status == FEASIBLE_TIME_LIMIT
    assert out.gap == pytest.approx(2.0)  # (-1 - -3) / |-1|


def test_parse_cbc_records():
    text = ("Optimal - objective value -2.00000000\n"
            "      1 y                      3                       -1\n")
    out = parse_solution("cbc", text, _xy_model())
    assert out.status == OPTIMAL and out.assignment["y"] == 3.0 and out.assignment["x"] == 0.0
    # the file omits the constant term; the recomputed value includes it
    assert out.objective_value == -2.0
    stopped = parse_solution("cbc", "Stopped on time - objective value 1\n** 0 x 1 0\n", _xy_model())
    assert stopped.status == FEASIBLE_TIME_LIMIT and math.isinf(stopped.gap)
    none = parse_solution("cbc", "Stopped on time (no integer solution - continuous used)\n", _xy_model())
    assert none.status == NO_INCUMBENT
    inf = parse_solution("cbc", "Infeasible - objective value 0\n", _xy_model())
    assert inf.status == INFEASIBLE


@pytest.mark.parametrize(
    "kind,text",
    [("plain", "status optimal\nz 1\n"), ("plain", "status optimal\nx 1 2\n"), ("plain", "status maybe\n"),
     ("plain", ""), ("cbc", "Optimal - objective value 1\n 0 x\n"), ("cbc", "Weird status\n"),
     ("cbc", "Optimal - objective value 1\n 0 x abc 0\n"), ("gurobi", "x 1\n")],
)
def test_parse_errors(kind, text):
    with pytest.raises(SolutionParseError):
        parse_solution(kind, text, _xy_model())


def test_outcome_invariants():
    with pytest.raises(ValueError):
        SolveOutcome(OPTIMAL)
    with pytest.raises(ValueError):
        SolveOutcome(INFEASIBLE, assignment={})
    with pytest.raises(ValueError):
        SolveOutcome(OPTIMAL, 0.0, {}, gap=-1.0)


# ---------------------------------------------------------------- audit


def test_audit_reports_rows_bounds_and_integrality():
    m = _xy_model()
    assert audit_feasibility(m, {"x": 1.0, "y": 2.0}).ok
    rep = audit_feasibility(m, {"x": 1.0, "y": 3.5})
    assert rep.rows() == ["r"]
    rep = audit_feasibility(m, {"x": 0.5, "y": 5.0})
    kinds = sorted(v.kind for v in rep.violations)
    assert kinds == ["bound", "integrality", "row"]
    assert "violation" in str(rep)
    assert audit_feasibility(m, {"x": 1.0 + 5e-7, "y": 2.0}, tol=1e-6).ok
    with pytest.raises(AuditError):
        audit_feasibility(m, {"x": 1.0})


# ---------------------------------------------------------------- external solvers


@pytest.mark.solver
def test_highs_one_var(highs):
    out = solve(one_var_model(), highs)
    assert out.status == OPTIMAL
    assert out.assignment == {"x": 1.0}
    assert out.objective_value == 1.0
    assert out.wall_time < 30


@pytest.mark.solver
def test_cbc_one_var(cbc):
    out = solve(one_var_model(), cbc)
    assert out.status == OPTIMAL and out.objective_value == 1.0


@pytest.mark.solver
@pytest.mark.parametrize("profile", ["highs", "cbc"])
def test_constant_and_infeasible(profile, highs, cbc):
    cfg = highs if profile == "highs" else cbc
    out = solve(_xy_model(), cfg)
    assert out.status == OPTIMAL
    assert out.objective_value == pytest.approx(-2.0)
    bad = _xy_model().with_rows([("imp", [0], [1.0], ">=", 2.0)])
    assert solve(bad, cfg).status == INFEASIBLE


@pytest.mark.solver
@pytest.mark.parametrize("seed", range(8))
def test_random_models_match_between_solvers(seed, highs):
    m = random_model(np.random.default_rng(100 + seed))
    # keep them bounded so both report an optimum
    b = ModelBuilder.from_model(m)
    for j, n in enumerate(m.var_names):
        if not m.is_binary[j]:
            b.add_row(f"ub_{n}", [j], [1.0], "<=", 50.0)
            b.add_row(f"lb_{n}", [j], [1.0], ">=", -50.0)
    m = b.build()
    out = solve(m, highs)
    assert out.status in (OPTIMAL, INFEASIBLE)
    if out.status == OPTIMAL:
        assert audit_feasibility(m, out.assignment).ok
        assert out.objective_value == pytest.approx(m.objective_value(m.vector(out.assignment)))


@pytest.mark.solver
def test_warm_start_and_determinism(highs):
    m = _xy_model()
    a = solve(m, highs, warm_start={"x": 0.0, "y": 1.0})
    b = solve(m, highs, warm_start={"x": 0.0, "y": 1.0})
    assert a.objective_value == b.objective_value == pytest.approx(-2.0)


@pytest.mark.solver
def test_tiny_time_limit_returns(highs):
    from ocforest.formulation import OcfConfig, build_ocf_model
    from conftest import grid_dataset

    ds = grid_dataset(np.random.default_rng(5), 40, 4)
    model, _ = build_ocf_model(ds, OcfConfig(3, 2, 7, 1, warm_start=False))
    cfg = named_solver("highs", 0.001)
    out = solve(model, cfg)
    assert out.status in (FEASIBLE_TIME_LIMIT, NO_INCUMBENT, OPTIMAL)
    assert out.wall_time < 60


def test_keep_workspace_and_logs(tmp_path, highs):
    from dataclasses import replace

    cfg = replace(highs, keep_workspace=True, workspace_root=str(tmp_path / "ws"), log_dir=str(tmp_path / "logs"))
    out = solve(one_var_model(), cfg)
    assert out.solver_log_path and (tmp_path / "logs").exists()
    assert list((tmp_path / "ws").glob("*/model.lp"))


def test_solver_lookup_errors(tmp_path):
    with pytest.raises(SolverNotFound):
        find_cbc(str(tmp_path / "missing"))
    with pytest.raises(SolverError):
        named_solver("gurobi")
    with pytest.raises(SolverError):
        solve(one_var_model(), SolverConfig(kind="template"))


def test_crashing_solver_gives_error_status(tmp_path):
    cfg = SolverConfig(kind="template", command_template=("{python}", "-c", "import sys; sys.exit(3)"),
                       workspace_root=str(tmp_path))
    out = solve(one_var_model(), cfg)
    assert out.status == ERROR
    assert out.solver_log_path and "exit" in open(out.solver_log_path).read()
