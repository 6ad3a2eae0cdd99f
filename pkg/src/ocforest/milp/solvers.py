"""External-solver adapters: write the LP, run the binary, read the solution back."""
from __future__ import annotations

import importlib.util
import logging
import math
import os
import platform
import re
import shutil
import subprocess
import sys
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional, Sequence

import numpy as np

from .lpformat import fmt, write_lp
from .model import MilpModel

log = logging.getLogger(__name__)

OPTIMAL = "optimal"
FEASIBLE_TIME_LIMIT = "feasible-time-limit"
NO_INCUMBENT = "no-incumbent"
INFEASIBLE = "infeasible"
ERROR = "error"
WITH_ASSIGNMENT = (OPTIMAL, FEASIBLE_TIME_LIMIT)

CBC_ENV = "OCFOREST_CBC"


class SolverError(RuntimeError):
    pass


class SolverNotFound(SolverError):
    pass


class SolutionParseError(ValueError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    kind: str = "cbc"  # cbc | template
    binary_path: Optional[str] = None
    time_limit_s: float = 60.0
    mip_gap: float = 0.0
    threads: int = 1
    seed: int = 0
    command_template: tuple = ()
    solution_format: str = "plain"  # template adapter only: plain | cbc
    keep_workspace: bool = False
    workspace_root: Optional[str] = None
    log_dir: Optional[str] = None


@dataclass(frozen=True, eq=False)
class SolveOutcome:
    status: str
    objective_value: float = math.nan
    assignment: Optional[Mapping[str, float]] = None
    gap: float = math.inf
    wall_time: float = 0.0
    solver_log_path: Optional[str] = None
    bound: float = math.nan

    def __post_init__(self):
        has = self.assignment is not None
        if has != (self.status in WITH_ASSIGNMENT):
            raise ValueError(f"status {self.status!r} inconsistent with assignment presence")
        if not self.gap >= 0:
            raise ValueError("gap must be non-negative")

    @property
    def has_solution(self) -> bool:
        return self.assignment is not None


# ---------------------------------------------------------------- parsing


def _fill(names: Sequence[str], values: Mapping[str, float]) -> dict[str, float]:
    known = set(names)
    for v in values:
        if v not in known:
            raise SolutionParseError(f"unknown variable {v!r} in solution")
    return {n: float(values.get(n, 0.0)) for n in names}


def _cbc_status(first: str) -> str:
    head = first.strip()
    low = head.lower()
    if low.startswith("optimal"):
        return OPTIMAL
    if "infeasible" in low.split(" - ")[0]:
        return INFEASIBLE
    if low.startswith("stopped"):
        return NO_INCUMBENT if "no integer solution" in low else FEASIBLE_TIME_LIMIT
    if low.startswith("unbounded"):
        return ERROR
    raise SolutionParseError(f"unrecognised CBC status line {head!r}")


_GAP_RE = re.compile(r"^Gap:\s*([-+0-9.eE]+|inf)", re.M)
_BOUND_RE = re.compile(r"^Lower bound:\s*([-+0-9.eE]+)", re.M)


def parse_solution(solver_kind: str, text: str, model: MilpModel, log_text: str = "") -> SolveOutcome:
    """Read a solver solution file into an outcome over ``model``'s variables.

    Variables absent from the file are zero. The reported objective is
    recomputed from the assignment (including the model's constant term,
    which some readers silently drop).
    """
    lines = [l for l in text.splitlines() if l.strip()]
    if not lines:
        raise SolutionParseError("empty solution file")
    names = model.var_names
    if solver_kind == "cbc":
        status = _cbc_status(lines[0])
        values = {}
        for k, line in enumerate(lines[1:], start=2):
            toks = line.split()
            if toks and toks[0] == "**":
                toks = toks[1:]
            if len(toks) < 3:
                raise SolutionParseError(f"line {k}: malformed solution record {line!r}")
            try:
                values[toks[1]] = float(toks[2])
            except ValueError:
                raise SolutionParseError(f"line {k}: bad value {toks[2]!r}") from None
        bound = math.nan
        m = _BOUND_RE.search(log_text)
        if m:
            bound = float(m.group(1)) + model.objective_constant
    elif solver_kind == "plain":
        header, values = {}, {}
        for k, line in enumerate(lines, start=1):
            toks = line.split()
            if len(toks) != 2:
                raise SolutionParseError(f"line {k}: expected 'name value', got {line!r}")
            key, val = toks
            if key in ("status", "objective", "bound", "gap") and key not in header and not values:
                header[key] = val
                continue
            try:
                values[key] = float(val)
            except ValueError:
                raise SolutionParseError(f"line {k}: bad value {val!r}") from None
        status = header.get("status")
        if status not in (OPTIMAL, FEASIBLE_TIME_LIMIT, NO_INCUMBENT, INFEASIBLE, ERROR):
            raise SolutionParseError(f"unknown status {status!r}")
        bound = float(header.get("bound", "nan"))
    else:
        raise SolutionParseError(f"unsupported solver kind {solver_kind!r}")

    if status not in WITH_ASSIGNMENT:
        return SolveOutcome(status)
    assignment = _fill(names, values)
    x = np.array([assignment[n] for n in names])
    obj = model.objective_value(x)
    if status == OPTIMAL:
        gap, bound = 0.0, obj
    elif math.isnan(bound):
        gap = math.inf
    else:
        gap = max(0.0, (obj - bound) / max(abs(obj), 1e-9))
    return SolveOutcome(status, obj, assignment, gap, bound=bound)


# ---------------------------------------------------------------- adapters


def find_cbc(explicit: Optional[str] = None) -> str:
    def usable(p):
        return bool(p) and os.path.isfile(p) and os.access(p, os.X_OK)

    if explicit:
        if usable(explicit):
            return explicit
        raise SolverNotFound(f"solver binary {explicit!r} not found or not executable")
    for cand in (os.environ.get(CBC_ENV), shutil.which("cbc")):
        if usable(cand):
            return cand
    spec = importlib.util.find_spec("pulp")
    if spec and spec.origin:
        arch = {"x86_64": "i64", "amd64": "i64", "aarch64": "arm64", "arm64": "arm64"}.get(
            platform.machine().lower(), "i64"
        )
        system = {"linux": "linux", "darwin": "osx"}.get(sys.platform, "win")
        exe = "cbc.exe" if system == "win" else "cbc"
        bundled = Path(spec.origin).parent / "solverdir" / "cbc" / system / arch / exe
        if bundled.is_file() and os.access(bundled, os.X_OK):
            return str(bundled)
    raise SolverNotFound(f"no CBC binary: set {CBC_ENV}, put cbc on PATH or install pulp")


def write_cbc_start(model: MilpModel, values: Mapping[str, float]) -> str:
    lines = ["Stopped on time - objective value 0"]
    for j, n in enumerate(model.var_names):
        lines.append(f"{j:>7} {n} {fmt(float(values.get(n, 0.0))):>15} {0:>23}")
    return "\n".join(lines) + "\n"


def write_plain_start(model: MilpModel, values: Mapping[str, float]) -> str:
    return "".join(f"{n} {fmt(float(values.get(n, 0.0)))}\n" for n in model.var_names)


class CbcAdapter:
    kind = "cbc"
    supports_start = True

    def __init__(self, config: SolverConfig):
        self.config = config
        self.binary = find_cbc(config.binary_path)

    def command(self, lp: Path, sol: Path, start: Optional[Path]) -> list[str]:
        c = self.config
        cmd = [self.binary, str(lp)]
        if start is not None:
            cmd += ["-mips", str(start)]
        cmd += ["-timeMode", "elapsed", "-sec", fmt(max(c.time_limit_s, 0.001)),
                "-ratioGap", fmt(c.mip_gap), "-randomCbcSeed", str(int(c.seed))]
        # threads=1 stays on CBC's serial code path; >1 switches to its parallel mode
        if c.threads > 1:
            cmd += ["-threads", str(int(c.threads))]
        return cmd + ["-solve", "-solution", str(sol)]

    def start_text(self, model, values):
        return write_cbc_start(model, values)

    solution_kind = "cbc"


class TemplateAdapter:
    """Generic 'LP in, solution out' profile driven by a command template.

    Placeholders: ``{lp} {solution} {start} {time_limit} {mip_gap} {threads}
    {seed} {python}``. An argument containing ``{start}`` is dropped when no
    warm start is given.
    """

    kind = "template"

    def __init__(self, config: SolverConfig):
        if not config.command_template:
            raise SolverError("template adapter needs a command_template")
        self.config = config
        self.supports_start = any("{start}" in a for a in config.command_template)
        self.solution_kind = config.solution_format

    def command(self, lp: Path, sol: Path, start: Optional[Path]) -> list[str]:
        c = self.config
        subs = {
            "lp": str(lp), "solution": str(sol), "start": str(start) if start else "",
            "time_limit": fmt(c.time_limit_s), "mip_gap": fmt(c.mip_gap),
            "threads": str(c.threads), "seed": str(c.seed), "python": sys.executable,
        }
        out = []
        for arg in c.command_template:
            if "{start}" in arg and start is None:
                # the flag preceding a dropped {start} goes too
                if out and out[-1].startswith("-"):
                    out.pop()
                continue
            out.append(arg.format(**subs))
        return out

    def start_text(self, model, values):
        return write_plain_start(model, values) if self.solution_kind == "plain" else write_cbc_start(model, values)


def highs_template(time_limit_s: float = 60.0, **kw) -> SolverConfig:
    """Template profile running the bundled HiGHS runner in a subprocess."""
    cmd = ("{python}", "-m", "ocforest.milp.highs_runner", "{lp}", "{solution}",
           "--time-limit", "{time_limit}", "--mip-gap", "{mip_gap}", "--threads", "{threads}",
           "--seed", "{seed}", "--start", "{start}")
    return SolverConfig(kind="template", time_limit_s=time_limit_s, command_template=cmd,
                        solution_format="plain", **kw)


SOLVER_PROFILES = ("highs", "cbc")


def named_solver(name: str, time_limit_s: float = 60.0, binary_path: Optional[str] = None, **kw) -> SolverConfig:
    """Solver config for a shipped profile: ``highs`` (template) or ``cbc``."""
    if name == "highs":
        return highs_template(time_limit_s, **kw)
    if name == "cbc":
        return SolverConfig(kind="cbc", binary_path=binary_path, time_limit_s=time_limit_s, **kw)
    raise SolverError(f"unknown solver profile {name!r}; choose from {', '.join(SOLVER_PROFILES)}")


def make_adapter(config: SolverConfig):
    if config.kind == "cbc":
        return CbcAdapter(config)
    if config.kind == "template":
        return TemplateAdapter(config)
    raise SolverError(f"unknown solver kind {config.kind!r}")


_counter = 0


def solve(model: MilpModel, config: SolverConfig = SolverConfig(),
          warm_start: Optional[Mapping[str, float]] = None) -> SolveOutcome:
    """Solve ``model`` with an external solver process under a time limit."""
    global _counter
    adapter = make_adapter(config)
    root = config.workspace_root
    if root:
        os.makedirs(root, exist_ok=True)
    ws = Path(tempfile.mkdtemp(prefix=f"ocforest-{model.name}-", dir=root))
    lp, sol = ws / "model.lp", ws / "solution.txt"
    lp.write_text(write_lp(model))
    start = None
    if warm_start is not None:
        if adapter.supports_start:
            start = ws / "start.txt"
            start.write_text(adapter.start_text(model, warm_start))
        else:
            log.info("solver profile has no start-file mechanism; warm start skipped")
    if config.log_dir:
        os.makedirs(config.log_dir, exist_ok=True)
        _counter += 1
        log_path = Path(config.log_dir) / f"{model.name}-{os.getpid()}-{_counter}.log"
    else:
        log_path = ws / "solver.log"
    cmd = adapter.command(lp, sol, start)
    # grace period covers model loading and solution writing after the limit
    timeout = config.time_limit_s + max(30.0, 0.5 * config.time_limit_s)
    t0 = time.perf_counter()
    outcome = _run(cmd, log_path, timeout, t0, adapter, sol, model)
    if outcome.status != ERROR and not config.keep_workspace:
        shutil.rmtree(ws, ignore_errors=True)
        if not config.log_dir:
            outcome = SolveOutcome(outcome.status, outcome.objective_value, outcome.assignment,
                                   outcome.gap, outcome.wall_time, None, outcome.bound)
    return outcome


def _run(cmd, log_path, timeout, t0, adapter, sol, model) -> SolveOutcome:
    with open(log_path, "w") as fh:
        fh.write(" ".join(cmd) + "\n")
        fh.flush()
        try:
            proc = subprocess.run(cmd, stdout=fh, stderr=subprocess.STDOUT,
                                  stdin=subprocess.DEVNULL, timeout=timeout)
        except subprocess.TimeoutExpired:
            log.warning("solver exceeded %.1fs and was killed", timeout)
            return SolveOutcome(NO_INCUMBENT, wall_time=time.perf_counter() - t0,
                                solver_log_path=str(log_path))
    wall = time.perf_counter() - t0
    if proc.returncode != 0 or not sol.exists():
        log.warning("solver exited with code %s; log at %s", proc.returncode, log_path)
        return SolveOutcome(ERROR, wall_time=wall, solver_log_path=str(log_path))
    try:
        parsed = parse_solution(adapter.solution_kind, sol.read_text(), model,
                                log_path.read_text(errors="replace"))
    except SolutionParseError as exc:
        log.warning("could not parse solver output: %s", exc)
        return SolveOutcome(ERROR, wall_time=wall, solver_log_path=str(log_path))
    return SolveOutcome(parsed.status, parsed.objective_value, parsed.assignment, parsed.gap,
                        wall, str(log_path), parsed.bound)
