"""Solve an LP file with HiGHS and write a plain ``name value`` solution.

Used as the command behind the template adapter profile::

    python -m ocforest.milp.highs_runner model.lp solution.txt --time-limit 60
"""
import argparse
import math
import sys


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="ocforest.milp.highs_runner")
    ap.add_argument("lp")
    ap.add_argument("solution")
    ap.add_argument("--time-limit", type=float, default=math.inf)
    ap.add_argument("--mip-gap", type=float, default=0.0)
    ap.add_argument("--threads", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--start", default=None)
    args = ap.parse_args(argv)

    import highspy

    h = highspy.Highs()
    h.setOptionValue("time_limit", float(args.time_limit))
    h.setOptionValue("mip_rel_gap", float(args.mip_gap))
    h.setOptionValue("threads", int(args.threads))
    h.setOptionValue("random_seed", int(args.seed))
    if h.readModel(args.lp) != highspy.HighsStatus.kOk:
        print("could not read model", file=sys.stderr)
        return 2
    lp = h.getLp()
    names = list(lp.col_names_)
    if args.start:
        vals = dict.fromkeys(names, 0.0)
        with open(args.start) as fh:
            for line in fh:
                parts = line.split()
                if len(parts) == 2 and parts[0] in vals:
                    vals[parts[0]] = float(parts[1])
        sol = highspy.HighsSolution()
        sol.col_value = [vals[n] for n in names]
        sol.value_valid = True
        h.setSolution(sol)
        # a supplied incumbent plus a presolve restart can prune the true optimum
        h.setOptionValue("mip_allow_restart", False)
    h.run()
    ms = h.getModelStatus()
    info = h.getInfo()
    has_primal = info.primal_solution_status == 2
    M = highspy.HighsModelStatus
    if ms == M.kOptimal:
        status = "optimal"
    elif ms == M.kInfeasible:
        status = "infeasible"
    elif ms in (M.kTimeLimit, M.kIterationLimit, M.kSolutionLimit, M.kInterrupt):
        status = "feasible-time-limit" if has_primal else "no-incumbent"
    else:
        status = "error"
    out = [f"status {status}"]
    if status in ("optimal", "feasible-time-limit"):
        out.append(f"objective {info.objective_function_value!r}")
        out.append(f"bound {info.mip_dual_bound!r}")
        values = h.getSolution().col_value
        out.extend(f"{n} {v!r}" for n, v in zip(names, values) if v != 0.0)
    with open(args.solution, "w") as fh:
        fh.write("\n".join(out) + "\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
