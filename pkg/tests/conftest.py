import importlib.util
import os
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from ocforest.core import Dataset

ROOT = Path(__file__).resolve().parents[1]
HEART = ROOT / "datasets" / "heart_statlog.manifest"

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

HAVE_HIGHS = importlib.util.find_spec("highspy") is not None


def grid_dataset(rng, n, p, step=0.05):
    """Random instance with features on a grid, so ε = 1e-5 is far below half the gap."""
    X = np.round(rng.random((n, p)) / step) * step
    X = np.clip(X, 0.0, 1.0)
    y = rng.integers(0, 2, n)
    return Dataset(X, y, tuple(f"x{q}" for q in range(p)), {"source": "synthetic"})


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def highs():
    if not HAVE_HIGHS:
        pytest.skip("highspy not installed")
    from ocforest.milp import highs_template

    return highs_template(120.0)


@pytest.fixture(scope="session")
def cbc():
    from ocforest.milp import SolverConfig, SolverNotFound, find_cbc

    try:
        path = find_cbc()
    except SolverNotFound:
        pytest.skip("no CBC binary available")
    return SolverConfig(kind="cbc", binary_path=path, time_limit_s=120.0)


@pytest.fixture
def toy_csv(tmp_path):
    """16-row, 2-feature dataset with its manifest; the label is x1 >= 5 except two flips."""
    rows = ["x1,x2,colour,label"]
    colours = ["red", "green", "blue", "red"]
    for i in range(16):
        x1, x2 = i % 8, (3 * i) % 7
        label = int(x1 >= 5) ^ int(i in (3, 12))
        rows.append(f"{x1},{x2},{colours[i % 4]},{'yes' if label else 'no'}")
    (tmp_path / "toy.csv").write_text("\n".join(rows) + "\n")
    (tmp_path / "toy.manifest").write_text(
        "path = toy.csv\nlabel_column = label\npositive_label = yes\n"
        "column.colour = categorical:red,green,blue\n"
    )
    return tmp_path / "toy.manifest"


COEF_POOL = (1.0, -1.0, 2.0, 0.5, 1 / 3, -2 / 7, 1e-5, 1 + 1e-5, 123456.789, -0.1)


def random_model(rng, name="rand"):
    """Small MILP mixing binaries, bounded, free and half-bounded columns and all senses."""
    from ocforest.milp import ModelBuilder

    b = ModelBuilder(name)
    nv = int(rng.integers(1, 9))
    for j in range(nv):
        kind = rng.integers(0, 5)
        if kind == 0:
            b.add_var(f"b{j}", binary=True)
        elif kind == 1:
            lo = float(rng.choice([0.0, -1.5, 2.0]))
            b.add_var(f"x{j}", lower=lo, upper=lo + float(rng.choice([1.0, 1 / 3, 10.0])))
        elif kind == 2:
            b.add_var(f"f{j}", lower=-np.inf, upper=np.inf)
        elif kind == 3:
            b.add_var(f"u{j}", lower=-np.inf, upper=float(rng.choice([0.0, 4.25])))
        else:
            b.add_var(f"p{j}")
        if rng.random() < 0.7:
            b.set_objective(j, float(rng.choice(COEF_POOL)) * (1 + rng.random()))
    b.objective_constant = float(rng.choice([0.0, 0.5, -3.0, 1 / 7]))
    for k in range(int(rng.integers(0, 7))):
        size = int(rng.integers(1, nv + 1))
        cols = rng.choice(nv, size=size, replace=False)
        coefs = [float(rng.choice(COEF_POOL)) for _ in cols]
        sense = ["<=", "=", ">="][int(rng.integers(0, 3))]
        b.add_row(f"r{k}", cols, coefs, sense, float(rng.choice([0.0, 1.0, -2.5, 1 / 3, 1e-5])))
    return b.build()


def highs_read(text, tmp_path):
    """Load LP text with the HiGHS reader; returns a name-keyed description."""
    import highspy

    path = tmp_path / "ref.lp"
    path.write_text(text)
    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.readModel(str(path))
    lp = h.getLp()
    cols = list(lp.col_names_)
    rows = list(lp.row_names_)
    a = lp.a_matrix_
    entries = {}
    for j in range(lp.num_col_):
        for k in range(a.start_[j], a.start_[j + 1]):
            entries[(rows[a.index_[k]], cols[j])] = a.value_[k]
    integ = list(lp.integrality_) if len(lp.integrality_) else [highspy.HighsVarType.kContinuous] * lp.num_col_
    return {
        "cols": {c: (lp.col_lower_[j], lp.col_upper_[j], lp.col_cost_[j],
                     integ[j] == highspy.HighsVarType.kInteger) for j, c in enumerate(cols)},
        "rows": {r: (lp.row_lower_[i], lp.row_upper_[i]) for i, r in enumerate(rows)},
        "entries": entries,
        "offset": lp.offset_,
    }


# ---------------------------------------------------------------- acceptance report

ACCEPTANCE: dict = {}


def record_criterion(key: str, passed: bool, detail: str):
    line = f"{key} {'PASS' if passed else 'FAIL'}: {detail}"
    ACCEPTANCE[key] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for key in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[key])
