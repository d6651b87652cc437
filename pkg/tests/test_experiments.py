import csv
import io
import json
import math

import numpy as np
import pytest

from supereig.experiments import (
    UNDEFINED, ExperimentConfig, ExperimentError, example_config, observed_orders, parse_levels,
    run_experiment, table_to_csv,
)

PI2 = math.pi**2


def same_digits(value, printed):
    """True if ``value`` rounds to the reference entry ``printed`` at its precision."""
    mant = printed.lower().split("e")[0].lstrip("-")
    digits = len(mant.replace(".", "").lstrip("0"))
    return float(f"{value:.{digits - 1}e}") == float(printed)


def test_observed_orders():
    assert observed_orders([4.0, 1.0, 0.25]) == [None, pytest.approx(2.0), pytest.approx(2.0)]
    assert observed_orders([1e-3, 1e-3]) == [None, 0.0]
    assert observed_orders([1.0, 0.0, 1.0]) == [None, UNDEFINED, UNDEFINED]
    assert observed_orders([-8.0, 1.0]) == [None, pytest.approx(3.0)]
    assert observed_orders([]) == [None]


def test_parse_levels():
    assert parse_levels("3") == (1, 2, 3)
    assert parse_levels("2-5") == (2, 3, 4, 5)
    assert parse_levels("2,4,6") == (2, 4, 6)
    with pytest.raises(ExperimentError):
        parse_levels("two")


def test_config_validation():
    with pytest.raises(ExperimentError):
        example_config(5)
    with pytest.raises(ExperimentError):
        example_config(1, elements=("RT0",))
    with pytest.raises(ExperimentError):
        example_config(1, post=("magic",))
    with pytest.raises(ExperimentError):
        example_config(1, levels=(3, 2))
    cfg = example_config(4)
    assert cfg.k == 8 and cfg.references == {2: 2 * PI2, 7: 5 * PI2}
    assert example_config(3).references == {1: pytest.approx(16 * PI2 / 3)}


def test_unit_square_cr_table():
    rep = run_experiment(example_config(1, elements=("CR",), levels=range(2, 7), post=("rea", "exp")))
    (table,) = rep["tables"]
    rows = table["rows"]
    assert [r["h"] for r in rows] == [0.5, 0.25, 0.125, 0.0625, 0.03125]
    # signed errors lambda_h - lambda at h = 1/4 .. 1/32
    for row, printed in zip(rows[1:], ["-0.3407", "-8.47E-02", "-2.11E-02", "-5.29E-03"]):
        assert same_digits(row["error"], printed)
    assert "order" not in rows[0]
    assert abs(rows[-1]["order"] - 2) < 0.01
    assert rows[2]["exp_error"] == pytest.approx(6.42e-4, rel=0.01)
    assert "exp_value" not in rows[0]
    assert 0.9 < rows[-1]["rea_effectivity"] < 1.1
    assert table["reference_source"] == "exact"


def test_p1star_and_cea_columns():
    rep = run_experiment(example_config(1, levels=(4, 5), post=("p1star", "cea")))
    row = rep["tables"][0]["rows"][-1]
    assert row["p1star_error"] > 0
    # lambda - (lambda_P1* + F_P1*) at h = 1/16
    assert -row["p1star_rea_error"] == pytest.approx(1.10e-3, rel=0.01)
    assert abs(row["cea_error"]) < 0.05 * abs(row["error"])


def test_combined_eigenvalue_on_finest_table_mesh():
    # lambda - lambda_CEA on T_8 (h = 1/256)
    rep = run_experiment(example_config(1, levels=(9,), post=("cea",)))
    row = rep["tables"][0]["rows"][0]
    assert -row["cea_error"] == pytest.approx(-1.51e-9, rel=0.05)


def test_example4_reference_sources():
    rep = run_experiment(example_config(4, levels=(2, 3), post=()))
    sources = {t["eigen_index"]: t["reference_source"] for t in rep["tables"]}
    assert sources[3] == "exact" and sources[8] == "exact"
    assert sources[1] == "computed-P1-finest"
    assert len(rep["tables"]) == 8


def test_determinism_and_formats(tmp_path):
    cfg = example_config(3, elements=("CR", "ECR"), levels=(2, 3, 4), post=("rea", "exp"))
    a = run_experiment(cfg, tmp_path / "a", "json")
    run_experiment(cfg, tmp_path / "b", "json")
    ja, jb = (tmp_path / "a/example3.json").read_bytes(), (tmp_path / "b/example3.json").read_bytes()
    assert ja == jb
    assert json.loads(ja)["tables"][0]["rows"][0]["lambda_h"] == a["tables"][0]["rows"][0]["lambda_h"]
    run_experiment(cfg, tmp_path / "c", "csv")
    run_experiment(cfg, tmp_path / "d", "csv")
    for table in a["tables"]:
        name = f"example3_{table['element']}_eig{table['eigen_index']}.csv"
        text = (tmp_path / "c" / name).read_text()
        assert text == (tmp_path / "d" / name).read_text()
        rows = list(csv.DictReader(io.StringIO(text)))
        assert len(rows) == len(table["rows"])
        for row, ref in zip(rows, table["rows"]):
            for key, val in row.items():
                if val == "" or key == "level":
                    continue
                if val == UNDEFINED:
                    assert ref[key] == UNDEFINED
                    continue
                # three significant digits
                assert float(val) == pytest.approx(ref[key], rel=5e-3, abs=1e-300)


def test_truncation_marker(tmp_path):
    cfg = example_config(1, levels=(2, 3, 4), post=())
    cfg.max_dofs = 100
    rep = run_experiment(cfg, tmp_path, "csv")
    assert rep["truncated"]["level"] == 4
    assert [r["level"] for r in rep["tables"][0]["rows"]] == [2, 3]
    text = (tmp_path / "example1_CR_eig1.csv").read_text()
    assert text.rstrip().splitlines()[-1].startswith("# truncated at level 4")


def test_zero_error_order_is_undefined():
    table = {"rows": [{"level": 1, "error": 0.0}, {"level": 2, "error": 0.0, "order": UNDEFINED}]}
    assert UNDEFINED in table_to_csv(table)


def test_export_matrices(tmp_path):
    cfg = example_config(1, levels=(2,), post=())
    cfg.export_matrices = True
    run_experiment(cfg, tmp_path, "json")
    lines = (tmp_path / "example1_CR_L2_stiffness.txt").read_text().split()
    assert len(lines) % 3 == 0 and len(lines) > 0
    assert (tmp_path / "example1_CR_L2_mass.txt").exists()


def test_custom_config():
    cfg = ExperimentConfig(domain="unit-square", bc="dirichlet", references={0: 2 * PI2},
                           elements=("p1",), levels=(3, 4), post=("rea",))
    rep = run_experiment(cfg)
    rows = rep["tables"][0]["rows"]
    assert same_digits(rows[0]["error"], "3.1266")
    assert abs(rows[1]["rea_error"]) < abs(rows[1]["error"])
