import dataclasses
import json

import pytest
from click.testing import CliRunner

from potlab.cli import main
from potlab.config import parse_config
from potlab.errors import ConfigError
from potlab.runner import csv_body_without_timing, fmt_number, run_suite


def _base_config(**over):
    data = {
        "seed": 11,
        "out_dir": "out",
        "cases": [
            {"id": "a", "result": "T3iii", "n": 2, "npts": 16, "box": 16.0,
             "count": 2},
        ],
    }
    data.update(over)
    return data


def test_parse_ok():
    cfg = parse_config(json.dumps(_base_config()))
    assert cfg.seed == 11 and len(cfg.cases) == 1
    assert cfg.cases[0].grid().npts == 16


def test_parse_rejects_unknown_keys():
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config(json.dumps(_base_config(extra=1)))
    bad = _base_config()
    bad["cases"][0]["mystery"] = 2
    with pytest.raises(ConfigError, match="unknown keys"):
        parse_config(json.dumps(bad))


def test_parse_reports_json_position():
    with pytest.raises(ConfigError, match=r"line 2, column"):
        parse_config('{\n "cases": [}\n}')


def test_parse_validates_cases():
    bad = _base_config()
    bad["cases"].append(dict(bad["cases"][0]))
    with pytest.raises(ConfigError, match="duplicate case id"):
        parse_config(json.dumps(bad))
    bad = _base_config()
    bad["cases"][0]["result"] = "T99"
    with pytest.raises(ConfigError, match="unknown result"):
        parse_config(json.dumps(bad))
    bad = _base_config()
    del bad["cases"][0]["npts"]
    with pytest.raises(ConfigError, match="missing required key"):
        parse_config(json.dumps(bad))
    bad = _base_config()
    bad["cases"][0].update({"result": "T3ii_sharpness"})
    with pytest.raises(ConfigError, match="needs keys"):
        parse_config(json.dumps(bad))
    bad = _base_config()
    bad["cases"][0]["npts"] = 63
    with pytest.raises(ConfigError, match="even"):
        parse_config(json.dumps(bad))
    bad = _base_config(refine=True)
    bad["cases"][0]["npts"] = 256  # 2N would exceed the cap
    with pytest.raises(ConfigError):
        parse_config(json.dumps(bad))


def test_probe_mode_required_for_probe_cases(tmp_path):
    cfg = parse_config(json.dumps(_base_config(cases=[
        {"id": "p", "result": "CONJ_PROBE", "n": 2, "npts": 64, "box": 16.0,
         "rhos": [0.6, 0.45, 0.3], "a_matrix": [[1.0, 0.0], [0.0, 0.0]]},
    ])))
    cfg = dataclasses.replace(cfg, out_dir=str(tmp_path / "o"))
    with pytest.raises(ConfigError, match="probe"):
        run_suite(cfg)


def test_fmt_number():
    assert fmt_number(None) == ""
    assert fmt_number(1 / 3) == "0.333333333333"
    assert fmt_number(float("inf")) == "nan"
    assert fmt_number(2.0) == "2"


def test_run_list():
    result = CliRunner().invoke(main, ["run", "--list"])
    assert result.exit_code == 0
    assert "T3iii" in result.output and "CONJ_PROBE" in result.output


def test_run_requires_config():
    result = CliRunner().invoke(main, ["run"])
    assert result.exit_code == 2


def test_run_bad_config_exit_2(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text("{ this is not json }")
    result = CliRunner().invoke(main, ["run", "--config", str(p)])
    assert result.exit_code == 2
    assert "line" in result.output


def test_run_end_to_end(tmp_path):
    p = tmp_path / "cfg.json"
    out = tmp_path / "out"
    p.write_text(json.dumps(_base_config(out_dir=str(out))))
    result = CliRunner().invoke(main, ["run", "--config", str(p)])
    assert result.exit_code == 0, result.output
    csv_text = (out / "report.csv").read_text()
    assert csv_text.splitlines()[0] == \
        "result_id,n,N,q_or_l,lhs,rhs,ratio,constant,seed,wall_ms"
    assert len(csv_text.splitlines()) == 3
    case_json = json.loads((out / "a.json").read_text())
    assert case_json["passed"] is True and len(case_json["reports"]) == 2


def test_run_failure_exit_1(tmp_path):
    # an unreachable sharpness target must fail the case and the run
    cfg = _base_config(cases=[
        {"id": "sharp", "result": "T3ii_sharpness", "n": 2, "npts": 16,
         "box": 16.0, "rhos": [0.9, 0.7, 0.5]},
    ])
    p = tmp_path / "cfg.json"
    out = tmp_path / "out"
    p.write_text(json.dumps(cfg))
    result = CliRunner().invoke(main, ["run", "--config", str(p), "--out", str(out)])
    assert result.exit_code == 1
    assert "FAIL" in result.output


def test_determinism_across_runs_and_jobs(tmp_path):
    base = _base_config(cases=[
        {"id": "a", "result": "T3iii", "n": 2, "npts": 16, "box": 16.0, "count": 2},
        {"id": "b", "result": "COROLLARY", "n": 2, "npts": 16, "box": 16.0,
         "count": 2},
        {"id": "c", "result": "T2", "n": 2, "npts": 16, "box": 16.0, "q": 1.0},
    ])
    bodies = []
    for tag, jobs in (("r1", 1), ("r2", 1), ("r3", 3)):
        cfg = parse_config(json.dumps(base))
        cfg = dataclasses.replace(cfg, out_dir=str(tmp_path / tag), jobs=jobs)
        run_suite(cfg)
        text = (tmp_path / tag / "report.csv").read_text()
        bodies.append(csv_body_without_timing(text))
    assert bodies[0] == bodies[1] == bodies[2]


def test_sweep_command(tmp_path):
    out = tmp_path / "trend.csv"
    result = CliRunner().invoke(main, [
        "sweep", "--result", "T3ii_sharpness", "--n", "2", "--npts", "64",
        "--box", "16.0", "--ladder", "0.05,0.02,0.01", "--out", str(out)])
    assert result.exit_code == 0, result.output
    text = out.read_text()
    assert text.startswith("rho,value")
    assert "# monotonicity: increasing" in text
    assert "# constant:" in text


def test_sweep_ladder_too_short(tmp_path):
    result = CliRunner().invoke(main, [
        "sweep", "--result", "T3ii_sharpness", "--ladder", "0.1,0.05",
        "--out", str(tmp_path / "x.csv")])
    assert result.exit_code == 2


def test_refine_runs_both_grids(tmp_path):
    cfg = parse_config(json.dumps(_base_config(refine=True, cases=[
        {"id": "t2", "result": "T2", "n": 2, "npts": 24, "box": 16.0, "q": 1.0},
        {"id": "lad", "result": "T3i", "n": 2, "npts": 24, "box": 16.0},
    ])))
    cfg = dataclasses.replace(cfg, out_dir=str(tmp_path / "o"))
    code, _ = run_suite(cfg)
    assert code == 0
    rec = json.loads((tmp_path / "o" / "t2.json").read_text())
    rep = rec["reports"][0]
    assert rep["npts"] == 48  # the finer grid is the reported one
    assert "refine_drift" in rep["extra"] and rep["extra"]["refine_drift"] <= 0.10
    lad = json.loads((tmp_path / "o" / "lad.json").read_text())
    assert lad["reports"][0]["npts"] == 48  # ladders rerun, not drift-gated


def test_sweep_necessity_footer(tmp_path):
    out = tmp_path / "nec.csv"
    result = CliRunner().invoke(main, [
        "sweep", "--result", "T1_necessity", "--n", "2", "--npts", "128",
        "--box", "16.0", "--ladder", "0.6,0.45,0.3", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert "# fit_slope:" in out.read_text()


def test_required_table_covers_all_results():
    from potlab.checks import RESULT_IDS
    from potlab.config import _REQUIRED
    assert set(_REQUIRED) == set(RESULT_IDS)


def test_every_result_dispatches(tmp_path):
    # smallest grids on which each checker passes its own gate
    cases = [
        {"id": "t1", "result": "T1", "n": 2, "npts": 48, "box": 16.0, "q": 1.0},
        {"id": "t1n", "result": "T1_necessity", "n": 2, "npts": 128, "box": 16.0,
         "q": 1.0, "rhos": [0.6, 0.45, 0.3], "phi_coeffs": [1.0, 1.0]},
        {"id": "t2", "result": "T2", "n": 2, "npts": 32, "box": 16.0, "q": 1.0},
        {"id": "lem", "result": "LEMMA_10x", "n": 2, "npts": 48, "box": 16.0,
         "q": 1.0},
        {"id": "p1", "result": "P1", "n": 2, "npts": 32, "box": 16.0, "q": 1.5},
        {"id": "p2", "result": "P2", "n": 2, "npts": 32, "box": 16.0},
        {"id": "tid", "result": "T3_identity", "n": 2, "npts": 48, "box": 16.0},
        {"id": "t3i", "result": "T3i", "n": 2, "npts": 32, "box": 16.0},
        {"id": "sh", "result": "T3ii_sharpness", "n": 2, "npts": 128, "box": 16.0,
         "rhos": [0.05, 0.02, 0.01]},
        {"id": "t3iii", "result": "T3iii", "n": 2, "npts": 32, "box": 16.0},
        {"id": "cor", "result": "COROLLARY", "n": 3, "npts": 16, "box": 12.0},
        {"id": "cr", "result": "CR_IDENTITY", "n": 2, "npts": 48, "box": 16.0},
        {"id": "cre", "result": "CRE_IDENTITY", "n": 3, "npts": 16, "box": 12.0},
        {"id": "p4", "result": "P4", "n": 2, "npts": 32, "box": 16.0},
        {"id": "t4", "result": "T4", "n": 3, "npts": 16, "box": 12.0},
        {"id": "r5", "result": "REMARK5", "n": 2, "npts": 48, "box": 16.0},
        {"id": "conj", "result": "CONJ_PROBE", "n": 2, "npts": 128, "box": 16.0,
         "rhos": [0.6, 0.45, 0.3], "a_matrix": [[1.0, 0.0], [0.0, -1.0]]},
    ]
    cfg = parse_config(json.dumps({"seed": 5, "probe_mode": True, "cases": cases}))
    cfg = dataclasses.replace(cfg, out_dir=str(tmp_path / "all"))
    code, failures = run_suite(cfg)
    assert code == 0, failures
    csv_text = (tmp_path / "all" / "report.csv").read_text()
    for case in cases:
        assert (tmp_path / "all" / f"{case['id']}.json").exists()
        assert case["result"] in csv_text
