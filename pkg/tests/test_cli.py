from __future__ import annotations

import json

import numpy as np
import pytest

from cssdr.cli import main
from cssdr.data import load_csv


def test_simulate_writes_csv(tmp_path):
    out = tmp_path / "sim.csv"
    assert main(["-q", "simulate", "--model", "III", "--p", "6", "--n", "200", "--seed", "1", str(out)]) == 0
    ds = load_csv(out, "y")
    assert ds.X.shape == (200, 6)
    lines = out.read_text().splitlines()
    assert len(lines) == 201 and lines[0] == "x1,x2,x3,x4,x5,x6,y"


def test_simulate_default_seed_logged(tmp_path, caplog):
    out = tmp_path / "a.csv"
    with caplog.at_level("INFO"):
        assert main(["simulate", str(out)]) == 0
    assert "default" in caplog.text
    out2 = tmp_path / "b.csv"
    main(["-q", "simulate", str(out2)])
    assert out.read_text() == out2.read_text()


def test_fit_css_pir_report(tmp_path):
    data = tmp_path / "d.csv"
    main(["-q", "simulate", "--model", "I", "--n", "80", "--seed", "2", str(data)])
    rep = tmp_path / "r.txt"
    assert main(["-q", "fit", "--method", "css-pir", "--d", "1", "--response", "y", "--output", str(rep), str(data)]) == 0
    side = json.loads(rep.with_suffix(".json").read_text())
    assert side["schema"] == "cssdr.fit-report/1"
    assert np.array(side["beta_original"]).shape == (4, 1)
    assert len(side["angle_se"]) == 3 and all(s is not None and s >= 0 for s in side["angle_se"])
    assert side["trace"] == sorted(side["trace"], reverse=True)
    assert "angle standard errors" in rep.read_text()


def test_fit_sir_logs_slices(tmp_path, caplog):
    data = tmp_path / "d.csv"
    main(["-q", "simulate", "--n", "100", "--seed", "2", str(data)])
    with caplog.at_level("INFO"):
        assert main(["fit", "--method", "sir", "--slices", "10", "--d", "2", str(data)]) == 0
    assert "10 slices of 10 observations" in caplog.text
    assert (tmp_path / "d.report.json").exists()


def test_usage_and_data_errors(tmp_path, capsys):
    data = tmp_path / "d.csv"
    main(["-q", "simulate", "--n", "30", str(data)])
    with pytest.raises(SystemExit) as exc:
        main(["fit", "--method", "mave", str(data)])
    assert exc.value.code == 2
    assert main(["benchmark", "--model", "IV"]) == 2
    assert "I, II, III" in capsys.readouterr().err
    assert main(["fit", "--d", "0", str(data)]) == 2
    assert main(["-q", "fit", str(tmp_path / "missing.csv")]) == 1
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b,y\n1,2,3\n4,x,6\n")
    assert main(["-q", "fit", str(bad)]) == 1
    assert main(["-q", "fit", "--d", "9", str(data)]) == 1


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_benchmark_byte_identical(tmp_path):
    args = ["-q", "benchmark", "--model", "I", "--p", "4", "--n", "40", "--reps", "2", "--seed", "7",
            "--methods", "kir,css-kir", "--max-iter", "40"]
    assert main(args + ["--out-dir", str(tmp_path / "a")]) == 0
    assert main(args + ["--out-dir", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "bench_I_p4_n40.csv").read_bytes()
    assert a == (tmp_path / "b" / "bench_I_p4_n40.csv").read_bytes()
    assert (tmp_path / "a" / "bench_I_p4_n40.txt").read_text().startswith("Model I")
