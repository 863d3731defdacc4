import json
import subprocess
import sys

import numpy as np
import pytest

from iftrkit.cli import EXIT_IO, EXIT_OK, EXIT_USAGE, RESULT_COLUMNS, main
from iftrkit.fading import IftrParams, iftr_pdf_closed
from iftrkit.io import file_digest, read_channel_set, read_manifest, read_table

FAST = ["--population", "8", "--generations", "2", "--points", "40"]


def _run(args):
    return subprocess.run([sys.executable, "-m", "iftrkit.cli", *args], capture_output=True, text=True)


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--scenario", "anechoic", "--seed", "1", "-o", str(out)]) == EXIT_OK
    return out


def test_synth_writes_full_set(synth_dir):
    cs = read_channel_set(synth_dir / "anechoic.chs")
    assert len(cs.channels) == 1089
    assert cs.grid.n_points == 651
    m = read_manifest(synth_dir)
    assert m.command == "synth" and m.seed == 1
    assert m.outputs == {"anechoic.chs": file_digest(synth_dir / "anechoic.chs")}


def test_synth_is_reproducible(synth_dir, tmp_path):
    assert main(["synth", "--scenario", "anechoic", "--seed", "1", "-o", str(tmp_path)]) == EXIT_OK
    assert file_digest(tmp_path / "anechoic.chs") == file_digest(synth_dir / "anechoic.chs")


def test_synth_unknown_scenario(tmp_path):
    proc = _run(["synth", "--scenario", "outdoor", "-o", str(tmp_path)])
    assert proc.returncode == EXIT_USAGE
    assert "unknown scenario" in proc.stderr


def test_missing_required_argument():
    proc = _run(["synth", "--scenario", "anechoic"])
    assert proc.returncode == EXIT_USAGE
    assert proc.stderr


def test_eval_iftr_stdout(capsys):
    assert main(["eval", "iftr", "--k-db", "10", "--delta", "0.5", "--m1", "2", "--m2", "3",
                 "--r", "0.5,1.0,1.5"]) == EXIT_OK
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "r,density,closed,quadrature"
    vals = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])
    p = IftrParams.from_db(10.0, 0.5, 2.0, 3.0)
    np.testing.assert_allclose(vals[:, 2], iftr_pdf_closed(p, vals[:, 0]), rtol=1e-12)
    np.testing.assert_allclose(vals[:, 1], vals[:, 2], atol=1e-6)


def test_eval_non_integer_m_has_no_closed_column(capsys):
    assert main(["eval", "iftr", "--k", "3", "--delta", "0.2", "--m1", "0.69", "--m2", "19",
                 "--points", "5"]) == EXIT_OK
    out = capsys.readouterr().out.splitlines()
    assert out[0] == "r,density" and len(out) == 6


def test_eval_vonmises_and_gtrv_to_file(tmp_path, capsys):
    assert main(["eval", "vonmises", "--kappa", "12.04", "--phi", "-0.1", "--points", "361",
                 "-o", str(tmp_path)]) == EXIT_OK
    cols, rows = read_table(tmp_path / "vonmises_pdf.csv")
    a = np.array(rows)
    assert cols == ["alpha", "density"]
    assert np.trapezoid(a[:, 1], a[:, 0]) == pytest.approx(1.0, abs=1e-6)
    assert main(["eval", "gtrv", "--k-db", "15", "--delta", "0.4", "--kappa", "3", "-o", str(tmp_path)]) == EXIT_OK
    assert read_manifest(tmp_path).command == "eval"


def test_eval_domain_error(capsys):
    assert main(["eval", "iftr", "--k", "1", "--delta", "1.5"]) == EXIT_USAGE
    assert "invalid parameter" in capsys.readouterr().err
    assert main(["eval", "iftr", "--k-db", "1", "--k", "1"]) == EXIT_USAGE


@pytest.fixture(scope="module")
def fit_dir(synth_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("fit")
    code = main(["merge-fit", str(synth_dir / "anechoic.chs"), "--configs", "4", "--model", "gtrv",
                 "--seed", "3", *FAST, "-o", str(out)])
    assert code == EXIT_OK
    return out


def test_merge_fit_outputs(fit_dir):
    cols, rows = read_table(fit_dir / "results.csv")
    assert tuple(cols) == RESULT_COLUMNS
    assert len(rows) == 4
    recs = [dict(zip(cols, r)) for r in rows]
    assert all(r["status"] == "ok" and r["model"] == "gtrv" for r in recs)
    assert all(r["kappa"] is not None and r["m1"] is None for r in recs)
    for name in ("pdf_curves.csv", "phase_pdf.csv", "cir.csv", "param_cdf.csv", "rmse_cdf.csv", "summary.csv"):
        assert (fit_dir / name).exists()
    cols, rows = read_table(fit_dir / "pdf_curves.csv")
    assert cols == ["scenario", "config", "r", "empirical", "fitted"] and len(rows) == 4 * 40
    m = read_manifest(fit_dir)
    assert m.status == "ok" and set(m.outputs) >= {"results.csv", "summary.csv"}


def test_merge_fit_is_reproducible(synth_dir, fit_dir, tmp_path):
    main(["merge-fit", str(synth_dir / "anechoic.chs"), "--configs", "4", "--model", "gtrv",
          "--seed", "3", *FAST, "-o", str(tmp_path)])
    assert file_digest(tmp_path / "results.csv") == file_digest(fit_dir / "results.csv")


def test_merge_fit_processes_match_serial(synth_dir, fit_dir, tmp_path):
    main(["merge-fit", str(synth_dir / "anechoic.chs"), "--configs", "4", "--model", "gtrv",
          "--seed", "3", "--jobs", "2", *FAST, "-o", str(tmp_path)])
    assert file_digest(tmp_path / "results.csv") == file_digest(fit_dir / "results.csv")


def test_merge_fit_config_ids_and_file(synth_dir, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"population": 8, "generations": 2, "points": 30}))
    out = tmp_path / "o"
    assert main(["merge-fit", str(synth_dir / "anechoic.chs"), "--configs", "A,EK",
                 "--config-file", str(cfg), "-o", str(out)]) == EXIT_OK
    cols, rows = read_table(out / "results.csv")
    assert [r[1] for r in rows] == ["A", "EK"]
    assert read_manifest(out).config["population"] == 8


def test_merge_fit_errors(tmp_path, capsys):
    assert main(["merge-fit", str(tmp_path / "none.chs"), "-o", str(tmp_path)]) == EXIT_IO
    bad = tmp_path / "bad.chs"
    bad.write_bytes(b"garbage!")
    assert main(["merge-fit", str(bad), "-o", str(tmp_path)]) == EXIT_IO
    assert main(["merge-fit", "--configs", "0", "-o", str(tmp_path)]) == EXIT_USAGE
    assert main(["merge-fit", "--configs", "C9999", "-o", str(tmp_path)]) == EXIT_USAGE
    assert main(["merge-fit", "--population", "7", "-o", str(tmp_path)]) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_report(fit_dir, tmp_path, capsys):
    assert main(["report", str(fit_dir), "-o", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "param_cdf.csv").read_text() == (fit_dir / "param_cdf.csv").read_text()
    cols, rows = read_table(tmp_path / "summary.csv")
    assert {r[2] for r in rows} >= {"k_db", "delta", "kappa", "rmse"}
    assert "median" in capsys.readouterr().out
    assert main(["report", str(tmp_path / "missing"), "-o", str(tmp_path)]) == EXIT_IO
