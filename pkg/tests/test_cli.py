import json
import math
import re
import subprocess
import sys

import numpy as np
import pytest

from gsstep.cli import main
from gsstep.formats import read_pfm, read_records, write_pfm

from conftest import DELTA, rms, wrap


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def usage_error(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main([str(a) for a in argv])
    return exc.value.code, capsys.readouterr().err


@pytest.fixture(scope="module")
def case1_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("case1")
    assert main(["synth", "--case", "I", "--out-dir", str(d)]) == 0
    return d


def estimate(capsys, d, *extra):
    code, out, _ = run(["estimate", "--i1", d / "i1.pfm", "--i2", d / "i2.pfm", *extra], capsys)
    assert code == 0
    return dict(kv.split("=") for kv in out.split())


def test_synth_outputs(case1_dir):
    i1 = read_pfm(case1_dir / "i1.pfm")
    assert i1.shape == (256, 256)
    assert np.abs(i1).max() <= 1.0
    meta = json.loads((case1_dir / "meta.json").read_text())
    assert meta["case"] == "I" and meta["delta"] == DELTA
    for name in ("i2", "truth_phi", "truth_a", "truth_b"):
        assert (case1_dir / f"{name}.pfm").exists()


def test_synth_is_reproducible(tmp_path, capsys):
    args = ["synth", "--case", "II", "--sigma", "0.3", "--seed", "9", "--size", "48x32", "--preview"]
    run(args + ["--out-dir", tmp_path / "a"], capsys)
    run(args + ["--out-dir", tmp_path / "b"], capsys)
    for f in ("i1.pfm", "i2.pfm", "meta.json", "i1.pgm"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert read_pfm(tmp_path / "a" / "i1.pfm").shape == (32, 48)


@pytest.mark.parametrize("argv", [
    ["synth"],
    ["synth", "--case", "IV"],
    ["synth", "--case", "I", "--size", "0"],
    ["synth", "--case", "I", "--delta", "0"],
    ["synth", "--case", "I", "--sigma", "-1"],
    [],
])
def test_synth_usage_errors(argv, capsys):
    code, _ = usage_error(argv, capsys)
    assert code == 2


def test_estimate_case_one(case1_dir, capsys):
    tan = estimate(capsys, case1_dir)
    assert tan["estimator"] == "tan" and tan["sign"] == "+1" and tan["saturated"] == "no"
    # closed-fringe bias of 0.029 rad, same value the library reports
    assert float(tan["delta_hat_rad"]) - DELTA == pytest.approx(0.0289, abs=5e-4)
    assert math.degrees(float(tan["delta_hat_rad"])) == pytest.approx(float(tan["delta_hat_deg"]), abs=1e-6)
    sin = estimate(capsys, case1_dir, "--estimator", "sin")
    assert abs(float(sin["delta_hat_rad"]) - DELTA) < abs(float(tan["delta_hat_rad"]) - DELTA)


@pytest.mark.parametrize("factor,tol", [(8.0, 1e-12), (10.0, 1e-8)])
def test_estimate_scale_invariance(case1_dir, tmp_path, capsys, factor, tol):
    # frames are stored as float32; only a power-of-two factor scales them exactly
    write_pfm(tmp_path / "i1.pfm", factor * read_pfm(case1_dir / "i1.pfm"))
    write_pfm(tmp_path / "i2.pfm", factor * read_pfm(case1_dir / "i2.pfm"))
    a = float(estimate(capsys, case1_dir)["delta_hat_rad"])
    b = float(estimate(capsys, tmp_path)["delta_hat_rad"])
    assert a == pytest.approx(b, abs=tol)


def test_estimate_with_prefilter(tmp_path, capsys):
    run(["synth", "--case", "III", "--out-dir", tmp_path], capsys)
    out = estimate(capsys, tmp_path, "--prefilter", "isotropic", "--estimator", "sin")
    assert abs(float(out["delta_hat_rad"]) - DELTA) <= 0.03


def test_estimate_degenerate_pair(case1_dir, capsys):
    code, _, err = run(["estimate", "--i1", case1_dir / "i1.pfm", "--i2", case1_dir / "i1.pfm"], capsys)
    assert code == 4 and "degenerate pair" in err


def test_estimate_dimension_mismatch(case1_dir, tmp_path, capsys):
    write_pfm(tmp_path / "small.pfm", np.ones((8, 8)))
    code, _, err = run(["estimate", "--i1", case1_dir / "i1.pfm", "--i2", tmp_path / "small.pfm"], capsys)
    assert code == 3 and "dimension mismatch" in err


def test_estimate_bad_file(tmp_path, capsys):
    (tmp_path / "bad.pfm").write_bytes(b"hello")
    code, _, err = run(["estimate", "--i1", tmp_path / "bad.pfm", "--i2", tmp_path / "bad.pfm"], capsys)
    assert code == 3 and "bad.pfm" in err
    code, _, _ = run(["estimate", "--i1", tmp_path / "nope.pfm", "--i2", tmp_path / "bad.pfm"], capsys)
    assert code == 3


def test_demod(case1_dir, tmp_path, capsys):
    code, out, _ = run(["demod", "--i1", case1_dir / "i1.pfm", "--i2", case1_dir / "i2.pfm",
                        "--out", tmp_path / "phi.pfm"], capsys)
    assert code == 0 and "undefined_pixels=0" in out
    phi = read_pfm(tmp_path / "phi.pfm")
    truth = read_pfm(case1_dir / "truth_phi.pfm")
    assert phi.min() > -math.pi and phi.max() <= math.pi + 1e-6
    assert rms(wrap(phi - truth)) <= 1e-2


def test_demod_parallel_frames(case1_dir, tmp_path, capsys):
    code, _, err = run(["demod", "--i1", case1_dir / "i1.pfm", "--i2", case1_dir / "i1.pfm",
                        "--out", tmp_path / "phi.pfm"], capsys)
    assert code == 4 and not (tmp_path / "phi.pfm").exists()


def test_experiment_and_plot(tmp_path, capsys):
    plan = tmp_path / "plan.txt"
    plan.write_text("combo = I none tan\ncombo = II none tan\nsigmas = 0, 0.5\n"
                    "trials = 2\nwidth = 64\nheight = 64\n")
    code, out, _ = run(["experiment", "--plan", plan, "--out", tmp_path / "r.csv", "--plots"], capsys)
    assert code == 0 and "wrote 8 records" in out
    assert len(read_records(tmp_path / "r.csv")) == 8
    for case in ("I", "II"):
        svg = (tmp_path / f"r_case-{case}.svg").read_text()
        assert svg.startswith("<svg") or svg.startswith("<?xml")
    code, out, _ = run(["plot", "--in", tmp_path / "r.csv", "--out", tmp_path / "c.svg"], capsys)
    assert code == 0 and "c_case-I.svg" in out


def test_experiment_trials_override_and_default_plan(tmp_path, capsys):
    plan = tmp_path / "plan.txt"
    plan.write_text("combo = I none sin\nsigmas = 0\nwidth = 64\nheight = 64\n")
    code, out, _ = run(["experiment", "--plan", plan, "--trials", "3", "--out", tmp_path / "r.csv"], capsys)
    assert code == 0 and "wrote 3 records" in out
    code, out, _ = run(["experiment", "--print-default-plan"], capsys)
    assert code == 0 and out.count("combo = ") == 6 and "trials = 50" in out


def test_experiment_usage_errors(tmp_path, capsys):
    assert usage_error(["experiment"], capsys)[0] == 2
    assert usage_error(["experiment", "--plan", "x", "--default-paper"], capsys)[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("combo = III none sin\n")
    code, _, err = run(["experiment", "--plan", bad, "--out", tmp_path / "r.csv"], capsys)
    assert code == 3 and re.search(r"bad\.txt:1: ", err)


def test_plot_empty_csv(tmp_path, capsys):
    from gsstep.formats import CSV_COLUMNS
    (tmp_path / "e.csv").write_text(",".join(CSV_COLUMNS) + "\n")
    code, _, err = run(["plot", "--in", tmp_path / "e.csv", "--out", tmp_path / "e.svg"], capsys)
    assert code == 3 and "no result rows" in err
    assert not list(tmp_path.glob("e*.svg"))


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "gsstep", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip().startswith("gsstep")
