import csv
import io
import json
import math
import subprocess
import sys

import pytest

from sg_edr import cli
from sg_edr.sg_measurement import EDPoint, in_sg_region


def run(capsys, tmp_path, *args, config=None, env=None, monkeypatch=None):
    argv = list(args)
    if config is not None:
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(config) if not isinstance(config, str) else config)
        argv += ["--config", str(path)]
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_point_worked_example(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "point")
    assert code == 0
    (r,) = rows(out)
    assert float(r["eps2"]) == pytest.approx(0.6855634222958227, rel=1e-15)
    assert float(r["eta2"]) == pytest.approx(1.4269904062796, rel=1e-12)
    assert r["in_sg_region"] == "true"
    # full double precision in the CSV
    assert len(r["eps2"].replace(".", "").lstrip("0")) >= 16


def test_point_without_gradient(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "point", config={"params": {"b1": 0.0, "b0": 0.3}})
    (r,) = rows(out)
    assert float(r["eps2"]) == pytest.approx(2.0, abs=1e-15)
    assert float(r["eta2"]) == pytest.approx(2 - 2 * math.cos(0.6), abs=1e-15)


def test_point_json(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "point", "--format", "json")
    data = json.loads(out)
    assert data["g0"] == 1.5 and data["heisenberg_violated"] is True


def test_exit_codes(capsys, tmp_path):
    assert run(capsys, tmp_path, "point", config="{not json")[0] == 2
    assert run(capsys, tmp_path, "point", config={"params": {"mu": "x"}})[0] == 2
    assert run(capsys, tmp_path, "point", config={"state": {"k_re": 1.0, "mean_z": 1.0}})[0] == 3
    assert run(capsys, tmp_path, "optimize", config={"params": {"dt": 0.0}})[0] == 3
    assert run(capsys, tmp_path, "boundary", "--samples", "8")[0] == 3
    code, _, err = run(capsys, tmp_path, "oracle-check", config={"oracle": {"half_width": 6.0}})
    assert code == 4 and "widen" in err


def test_bad_thread_env(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SG_EDR_THREADS", "zero")
    assert run(capsys, tmp_path, "sweep")[0] == 2


def test_boundary(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "boundary", "--samples", "512")
    assert code == 0
    table = rows(out)
    assert list(table[0]) == list(cli.BOUNDARY_COLUMNS)
    assert len(table) == 511
    centre = next(r for r in table if float(r["eps2"]) == 2.0)
    assert float(centre["eta2_sg_hi"]) == 4.0 and float(centre["eta2_sg_lo"]) == 0.0
    assert float(centre["eta2_bo_hi"]) == 4.0
    for r in table:
        e2, hi = float(r["eps2"]), float(r["eta2_sg_hi"])
        assert (hi - 2) ** 2 <= 4 - (e2 - 2) ** 2 + 1e-9
        assert float(r["eta2_bo_lo"]) <= float(r["eta2_sg_lo"]) + 1e-12
    near = [r for r in table if 0.28 <= float(r["eps2"]) <= 0.34]
    assert near and all(float(r["eta2_sg_lo"]) < float(r["eta2_heis"]) for r in near)


def test_sweep_default(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "sweep")
    table = rows(out)
    assert code == 0 and len(table) == 625
    # round trip: re-evaluating the flags from the CSV numbers reproduces them
    for r in table:
        flag = in_sg_region(EDPoint(float(r["eps2"]), float(r["eta2"])))
        assert (r["in_sg_region"] == "true") == flag == True


def test_sweep_threads_do_not_change_output(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("SG_EDR_THREADS", "1")
    a = run(capsys, tmp_path, "sweep")[1]
    monkeypatch.setenv("SG_EDR_THREADS", "8")
    b = run(capsys, tmp_path, "sweep")[1]
    assert a == b


def test_sweep_b0_period_spans_range(capsys, tmp_path):
    # k = 0.5, mu B1 dt = 1: V(dt/2) = 0.625 and W0^2 = 2 * 0.625
    b0 = [math.pi * j / 200 for j in range(201)]
    code, out, _ = run(capsys, tmp_path, "sweep", config={"sweep": {"b0": b0}})
    eta2 = [float(r["eta2"]) for r in rows(out)]
    damping = math.exp(-1.25)
    assert min(eta2) == pytest.approx(2 - 2 * damping, abs=1e-12)
    assert max(eta2) == pytest.approx(2 + 2 * damping, abs=1e-12)


def test_sweep_empty_range(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "sweep", config={"sweep": {"b1": []}})
    assert code == 0 and out.strip() == ",".join(cli.SWEEP_COLUMNS)
    code, out, _ = run(capsys, tmp_path, "sweep", "--format", "json", config={"sweep": {"b1": []}})
    assert json.loads(out) == []


def test_sweep_region_violation_is_fatal(capsys, tmp_path, monkeypatch):
    monkeypatch.setattr(cli, "in_sg_region", lambda pt: pt.eps2 > 1.0)
    code, _, err = run(capsys, tmp_path, "sweep")
    assert code == 1 and "outside the Stern-Gerlach region" in err


def test_optimize(capsys, tmp_path):
    cfg = {"params": {"dt": 0.1}, "state": {"k_re": 1.0, "k_im": 2.0}}
    code, out, _ = run(capsys, tmp_path, "optimize", config=cfg)
    (r,) = rows(out)
    assert r["attained"] == "true" and r["state_class"] == "Contractive"
    assert float(r["tau0"]) == pytest.approx(1 / 6, rel=1e-14)
    assert float(r["tau0_rel_error"]) < 1e-6
    code, out, _ = run(capsys, tmp_path, "optimize")
    (r,) = rows(out)
    assert r["attained"] == "false" and r["tau0"] == "" and float(r["w_value"]) == pytest.approx(1.0)


def test_oracle_check(capsys, tmp_path):
    dump = tmp_path / "dens.csv"
    code, out, _ = run(capsys, tmp_path, "oracle-check", "--dump-density", str(dump))
    assert code == 0
    table = {r["quantity"]: r for r in rows(out)}
    assert table["eps"]["passed"] == "true" and table["eta"]["passed"] == "true"
    snap = rows(dump.read_text())
    assert list(snap[0]) == ["z", "dens_up", "dens_down", "time"]
    assert {r["time"] for r in snap} == {"0", "1", "2"}


def test_oracle_check_without_moment(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "oracle-check", config={"params": {"mu": 0.0}})
    table = {r["quantity"]: r for r in rows(out)}
    assert float(table["eps"]["oracle"]) ** 2 == pytest.approx(2.0, abs=1e-6)
    assert float(table["home_I"]["oracle"]) == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("theta,bloch,eps,eta", [
    (0.0, {"ny": 1.0}, 0.0, math.sqrt(2)),
    (math.pi / 4, {"ny": 1.0}, math.sqrt(2), 0.0),
    (0.0, {"nz": 1.0}, 0.0, math.sqrt(2)),
])
def test_cnot(capsys, tmp_path, theta, bloch, eps, eta):
    code, out, _ = run(capsys, tmp_path, "cnot", "--theta", repr(theta), config={"bloch": bloch})
    (r,) = rows(out)
    assert float(r["eps"]) == pytest.approx(eps, abs=1e-7)
    assert float(r["eta"]) == pytest.approx(eta, abs=1e-7)
    if bloch == {"ny": 1.0}:
        assert abs(float(r["saturation_residual"])) < 1e-10
    else:
        assert r["note"]


def test_classify(capsys, tmp_path):
    code, out, _ = run(capsys, tmp_path, "classify", config={"state": {"k_re": 3.0}, "reference_k": 3.0})
    (r,) = rows(out)
    assert r["state_class"] == "CoherentRelativeToScale" and r["contraction_time"] == ""


def test_out_file(capsys, tmp_path):
    target = tmp_path / "pt.json"
    code, out, _ = run(capsys, tmp_path, "point", "--format", "json", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["w"] == pytest.approx(0.6708203932499369)


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "sg_edr.cli", "cnot"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("theta,")
    proc = subprocess.run([sys.executable, "-m", "sg_edr.cli", "bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
