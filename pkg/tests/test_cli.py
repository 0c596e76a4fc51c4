import csv
import json
import math

import pytest

from qwalk import cli
from qwalk.evolution import WindowOverflowError


def run_csv(tmp_path, *argv, name="out.csv"):
    out = tmp_path / name
    code = cli.main([*argv, "--out", str(out)])
    assert code == 0
    with open(out, newline="") as fh:
        return list(csv.DictReader(fh)), out


@pytest.mark.parametrize(
    "text, value",
    [
        ("pi/6", math.pi / 6),
        ("π/8", math.pi / 8),
        ("pi", math.pi),
        ("2*pi/3", 2 * math.pi / 3),
        ("-pi/4", -math.pi / 4),
        ("0.5235987755982988", 0.5235987755982988),
    ],
)
def test_parse_angle(text, value):
    assert cli.parse_angle(text) == value


def test_parse_angle_rejects_garbage():
    with pytest.raises(Exception):
        cli.parse_angle("pie")


def test_simulate_trapping_run(tmp_path):
    rows, out = run_csv(
        tmp_path, "simulate", "--theta", "0.5235987755982988", "--phi", "0.5", "--defect-pos", "2", "--steps", "480"
    )
    best = max(rows, key=lambda r: float(r["probability"]))
    assert int(best["position"]) == 2
    assert abs(sum(float(r["probability"]) for r in rows) - 1) < 1e-12
    raw = out.read_bytes()
    assert raw.startswith(b"position,probability,alpha_re,alpha_im,beta_re,beta_im\n")
    assert b"\r" not in raw
    man = json.loads((tmp_path / "out.csv.manifest.json").read_text())
    assert man["command"] == "simulate" and man["parameters"]["steps"] == 480
    assert {"version", "timestamp", "tool"} <= man.keys()


def test_simulate_zero_steps(tmp_path):
    rows, _ = run_csv(tmp_path, "simulate", "--phi", "0", "--steps", "0")
    assert len(rows) == 1
    assert int(rows[0]["position"]) == 0 and float(rows[0]["probability"]) == pytest.approx(1, abs=1e-15)


def test_simulate_default_steps_parity(tmp_path):
    rows, _ = run_csv(tmp_path, "simulate", "--theta", "pi/8", "--defect-pos", "3")
    assert len(rows) == 2 * 481 + 1


def test_simulate_json(tmp_path):
    out = tmp_path / "o.json"
    assert cli.main(["simulate", "--steps", "3", "--format", "json", "--out", str(out)]) == 0
    data = json.loads(out.read_text())
    assert set(data) == {"manifest", "records"}
    assert len(data["records"]) == 7
    assert sum(r["probability"] for r in data["records"]) == pytest.approx(1, abs=1e-12)


def test_usage_errors(capsys):
    assert cli.main(["simulate", "--phi", "1.5"]) == 2
    assert cli.main(["boundstates", "--theta", "2.0"]) == 2
    assert cli.main(["scan", "--scan", "defect-pos", "--values", "a,b"]) == 2
    with pytest.raises(SystemExit) as exc:
        cli.main(["simulate", "--steps", "many"])
    assert exc.value.code == 2


def test_overflow_exit(monkeypatch):
    def boom(*a, **k):
        raise WindowOverflowError("edge")

    monkeypatch.setattr(cli, "evolve", boom)
    assert cli.main(["simulate", "--steps", "2"]) == 3


def test_boundstates_blocks(tmp_path):
    rows, _ = run_csv(tmp_path, "boundstates", "--theta", "pi/6", "--phi", "0.5")
    states = sorted({int(r["state"]) for r in rows})
    assert states == [0, 1]
    for s in states:
        block = [r for r in rows if int(r["state"]) == s]
        norm = sum(float(r["alpha_abs"]) ** 2 + float(r["beta_abs"]) ** 2 for r in block)
        assert abs(norm - 1) < 1e-10
        for r in block:
            if int(r["offset"]) % 2:
                assert float(r["alpha_abs"]) == 0 and float(r["beta_abs"]) == 0
        assert len({r["eigenphase"] for r in block}) == 1


def test_boundstates_none(tmp_path):
    rows, _ = run_csv(tmp_path, "boundstates", "--phi", "0")
    assert rows == []
    man = json.loads((tmp_path / "out.csv.manifest.json").read_text())
    assert man["bound_states"] == 0 and "note" in man


def column(rows, key):
    return {r["value"]: float(r[key]) for r in rows}


def test_scan_defect_positions(tmp_path):
    rows, _ = run_csv(
        tmp_path, "scan", "--scan", "defect-pos", "--values", "0,1,2,3,4,5,6,7,8,9,10", "--theta", "pi/6", "--phi", "0.5"
    )
    p = {int(k): v for k, v in column(rows, "predicted").items()}
    assert list(p) == list(range(11))
    assert p[2] > p[6] > p[10] > 0
    assert all(r["simulated"] == "" for r in rows)


@pytest.mark.parametrize("values, m, best", [("pi/8,pi/6,pi/4", 2, 1), ("pi/10,pi/8,pi/6", 3, 1)])
def test_scan_theta(tmp_path, values, m, best):
    rows, _ = run_csv(tmp_path, "scan", "--scan", "theta", "--values", values, "--defect-pos", str(m))
    preds = [float(r["predicted"]) for r in rows]
    assert preds.index(max(preds)) == best


def test_scan_simulate_check(tmp_path):
    rows, _ = run_csv(
        tmp_path, "scan", "--scan", "theta", "--values", "pi/6", "--defect-pos", "2", "--simulate-check", "1000"
    )
    assert float(rows[0]["relative_deviation"]) < 0.10


def test_threads_env(monkeypatch):
    monkeypatch.setenv("QWALK_THREADS", "1")
    assert cli._workers(10) == 1
    monkeypatch.setenv("QWALK_THREADS", "3")
    assert cli._workers(10) == 3
    assert cli._workers(2) == 2


def test_deterministic_bodies(tmp_path):
    argv = ["simulate", "--theta", "pi/6", "--phi", "0.5", "--defect-pos", "2", "--steps", "200"]
    _, a = run_csv(tmp_path, *argv, name="a.csv")
    _, b = run_csv(tmp_path, *argv, name="b.csv")
    assert a.read_bytes() == b.read_bytes()


@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--theta", "pi/8", "--defect-pos", "3", "--steps", "51", "--varphi", "0.3"],
        ["boundstates", "--theta", "pi/4"],
        ["scan", "--scan", "theta", "--values", "pi/8,pi/6", "--defect-pos", "2"],
    ],
)
def test_rerun_from_manifest(tmp_path, argv):
    _, first = run_csv(tmp_path, *argv, name="first.csv")
    second = tmp_path / "second.csv"
    assert cli.main(["rerun", str(first) + ".manifest.json", "--out", str(second)]) == 0
    assert first.read_bytes() == second.read_bytes()
