import json

import numpy as np
import pytest

from nonlocal_vrp import cli
from nonlocal_vrp.bell import Behavior

REF_GAME = {"s": 1, "l": 2, "u_s": 1, "u_l": 1.5, "x": 1, "y": 3}


@pytest.fixture
def game_file(tmp_path):
    def make(**overrides):
        path = tmp_path / f"game{len(list(tmp_path.iterdir()))}.json"
        path.write_text(json.dumps(REF_GAME | overrides))
        return str(path)

    return make


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_pr_box(capsys, game_file):
    code, out, _ = run(capsys, "eval", "--game", game_file(), "--behavior", "pr-box")
    assert code == 0
    assert "earnings: 6.500000000" in out
    assert "chsh: 4.000000000" in out
    assert "closed_form: 6.500000000" in out


def test_certify_canonical(capsys):
    code, out, _ = run(capsys, "certify", "--behavior", "canonical-quantum")
    assert code == 0
    assert out.splitlines()[0] == "Nonlocal, CHSH = 2.828427125"


def test_certify_local_prints_weights(capsys):
    code, out, _ = run(capsys, "certify", "--behavior", "deterministic:1221")
    assert code == 0
    assert out.splitlines()[0] == "Local, CHSH = 2.000000000"
    assert "weight 1221: 1.000000000" in out


def test_invalid_game_exit_2(capsys, game_file):
    code, _, err = run(capsys, "eval", "--game", game_file(y=5), "--behavior", "uniform")
    assert code == 2
    assert "invalid game parameters" in err


def test_malformed_exit_3(capsys, tmp_path, game_file):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "eval", "--game", str(bad), "--behavior", "uniform")[0] == 3
    assert run(capsys, "eval", "--game", str(tmp_path / "missing.json"), "--behavior", "uniform")[0] == 3
    assert run(capsys, "eval", "--game", game_file(), "--behavior", "deterministic:9")[0] == 3
    table = tmp_path / "neg.json"
    table.write_text(json.dumps({"table": [[0.5, 0.5, 0.5, -0.5]] * 4}))
    assert run(capsys, "eval", "--game", game_file(), "--behavior", str(table))[0] == 3


def test_usage_error_exit_3(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["eval"])
    assert exc.value.code == 3


def test_signaling_exit_4(capsys, tmp_path):
    table = np.full((4, 4), 0.25)
    table[1] = [0.5, 0.25, 0.0, 0.25]
    path = tmp_path / "sig.json"
    path.write_text(json.dumps({"table": table.tolist()}))
    code, _, err = run(capsys, "certify", "--behavior", str(path))
    assert code == 4
    assert "signaling" in err


def test_export_round_trip(capsys, tmp_path, game_file):
    exported = tmp_path / "b.json"
    run(capsys, "certify", "--behavior", "canonical-quantum", "--export-behavior", str(exported))
    code, out, _ = run(capsys, "eval", "--game", game_file(), "--behavior", str(exported))
    assert code == 0
    assert "earnings: 6.426776695" in out
    again = tmp_path / "c.json"
    run(capsys, "eval", "--game", game_file(), "--behavior", str(exported), "--export-behavior", str(again))
    assert exported.read_text() == again.read_text()


def test_quantum_strategy_json(capsys, tmp_path):
    path = tmp_path / "q.json"
    path.write_text(json.dumps({"theta": 0.7853981633974483, "a0": 0, "a1": 1.5707963267948966, "b0": 0.7853981633974483, "b1": -0.7853981633974483}))
    code, out, _ = run(capsys, "certify", "--behavior", str(path))
    assert code == 0 and out.startswith("Nonlocal, CHSH = 2.828427125")


def test_tilted_eval_reports_discrepancy(capsys, game_file):
    code, out, _ = run(capsys, "eval", "--game", game_file(zeta=0.5), "--behavior", "deterministic:1111")
    assert code == 0
    assert "earnings: 6.625000000" in out
    assert "tilted_oracle: 6.625000000" in out
    assert "scaled_closed_form: 6.437500000" in out
    assert "note:" in out


def test_optimize(capsys, tmp_path, game_file):
    out_path = tmp_path / "opt.json"
    code, out, _ = run(capsys, "optimize", "--game", game_file(), "--out", str(out_path))
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("classical  6.375000000")
    assert any(line.startswith("quantum    6.426776695") for line in lines)
    assert any(line.startswith("ns         6.500000000") for line in lines)
    data = json.loads(out_path.read_text())
    Behavior.from_json(data["quantum"]["behavior"])
    assert set(data) == {"classical", "quantum", "ns"}


def test_optimize_bad_class(capsys, game_file):
    assert run(capsys, "optimize", "--game", game_file(), "--classes", "magic")[0] == 3


def test_scan(capsys, tmp_path):
    region = tmp_path / "region.json"
    region.write_text(json.dumps(REF_GAME | {"y": [1.5, 2.0, 2.5, 4.0]}))
    csv_path = tmp_path / "scan.csv"
    code, out, _ = run(capsys, "scan", "--region", str(region), "--out", str(csv_path), "--workers", "2")
    assert code == 0
    assert "skipped invalid points: 1" in out
    lines = csv_path.read_text().splitlines()
    assert len(lines) == 4
    adv = [float(line.split(",")[-1]) for line in lines[1:]]
    assert adv[0] > adv[1] > adv[2]


def test_scan_empty_region(capsys, tmp_path):
    region = tmp_path / "region.json"
    region.write_text(json.dumps(REF_GAME | {"y": [5.0]}))
    assert run(capsys, "scan", "--region", str(region), "--out", str(tmp_path / "x.csv"))[0] == 2


def test_simulate_byte_identical(capsys, tmp_path, game_file):
    game = game_file()
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    log = tmp_path / "log.csv"
    for path, workers in ((a, "1"), (b, "3")):
        code, _, _ = run(
            capsys, "simulate", "--game", game, "--behavior", "pr-box", "--rounds", "200000",
            "--seed", "42", "--out", str(path), "--workers", workers, "--log", str(log),
        )
        assert code == 0
    assert a.read_bytes() == b.read_bytes()
    report = json.loads(a.read_text())
    assert report["analytic_mean"] == 6.5
    assert abs(report["empirical_mean"] - 6.5) <= 5 * report["std_error"]
    assert len(log.read_text().splitlines()) == 200_001


def test_simulate_bad_rounds(capsys, tmp_path, game_file):
    code = run(capsys, "simulate", "--game", game_file(), "--behavior", "uniform", "--rounds", "0", "--out", str(tmp_path / "r.json"))[0]
    assert code == 3
