from __future__ import annotations

import json

import pytest

from smslab.cli import main
from smslab.scenario import parse_scenario


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_p73_fixture_json(capsys, fixtures_dir):
    code, out, _ = run(capsys, "verify", "--prop", "p73", "--scenario", str(fixtures_dir / "fix_p73.json"),
                       "--format", "json")
    assert code == 0
    report = json.loads(out)
    assert [c["verdict"] for c in report["checks"]] == ["verified"]


def test_dist_prints_two_thirds(capsys, fixtures_dir):
    code, out, _ = run(capsys, "dist", "--scenario", str(fixtures_dir / "fix_b.json"), "--step", "1",
                       "--set", '[["qa","0"]]')
    assert (code, out.strip()) == (0, "2/3")


def test_broken_fixture_exits_one(capsys, fixtures_dir):
    code, out, _ = run(capsys, "verify", "--prop", "p81", "--scenario", str(fixtures_dir / "broken.json"))
    assert code == 1
    assert "precondition-failed" in out


def test_epsilon_override_fails_p73(capsys, fixtures_dir):
    code, out, _ = run(capsys, "verify", "--scenario", str(fixtures_dir / "fix_p73.json"), "--epsilon", "0")
    assert code == 1
    assert "[FAIL] (3) calibration at epsilon" in out


def test_limit_and_respond(capsys, fixtures_dir):
    assert run(capsys, "limit", "--scenario", str(fixtures_dir / "fix_a.json"), "--set", '[["qa","0"]]')[1] == "1/2\n"
    code, out, _ = run(capsys, "respond", "--scenario", str(fixtures_dir / "fix_b.json"), "--questions", "qb",
                       "--step", "1")
    assert code == 0 and out.split("\n")[:2] == ["0\t1/2", "1\t1/2"]


def test_calibrate_and_embed(capsys, fixtures_dir):
    code, out, _ = run(capsys, "calibrate", "--scenario", str(fixtures_dir / "sc_id.json"), "--q", "qa",
                       "--format", "json")
    assert code == 0
    assert json.loads(out)["checks"][0]["details"]["score"] == pytest.approx(0.6931471805599453)
    code, _, _ = run(capsys, "calibrate", "--scenario", str(fixtures_dir / "sc_id.json"), "--q", "qa",
                     "--epsilon", "0.5")
    assert code == 1
    assert run(capsys, "embed", "--scenario", str(fixtures_dir / "fix_emb.json"))[0] == 0


def test_evidence_and_abduct(capsys, fixtures_dir):
    ev = str(fixtures_dir / "fix_ev.json")
    paths = '[[["e1","1"]],[["e2","1"]]]'
    for mode in ("collection", "nonthwarting", "derive"):
        code, _, _ = run(capsys, "evidence", "--scenario", ev, "--question", "x", "--target", "1",
                         "--paths", paths, "--mode", mode)
        assert code == 0, mode
    code, out, _ = run(capsys, "abduct", "--scenario", str(fixtures_dir / "fix_ab.json"), "--q-star", "qs",
                       "--v-star", "1", "--q-dagger", "qd", "--v-dagger", "1", "--format", "json")
    assert code == 0
    assert json.loads(out)["checks"][0]["conclusion"]["lhs"] == "3/2"


def test_construct_emits_a_scenario(capsys, tmp_path):
    code, out, _ = run(capsys, "construct", "--prop", "projection", "--seed", "1")
    assert code == 0
    assert parse_scenario(out).checks[0]["prop"] == "projection"
    target = tmp_path / "p81.json"
    assert run(capsys, "construct", "--prop", "p81", "--out", str(target))[0] == 0
    assert run(capsys, "verify", "--scenario", str(target))[0] == 0


def test_search_command(capsys):
    code, out, _ = run(capsys, "search", "--prop", "p81", "--ablate", "premise", "--trials", "20", "--format", "json")
    assert code == 0
    assert json.loads(out)["found"] is True


def test_json_output_is_stable(capsys, fixtures_dir):
    argv = ["verify", "--scenario", str(fixtures_dir / "fix_p82.json"), "--format", "json", "--seed", "9"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


@pytest.mark.parametrize("argv", [
    ["dist"],
    ["dist", "--scenario", "missing.json"],
    ["dist", "--scenario", "FIX", "--set", "[oops"],
    ["nonsense"],
    ["verify", "--scenario", "FIX", "--prop", "p99"],
])
def test_usage_errors_exit_two(capsys, fixtures_dir, argv):
    argv = [str(fixtures_dir / "fix_b.json") if a == "FIX" else a for a in argv]
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_bad_scenario_exits_two(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"sms1": {"questions": ["qa"], "answers": ["0"], "mode": "per-step", '
                    '"steps": [[{"vector": [["qa", "0"]], "p": "1/2"}]]}}')
    code, _, err = run(capsys, "validate", "--scenario", str(path))
    assert code == 2
    assert "sums to 1/2" in err
