import json

import pytest

from mdimshift.cli import main


def run(tmp_path, *args, name="out"):
    return main([args[0], "--out", str(tmp_path / name), *args[1:]])


def test_tower_default_passes(tmp_path):
    assert run(tmp_path, "tower") == 0
    doc = json.loads((tmp_path / "out" / "tower-verify.json").read_text())
    assert doc["ok"] and doc["schema"] == 1 and doc["config"]["group"] == "Z"


def test_tower_corrupted_fixture(tmp_path, capsys):
    assert run(tmp_path, "tower", "--fixture", "corrupt-tower") == 2
    assert "prime_congruence" in capsys.readouterr().err


def test_bad_group_is_config_error(tmp_path, capsys):
    assert run(tmp_path, "tower", "--group", "Q") == 1
    assert "unsupported group" in capsys.readouterr().err


def test_unknown_fixture_is_config_error(tmp_path):
    assert run(tmp_path, "tower", "--fixture", "nope") == 1


def test_bad_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"grop": "Z"}))
    assert run(tmp_path, "construct", "--config", str(cfg)) == 1


def test_depth_past_tower_is_reported(tmp_path, capsys):
    assert run(tmp_path, "construct", "--depth", "4") == 1
    assert "tower exhausted; need level >=" in capsys.readouterr().err


def test_verify_without_steps(tmp_path):
    assert run(tmp_path, "verify") == 1


def test_construct_d2_doubles_slots(tmp_path):
    assert run(tmp_path, "construct", "--depth", "2", name="d1") == 0
    assert run(tmp_path, "construct", "--depth", "2", "--d", "2", name="d2") == 0
    s1 = json.loads((tmp_path / "d1" / "steps.json").read_text())["steps"]
    s2 = json.loads((tmp_path / "d2" / "steps.json").read_text())["steps"]
    # step 1 does not see d; later steps do, through |R| = |P|^(d m)
    assert s1[0]["m"] == s2[0]["m"] and int(s2[0]["slots"]) == 2 * int(s1[0]["slots"])
    assert all(int(s["slots"]) == 2 * int(s["m"]) for s in s2)
    assert int(s2[1]["r_size"]) == int(s1[1]["r_size"]) ** 2


def test_h_in_R_fixture_fails_construct(tmp_path, capsys):
    assert run(tmp_path, "construct", "--depth", "2", "--fixture", "h-in-R") == 2
    assert "R.1" in capsys.readouterr().err


@pytest.mark.slow
def test_full_pipeline_and_fixtures(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"pairs": 20, "pairs_k2": 3, "centers": 20, "samples": 50}))
    c = ["--config", str(cfg)]
    assert run(tmp_path, "construct", *c) == 0
    assert run(tmp_path, "verify", *c) == 0
    assert run(tmp_path, "report", *c) == 0
    out = tmp_path / "out"
    for name in ("ratio-report.json", "ratio-report.csv", "certificate.json", "almost-periodicity.json",
                 "lemma36.json", "z-window.json", "condition-report.json"):
        assert (out / name).exists()
    capsys.readouterr()
    assert run(tmp_path, "verify", *c, "--fixture", "delta-increasing") == 2
    assert "FAIL C.2.3" in capsys.readouterr().err
    assert run(tmp_path, "verify", *c, "--fixture", "corrupt-z") == 2
    assert "Part2(m=1)" in capsys.readouterr().err
