import json
import shutil
from pathlib import Path

import pytest

from scmci.cli import main
from scmci.config import ScenarioConfig, load_config, parse_config
from scmci.errors import ConfigError

DATA = Path(__file__).parent / "data"


def run(*argv):
    return main([str(a) for a in argv])


def test_default_run(tmp_path, capsys):
    assert run("run", "--out", tmp_path) == 0
    log = (tmp_path / "steps.log").read_text()
    steps = {int(line.split()[1]) for line in log.splitlines() if line.startswith("Step")}
    assert steps == set(range(1, 31))
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["status"] == "COMPLETE" and summary["census"]["ENVELOPE"] == 5
    assert (tmp_path / "run.transcript").stat().st_size > 0
    assert (tmp_path / "report.csv").read_text().startswith("phase,")
    assert "backend" in json.loads((tmp_path / "timing.json").read_text())


def test_summary_matches_golden(tmp_path):
    assert run("run", "--out", tmp_path) == 0
    assert (tmp_path / "summary.json").read_text() == (DATA / "golden_summary.json").read_text()


def test_same_seed_same_outputs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run("run", "--seed", 9, "--out", a) == run("run", "--seed", 9, "--out", b) == 0
    for name in ("run.transcript", "summary.json", "steps.log", "report.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_tamper_exits_2_with_step(tmp_path, capsys):
    # frame 10 is the purchase bundle; bit 100 lands inside the merchant part
    assert run("run", "--tamper", "10:100", "--out", tmp_path) == 2
    err = capsys.readouterr().err
    assert "step 18" in err or "step 17" in err
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["status"] == "ABORTED" and summary["abort"]["step"] in (17, 18)


def test_tamper_out_of_range_is_config_error(tmp_path, capsys):
    assert run("run", "--tamper", "0:999999", "--out", tmp_path) == 3
    assert "tamper" in capsys.readouterr().err


@pytest.mark.parametrize(
    "flag, value, field",
    [("--rsa-bits", "12", "rsa_bits"), ("--seed", "-1", "seed"), ("--tamper", "x", "tamper"), ("--fixtures", "11", "fixtures")],
)
def test_bad_flags_exit_3(tmp_path, capsys, flag, value, field):
    assert run("run", flag, value, "--out", tmp_path) == 3
    assert field in capsys.readouterr().err


def test_config_file(tmp_path):
    cfg = tmp_path / "scenario.cfg"
    cfg.write_text("# scenario\nseed = 7\nprotocol = baseline\nfixtures = 1,2\n")
    assert run("run", "--config", cfg, "--out", tmp_path / "o") == 0
    summary = json.loads((tmp_path / "o" / "summary.json").read_text())
    assert summary["protocol"] == "baseline" and len(summary["sessions"]) == 2
    assert summary["public_key_ops"]["baseline"] >= 2 * 4


def test_config_roundtrip_and_errors(tmp_path):
    c = ScenarioConfig(seed=5, fixtures=(1, 3))
    p = tmp_path / "c.cfg"
    p.write_text(c.to_text())
    assert load_config(p) == c
    with pytest.raises(ConfigError) as err:
        parse_config("colour = blue")
    assert err.value.field == "colour"
    with pytest.raises(ConfigError):
        parse_config("no equals sign")
    with pytest.raises(ConfigError) as err:
        load_config(tmp_path / "missing.cfg")
    assert err.value.field == "config"


def test_attack_baseline(tmp_path, capsys):
    assert run("attack", "--protocol", "baseline", "--out", tmp_path) == 0
    rep = json.loads((tmp_path / "attack.json").read_text())
    r = rep["runs"][0]
    assert r["outcome"] == "RECOVERED" and r["query_count"] <= 130


def test_attack_scmci_exits_0(tmp_path):
    assert run("attack", "--out", tmp_path, "--attack-seeds", 2) == 0
    runs = json.loads((tmp_path / "attack.json").read_text())["runs"]
    assert [r["reason"] for r in runs] == ["NO_ITERATIVE_ORACLE"] * 2
    assert all(r["honest_rerun"] == "COMPLETE" for r in runs)


def test_run_with_attack_toggle(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("attack = true\n")
    assert run("run", "--config", cfg, "--out", tmp_path) == 0
    assert (tmp_path / "attack.json").exists()


def test_analyze(tmp_path, capsys):
    assert run("run", "--out", tmp_path) == 0
    assert run("analyze", "--out", tmp_path / "an", tmp_path / "run.transcript") == 0
    res = json.loads((tmp_path / "an" / "analysis.json").read_text())
    assert res[0]["frames"] == 21


def test_analyze_bad_inputs(tmp_path):
    empty = tmp_path / "empty.transcript"
    empty.write_bytes(b"")
    assert run("analyze", "--out", tmp_path, empty) == 3
    assert run("analyze", "--out", tmp_path) == 3
    assert run("analyze", "--out", tmp_path, tmp_path / "nope.transcript") == 3
    junk = tmp_path / "junk.transcript"
    junk.write_bytes(b"\x00\x00\x00\x05hello")
    assert run("analyze", "--out", tmp_path, junk) == 3


def test_report(tmp_path):
    assert run("report", "--out", tmp_path) == 0
    rows = (tmp_path / "report.csv").read_text().splitlines()
    assert rows[0] == "stream,protocol,entropy,bytes,reference" and len(rows) == 5
    assert len((tmp_path / "histograms.txt").read_text().splitlines()) == 4 * 257
    first = (tmp_path / "entropy.json").read_bytes()
    assert run("report", "--out", tmp_path) == 0
    assert (tmp_path / "entropy.json").read_bytes() == first
