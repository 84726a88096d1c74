import json

import pytest

from heatindex.cli import (
    SUITES,
    CheckRecord,
    ConfigError,
    VerificationReport,
    emit_report,
    load_config,
    main,
    run_suite,
)

QUICK = """\
[models]
flux = 1, 2
charge = -1, 1
landau_levels = 32
monopole_cutoff = 32

[sweeps]
t = 0.1, 0.5
"""


@pytest.fixture
def quick_config(tmp_path):
    p = tmp_path / "quick.ini"
    p.write_text(QUICK)
    return p


def test_list_suites(capsys):
    assert main(["list-suites"]) == 0
    assert capsys.readouterr().out.split() == list(SUITES)


def test_empty_config_is_rejected(tmp_path, capsys):
    p = tmp_path / "empty.ini"
    p.write_text("")
    assert main(["run", "--config", str(p)]) == 2
    assert "no sections" in capsys.readouterr().err


def test_missing_config(tmp_path):
    assert main(["run", "--config", str(tmp_path / "absent.ini")]) == 2


@pytest.mark.parametrize(
    "text, fragment",
    [
        ("[bogus]\nx = 1\n", "unknown config sections"),
        ("[models]\nflavour = 3\n", "unknown key"),
        ("[sweeps]\nt = 0.5, 0.1, 0.2\n", "monotone"),
        ("[sweeps]\nt = -1\n", "positive"),
        ("[tolerances]\npairing = 0\n", "positive"),
        ("[run]\nsuite = nope\n", "unknown suite"),
        ("[models]\nprefactor_power = half\n", "prefactor_power"),
    ],
)
def test_invalid_configs(tmp_path, text, fragment):
    p = tmp_path / "bad.ini"
    p.write_text(text)
    with pytest.raises(ConfigError, match=fragment):
        load_config(p)


def test_defaults_fill_in(quick_config):
    cfg = load_config(quick_config, suite="mckean-singer")
    assert cfg.flux == (1, 2)
    assert cfg.jlo_t == (0.02, 0.01, 0.005, 0.0025)
    assert cfg.tolerances["pairing"] == 0.05
    assert cfg.prefactor_power is None


def test_prefactor_override(tmp_path):
    p = tmp_path / "p.ini"
    p.write_text("[models]\nprefactor_power = 0\n")
    assert load_config(p).prefactor_power == 0


def test_passing_suite(quick_config, tmp_path, capsys):
    out = tmp_path / "rep"
    code = main(["run", "--config", str(quick_config), "--suite", "mckean-singer", "--out", str(out)])
    assert code == 0
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] and report["suite"] == "mckean-singer"
    assert len(report["checks"]) == 2 * 4 * 2
    assert (out / "mckean_singer.csv").exists()
    assert "overall: PASS" in capsys.readouterr().out


def test_failing_check_exits_one(tmp_path):
    p = tmp_path / "strict.ini"
    p.write_text(QUICK + "\n[tolerances]\nmckean_singer = 1e-300\n")
    out = tmp_path / "rep"
    assert main(["run", "--config", str(p), "--suite", "mckean-singer", "--out", str(out)]) == 1
    assert json.loads((out / "report.json").read_text())["passed"] is False


def test_csv_is_reproducible(quick_config, tmp_path):
    bodies = []
    for i in range(2):
        cfg = load_config(quick_config, suite="mckean-singer", out=tmp_path / f"r{i}")
        paths = emit_report(run_suite(cfg), cfg.out)
        bodies.append({p.name: p.read_bytes() for p in paths if p.suffix == ".csv"})
    assert bodies[0] and bodies[0] == bodies[1]


def test_check_record_measures():
    rel = CheckRecord.compare("r", 1.01, 1.0, 0.02, relative=True)
    assert rel.passed and rel.meta["measure"] == "relative"
    assert not CheckRecord.compare("a", 1j, 0, 0.5).passed
    zero = CheckRecord.compare("z", 0, 0, 1e-12, relative=True)
    assert zero.passed and zero.rel_err == 0
    b = CheckRecord.bound("lower", 2.0, 1.5, upper=False)
    assert b.passed and b.as_dict()["abs_err"] is None


def test_report_serialises_complex(tmp_path):
    rep = VerificationReport("x", "now", [CheckRecord.compare("c", 1 + 2j, 1 + 2j, 1e-12)])
    data = json.loads(emit_report(rep, tmp_path)[0].read_text())
    assert data["checks"][0]["lhs"] == {"re": 1.0, "im": 2.0}
