import json

import pytest

from feynwalk import cli
from feynwalk.config import DEFAULT_TOLERANCES, OUTPUT_ENV, RunConfig


@pytest.fixture
def run(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "out"))

    def _run(*argv):
        code = cli.main(list(argv))
        cap = capsys.readouterr()
        return code, cap.out, cap.err
    _run.out = tmp_path / "out"
    return _run


# ---------------------------------------------------------------------------
# config
# ---------------------------------------------------------------------------
def test_config_round_trip(tmp_path):
    c = RunConfig(seed=5, tolerances={"ks": 0.02}, thresholds={"k1": 16})
    d = c.to_dict()
    assert d["tolerances"]["ks"] == 0.02 and d["tolerances"]["sigma"] == DEFAULT_TOLERANCES["sigma"]
    assert d["thresholds"] == {"n0": 8, "k1": 16, "j1": 2}
    path = tmp_path / "c.json"
    path.write_text(json.dumps(d))
    back = RunConfig.load(path)
    assert back.to_dict() == d and back.tol("ks") == 0.02


@pytest.mark.parametrize("bad", [{"seed": -1}, {"seed": 2 ** 64}, {"tolerances": {"nope": 1}},
                                 {"colour": "red"}])
def test_config_rejects(bad):
    with pytest.raises(ValueError):
        RunConfig.from_dict(bad)


def test_env_override(monkeypatch, tmp_path):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "x"))
    assert RunConfig(output_dir="elsewhere").resolved_output_dir() == tmp_path / "x"
    monkeypatch.delenv(OUTPUT_ENV)
    assert str(RunConfig(output_dir="elsewhere").resolved_output_dir()) == "elsewhere"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------
def test_amplitudes_ell2(run):
    code, out, _ = run("amplitudes", "--ell", "2")
    assert code == 0
    rows = dict(line.split("\t") for line in out.splitlines())
    assert rows["0"] == "(-1/2) + (-2)i"
    assert (run.out / "amplitudes" / "amplitudes_2.csv").exists()


def test_amplitudes_ell0(run):
    code, out, _ = run("amplitudes", "--ell", "0")
    lines = out.splitlines()
    assert code == 0 and len(lines) == 1 and lines[0].startswith("0\t(1) + (0)i")


def test_amplitudes_verify(run):
    code, out, _ = run("amplitudes", "--ell", "40", "--j", "0", "--verify")
    assert code == 0 and "4/4 methods agree" in out


@pytest.mark.parametrize("argv", [
    ["amplitudes", "--ell", "-1"],
    ["amplitudes", "--ell", "3", "--j", "5"],
    ["amplitudes"],
    ["nosuch"],
    ["--threads", "0", "c2", "--n", "5"],
    ["c2", "--n", "0"],
    ["brownian", "build", "--levels", "0"],
    ["schrodinger", "evolve", "--m", "2", "--steps", "1", "--g", "file"],
])
def test_usage_errors(run, argv):
    assert run(*argv)[0] == 2


def test_table1_default_reports_mismatches(run):
    code, out, err = run("table1")
    assert code == 1
    assert "22/25 golden cells match" in out
    assert err.count("MISMATCH") == 3
    diff = json.loads((run.out / "table1" / "table1_diff.json").read_text())
    assert {(d["n"], d["m"]) for d in diff} == {(2, 2), (3, 3), (3, 4)}


def test_table1_tampered_golden(run, tmp_path):
    from feynwalk.coupled import load_table1_golden, table1_grid
    grid = table1_grid()
    rows = {str(n): [grid[(n, m)] for m in range(5)] for n in range(1, 6)}
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"rows": rows}))
    assert load_table1_golden(good)[(1, 0)] == grid[(1, 0)]
    assert run("table1", "--golden", str(good))[0] == 0
    rows["1"][0] = ".9999/.5"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"rows": rows}))
    code, _, err = run("table1", "--golden", str(bad))
    assert code == 1 and "n=1 m=0" in err


def test_table1_extended_rows(run):
    code, out, _ = run("table1", "--n-max", "8")
    lines = out.splitlines()
    assert lines[8].startswith("8\t")
    assert code == 1  # only the three known cells differ
    assert "22/25" in lines[-1]


def test_c2_command(run):
    code, out, _ = run("c2", "--n", "1000")
    assert code == 0
    assert "c2(n=1000) = 0.4105140 + 0.0969363i" in out
    payload = json.loads((run.out / "c2" / "c2.json").read_text())
    assert payload["c2"] == pytest.approx([0.410514, 0.0969363], abs=1e-6)


def test_asympt_hinh(run):
    code, out, _ = run("asympt", "hinh")
    assert code == 0 and "-0.1550461 + 0.8420360i" in out


def test_brownian_byte_identical(run):
    a = run("brownian", "build", "--mode", "lazy", "--levels", "8", "--seed", "7")
    first = {p.name: p.read_bytes() for p in (run.out / "brownian").glob("*.csv")}
    b = run("brownian", "build", "--mode", "lazy", "--levels", "8", "--seed", "7")
    second = {p.name: p.read_bytes() for p in (run.out / "brownian").glob("*.csv")}
    assert a[0] == b[0] == 0
    assert len(first) == 9 and first == second
    head = first["replica0_level8.csv"].decode().splitlines()
    assert head[0] == "t,value" and len(head) == 4 ** 8 + 2


def test_brownian_threads_match_serial(run):
    run("brownian", "build", "--levels", "4", "--replicas", "4", "--write-lines", "0")
    serial = (run.out / "brownian" / "diagnostics.json").read_text()
    run("--threads", "3", "brownian", "build", "--levels", "4", "--replicas", "4", "--write-lines", "0")
    assert (run.out / "brownian" / "diagnostics.json").read_text() == serial


def test_markov_fit(run):
    code, out, _ = run("markov", "fit", "--n", "64")
    assert code == 0
    payload = json.loads((run.out / "markov" / "markov_64.json").read_text())
    assert payload["status"] == "ok"
    assert all(abs(r["p_up"] - 0.25) < 0.05 and abs(r["p_down"] - 0.25) < 0.05 for r in payload["rows"])


def test_schrodinger_file_inputs(run, tmp_path):
    g = tmp_path / "g.csv"
    g.write_text("x,g\n0,1\n")
    V = tmp_path / "V.csv"
    V.write_text("x,V\n0,0\n")
    code, out, _ = run("schrodinger", "evolve", "--m", "0", "--steps", "1", "--g", "file",
                       "--g-file", str(g), "--potential", "file", "--potential-file", str(V))
    assert code == 0
    rows = out.splitlines()
    assert rows[0] == "x,re,im,abs2"
    assert [r for r in rows if r.startswith("0.0,")][0].startswith("0.0,1.0,-1.0,")
    assert [r for r in rows if r.startswith("1.0,")][0].startswith("1.0,0.0,0.5,")
    off = tmp_path / "off.csv"
    off.write_text("0.3,1\n")
    assert run("schrodinger", "evolve", "--m", "0", "--steps", "1", "--g", "file", "--g-file", str(off))[0] == 2


def test_run_json_embeds_config(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 99, "tolerances": {"ks": 0.02}}))
    assert run("--config", str(cfg), "asympt", "hinh", "--m", "1")[0] == 0
    art = json.loads((run.out / "hinh" / "run.json").read_text())
    assert art["config"]["seed"] == 99 and art["config"]["tolerances"]["ks"] == 0.02
    assert art["config"]["output_dir"] == str(run.out)
    assert art["command"][:2] == ["feynwalk", "--config"]
    assert art["exit_code"] == 0 and art["version"]
    assert any(p.endswith("h_inh.json") for p in art["payloads"])


def test_bad_config_file_is_usage_error(run, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": -4}))
    assert run("--config", str(cfg), "asympt", "hinh")[0] == 2
    assert run("--config", str(tmp_path / "missing.json"), "asympt", "hinh")[0] == 2


def test_all_subset(run):
    code, out, _ = run("all", "--only", "3", "14")
    assert code == 0 and "2/2 criteria passed" in out
    data = json.loads((run.out / "acceptance" / "acceptance.json").read_text())
    assert [d["number"] for d in data] == [3, 14]
