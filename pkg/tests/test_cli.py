import csv
import io
import json

import numpy as np
import pytest

from homsim import cli, hom_interferometer


def run_cli(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.main(list(argv), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def records(text):
    return cli.read_csv(io.StringIO(text))


def test_run_superposition():
    code, out, err = run_cli("run", "--scenario", "superposition", "--trials", "100000", "--seed", "42")
    assert code == 0 and err == ""
    header = out.splitlines()[0]
    assert header == ",".join(cli.FIELDNAMES)
    assert header == "scenario,model,gamma,eta,trials,coincidences,rate,ci_low,ci_high,analytic,seed"
    (rec,) = records(out)
    assert rec.coincidences == 0 and rec.analytic == 0.0
    assert rec.gamma is None and rec.eta == 1.0


def test_run_collapse():
    code, out, _ = run_cli("run", "--scenario", "collapse", "--seed", "42")
    (rec,) = records(out)
    assert code == 0
    assert rec.trials == 100_000
    assert rec.analytic == pytest.approx(0.25, abs=1e-12)
    assert rec.ci_low <= rec.rate <= rec.ci_high
    assert rec.ci_low <= 0.25 <= rec.ci_high


def test_dephasing_zero_equals_superposition():
    _, a, _ = run_cli("run", "--scenario", "dephasing", "--gamma", "0", "--trials", "5000", "--seed", "3")
    _, b, _ = run_cli("run", "--scenario", "superposition", "--trials", "5000", "--seed", "3")
    ra, rb = records(a)[0], records(b)[0]
    assert (ra.coincidences, ra.rate, ra.analytic, ra.ci_low, ra.ci_high) == \
        (rb.coincidences, rb.rate, rb.analytic, rb.ci_low, rb.ci_high)


@pytest.mark.parametrize("scenario, model, eta", [
    ("superposition", "unitary_erased", 1.0),
    ("recorded", "unitary_recorded", 1.0),
    ("collapse", "projective_collapse", 1.0),
    ("distinguishable", "unitary_erased", 0.0),
])
def test_scenario_mapping(scenario, model, eta):
    code, out, _ = run_cli("run", "--scenario", scenario, "--trials", "100")
    rec = records(out)[0]
    assert code == 0 and rec.model == model and rec.eta == eta


def test_help_documents_every_scenario(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["run", "--help"])
    text = " ".join(capsys.readouterr().out.split())
    for name in cli.SCENARIOS:
        assert name in text


@pytest.mark.parametrize("argv", [
    ["run", "--scenario", "nope"],
    ["run"],
    ["run", "--scenario", "dephasing"],
    ["run", "--scenario", "collapse", "--gamma", "0.2"],
    ["run", "--scenario", "dephasing", "--gamma", "1.5"],
    ["run", "--scenario", "collapse", "--trials", "abc"],
    ["run", "--scenario", "collapse", "--trials", "0"],
    ["run", "--scenario", "distinguishable", "--eta", "0.5"],
    ["sweep", "--param", "gamma", "--from", "1", "--to", "0", "--steps", "3"],
    ["sweep", "--param", "gamma", "--from", "0", "--to", "2", "--steps", "3"],
    ["sweep", "--param", "gamma", "--from", "0", "--to", "1", "--steps", "1"],
    ["sweep", "--param", "gamma", "--scenario", "collapse", "--from", "0", "--to", "1", "--steps", "2"],
    ["sweep", "--param", "theta", "--from", "0", "--to", "1", "--steps", "2"],
    ["oracle-check", "--samples", "0"],
])
def test_usage_errors_exit_2(argv):
    code, out, _ = run_cli(*argv)
    assert code == 2
    assert out == ""


def test_sweep_gamma_grid():
    code, out, _ = run_cli("sweep", "--param", "gamma", "--from", "0", "--to", "1", "--steps", "3",
                           "--trials", "2000")
    recs = records(out)
    assert code == 0
    assert [r.gamma for r in recs] == [0.0, 0.5, 1.0]
    assert [r.analytic for r in recs] == pytest.approx([0.0, 0.1875, 0.25], abs=1e-12)
    assert all(r.scenario == "dephasing" for r in recs)


def test_sweep_eta_with_superposition():
    code, out, _ = run_cli("sweep", "--param", "eta", "--from", "0", "--to", "1", "--steps", "2",
                           "--scenario", "superposition", "--trials", "2000")
    recs = records(out)
    assert code == 0
    assert [r.eta for r in recs] == [0.0, 1.0]
    assert [r.analytic for r in recs] == pytest.approx([0.5, 0.0], abs=1e-12)


def test_sweep_grid_endpoints():
    assert cli.sweep_grid(0.0, 1.0, 2) == [0.0, 1.0]
    grid = cli.sweep_grid(0.1, 0.7, 7)
    assert grid[0] == 0.1 and grid[-1] == 0.7 and len(grid) == 7


def test_oracle_check_cli():
    code, out, _ = run_cli("oracle-check", "--samples", "1000", "--seed", "7")
    assert code == 0 and "PASS" in out
    code, _, _ = run_cli("oracle-check", "--samples", "1")
    assert code == 0


def test_oracle_check_fails_on_tampered_closed_form(monkeypatch):
    def tampered(rho1, rho2, eta=1.0):
        overlap = float(np.real(np.trace(rho1.matrix @ rho2.matrix)))
        return (1 + eta * overlap) / 2

    monkeypatch.setattr(hom_interferometer, "coincidence_probability", tampered)
    code, out, _ = run_cli("oracle-check", "--samples", "50", "--seed", "7")
    assert code == 1 and "FAIL" in out


def test_csv_round_trip():
    _, out, _ = run_cli("sweep", "--param", "gamma", "--from", "0", "--to", "1", "--steps", "5",
                        "--trials", "999")
    recs = records(out)
    buf = io.StringIO()
    cli.write_csv(recs, buf)
    assert buf.getvalue() == out
    assert records(buf.getvalue()) == recs
    for r in recs:
        assert r.rate == r.coincidences / r.trials
        assert r.ci_low <= r.rate <= r.ci_high


def test_json_format():
    code, out, _ = run_cli("run", "--scenario", "collapse", "--trials", "500", "--format", "json")
    (line,) = out.splitlines()
    data = json.loads(line)
    assert code == 0
    assert list(data) == cli.FIELDNAMES
    assert data["gamma"] is None


def test_output_file_is_byte_identical(tmp_path):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        code, out, _ = run_cli("run", "--scenario", "collapse", "--trials", "3000", "--seed", "11",
                               "--out", str(p))
        assert code == 0 and out == ""
    assert paths[0].read_bytes() == paths[1].read_bytes()
    rows = list(csv.reader(paths[0].open()))
    assert rows[0] == cli.FIELDNAMES and len(rows) == 2


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv(cli.SEED_ENV, "1234")
    _, out, _ = run_cli("run", "--scenario", "collapse", "--trials", "100")
    assert records(out)[0].seed == 1234
    _, out, _ = run_cli("run", "--scenario", "collapse", "--trials", "100", "--seed", "5")
    assert records(out)[0].seed == 5
    monkeypatch.setenv(cli.SEED_ENV, "not-a-seed")
    code, _, err = run_cli("run", "--scenario", "collapse", "--trials", "100")
    assert code == 2 and cli.SEED_ENV in err
