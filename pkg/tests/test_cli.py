import csv
import io
import json
import subprocess
import sys

import pytest

from losrcert.cli import CSV_HEADER, main, resolve_behavior, sweep_grid, UsageError
from losrcert.lpsolve import read_certificate, read_lp, validate_certificate


@pytest.fixture(autouse=True)
def _cwd(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_evaluate_ghz(capsys):
    code, out = run(capsys, "evaluate", "ghz", "--json")
    assert code == 0
    rep = json.loads(out.out)
    assert rep["scores"]["combined"] == pytest.approx(8 + 2 * 2**0.5, abs=1e-9)
    assert rep["inputs"]["behavior"] == "ghz@v1"
    assert len(rep["inputs"]["sha256"]) == 64


def test_evaluate_exact_box(capsys):
    code, out = run(capsys, "evaluate", "ns-box", "--exact")
    assert code == 0
    assert "[12]" in out.out


def test_evaluate_signalling_file(capsys, tmp_path):
    from losrcert import behavior as bh
    from losrcert.strategies import PARTIES_3

    sig = bh.from_function(PARTIES_3, lambda ctx, o: 1.0 if o == (1 if ctx[1] == 0 else -1, 1, 1) else 0.0)
    path = tmp_path / "sig.json"
    path.write_text(bh.dumps(sig))
    code, out = run(capsys, "evaluate", str(path))
    assert code == 1
    assert "signalling" in out.out


def test_certify_exit_codes(capsys, tmp_path):
    code, out = run(capsys, "certify", "ghz", "--order", "2", "--lp-out", "p.lp")
    assert code == 2
    cert = read_certificate(open("certificate.json"))
    lp = read_lp(open("p.lp"))
    assert validate_certificate(lp, cert)
    code, out = run(capsys, "certify", "classical-opt", "--order", "2")
    assert code == 0
    assert "inconclusive" in out.out


@pytest.mark.parametrize(
    "argv",
    [
        ["certify", "ghz", "--order", "5"],
        ["certify", "nosuch"],
        ["certify", "missing.json"],
        ["evaluate", "noisy-ghz:1.5"],
        ["sweep", "--from", "0.9", "--to", "0.8"],
        ["bogus"],
    ],
)
def test_usage_errors_exit_one(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 1


def test_sweep_csv(capsys):
    code, out = run(capsys, "sweep", "--from", "0.9", "--to", "0.95", "--step", "0.01", "--csv", "s.csv")
    assert code == 0
    rows = list(csv.reader(open("s.csv")))
    assert tuple(rows[0]) == tuple(CSV_HEADER)
    assert [float(r[0]) for r in rows[1:]] == [0.9, 0.91, 0.92, 0.93, 0.94, 0.95]
    assert [r[5] for r in rows[1:]] == ["0", "0", "0", "1", "1", "1"]
    assert "f* (inequality) = 0.9235" in out.out


def test_sweep_grid():
    assert sweep_grid(0.8, 0.8, 0.1) == [0.8]
    assert len(sweep_grid(0.8, 1.0, 0.005)) == 41
    with pytest.raises(UsageError):
        sweep_grid(0.5, 0.4, 0.01)
    with pytest.raises(UsageError):
        sweep_grid(0.5, 0.6, 0)


def test_sweep_lp_mode(capsys):
    code, out = run(
        capsys, "sweep", "--from", "0.86", "--to", "0.9", "--step", "0.02", "--mode", "lp",
        "--order", "2", "--precision", "0.005", "--json",
    )
    assert code == 0
    rep = json.loads(out.out)
    lp = rep["thresholds"]["lp"]
    assert lp["monotone"] and lp["grid_monotone"] and lp["below_inequality"]
    assert [r["lp_verdict"] for r in rep["rows"]] == ["feasible", "infeasible", "infeasible"]


def test_replay(capsys):
    assert main(["evaluate", "noisy-ghz:0.95", "--report", "r.json"]) == 0
    assert main(["certify", "ghz", "--order", "2", "--report", "c.json"]) == 2
    capsys.readouterr()
    for rep in ("r.json", "c.json"):
        code, out = run(capsys, "replay", rep)
        assert code == 0, out.out
        assert "reproduced" in out.out


def test_replay_detects_tampering(capsys):
    main(["evaluate", "ghz", "--report", "r.json"])
    rep = json.load(open("r.json"))
    rep["scores"]["combined"] += 1e-3
    json.dump(rep, open("t.json", "w"))
    capsys.readouterr()
    code, out = run(capsys, "replay", "t.json")
    assert code == 1 and "mismatch combined" in out.out


def test_export_round_trip(capsys):
    assert main(["export", "ns-box", "--exact", "-o", "box.json"]) == 0
    beh, _ = resolve_behavior("box.json", exact=True)
    code, out = run(capsys, "evaluate", "box.json", "--exact", "--json")
    assert json.loads(out.out)["scores"]["combined"] == 12


def test_console_entry_point():
    res = subprocess.run([sys.executable, "-m", "losrcert", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and "losrcert" in res.stdout
