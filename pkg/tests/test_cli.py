import csv
import io

import pytest

from nomadic import __version__
from nomadic.analysis import dmt_upper
from nomadic.cli import (
    DMT_COLUMNS,
    SWEEP_COLUMNS,
    ExperimentSpec,
    PRESETS,
    main,
    resolve_spec,
    run,
    spec_from_text,
)
from nomadic.errors import SpecError


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def quiet(_msg):
    pass


def test_two_agent_rerun_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    base = ["two-agent", "--r", "2", "--t", "2", "--C", "2", "--P-dB", "7",
            "--n-samples", "1000", "--seed", "42"]
    assert main(base + ["--out", str(a)]) == 0
    assert main(base + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    body = rows(a.read_text())
    assert body[0][-3:] == ["seed", "n_samples", "version"]
    assert body[1][-3:] == ["42", "1000", __version__]


def test_sweep_row_count():
    spec = ExperimentSpec(command="sweep", P_dB=tuple(float(p) for p in range(0, 21, 2)),
                          n_samples=40, seed=1, schemes=("ec", "ceo"),
                          bounds=("ub_symmetric", "cutset"))
    out = rows(run(spec, quiet))
    assert tuple(out[0]) == SWEEP_COLUMNS
    assert len(out) == 1 + 11 * 4
    assert {r[1] for r in out[1:]} == {"ec", "ceo", "ub_symmetric", "cutset"}


def test_sweep_power_range_flag(tmp_path):
    spec = resolve_spec(["sweep", "--P-dB", "0:20:2", "--scheme", "ec,ceo",
                         "--bound", "ub_symmetric,cutset"])
    assert spec.P_dB == tuple(float(p) for p in range(0, 21, 2))
    assert spec.schemes == ("ec", "ceo")


def test_dmt_command_delegates():
    spec = ExperimentSpec(command="dmt", r=2, t=2, m_grid=(0.0, 0.5, 1.0, 1.5, 2.0))
    out = rows(run(spec, quiet))
    assert tuple(out[0]) == DMT_COLUMNS
    by = {}
    for r in out[1:]:
        by.setdefault(r[4], []).append(float(r[3]))
    assert by["ceo"] == by["upper"] == list(dmt_upper(2, 2, spec.m_grid).d)
    assert by["ec"][0] == 2.0 and all(d == 0.0 for d in by["ec"][1:])


def test_exit_codes(tmp_path, capsys):
    assert main(["rates", "--r", "0"]) == 2
    assert main(["rates", "--scheme", "nonsense"]) == 2
    assert main(["bounds", "--scheme", "ec"]) == 2
    assert main(["two-agent", "--C", "1,2"]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("[experiment]\nno equals sign\n")
    assert main(["--config", str(bad)]) == 2
    assert main(["outage", "--epsilon", "0"]) == 2
    err = capsys.readouterr().err
    assert "invalid spec" in err


def test_numerical_failure_exit_code(monkeypatch):
    from nomadic import cli
    from nomadic.errors import BracketFailure

    def boom(*a, **k):
        raise BracketFailure("no sign change")

    monkeypatch.setattr(cli, "two_agent_solve", boom)
    assert main(["two-agent", "--n-samples", "5", "--out", "-"]) == 3


def test_spec_round_trip():
    spec = ExperimentSpec(command="outage", r=3, t=2, P_dB=(0.0, 2.5), C=(1.0, 2.0, 0.5),
                          n_samples=77, seed=5, schemes=("ceo_outage",),
                          bounds=("ub_outage",), epsilon=0.05, Q_mode="fixed")
    back = spec_from_text(spec.to_text())
    assert back == spec
    assert spec_from_text(back.to_text()).to_text() == spec.to_text()


def test_config_file_and_flag_priority(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("[experiment]\ncommand = rates\nr = 3\nseed = 4  # comment\n")
    spec = resolve_spec(["--config", str(cfg), "--seed", "9"])
    assert spec.command == "rates" and spec.r == 3 and spec.seed == 9
    with pytest.raises(SpecError):
        resolve_spec([])


def test_presets():
    for name, fields in PRESETS.items():
        spec = resolve_spec(["--preset", name])
        assert spec.preset == name and spec.command == fields["command"]
    fig2 = resolve_spec(["--preset", "fig2"])
    assert fig2.P_dB == (7.0,) and fig2.n_samples == 1000 and max(fig2.theta) == 3.0


def test_workers_do_not_change_output():
    base = dict(command="sweep", P_dB=(0.0, 6.0, 12.0), n_samples=30, seed=3,
                schemes=("ec", "ceo", "ec_outage"), bounds=("cutset", "cutset_outage"))
    one = run(ExperimentSpec(workers=1, **base), quiet)
    two = run(ExperimentSpec(workers=2, **base), quiet)
    assert one == two
