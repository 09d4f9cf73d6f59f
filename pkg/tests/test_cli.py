import csv
import io

import numpy as np
import pytest

from cavcool.cli import main, sweep_point
from cavcool.config import KEYS, RunConfig, format_value, parse_config
from cavcool.errors import ConfigError, ParameterError
from cavcool.params import ModelParams


def read_csv(path):
    lines = path.read_text().splitlines()
    comments = [l for l in lines if l.startswith("#")]
    body = "\n".join(l for l in lines if not l.startswith("#"))
    return comments, list(csv.DictReader(io.StringIO(body)))


def test_minimal_protocol_config():
    cfg = parse_config("protocol", text="params.mu = 0.01  # anharmonicity\ninitial.m0 = 10\nparams.N = 1000\n")
    assert cfg.params.mu == 0.01 and cfg.m0 == 10 and cfg.params.N == 1000
    assert cfg.params.nu == ModelParams().nu


def test_flags_override_file(tmp_path):
    f = tmp_path / "run.cfg"
    f.write_text("params.mu = 0.01\n")
    cfg = parse_config("protocol", path=f, overrides=["params.mu=0.02"])
    assert cfg.params.mu == 0.02


def test_config_errors():
    with pytest.raises(ConfigError, match="'foo'"):
        parse_config("protocol", text="foo = 1\n")
    with pytest.raises(ConfigError, match="<config>:2"):
        parse_config("protocol", text="# header\nparams.nu = fast\n")
    with pytest.raises(ConfigError, match="key = value"):
        parse_config("protocol", text="params.nu 1\n")
    with pytest.raises(ConfigError, match="layout.n_b"):
        parse_config("oracle", text="integ.t_final = 1\nlayout.n_c = 2\n")
    with pytest.raises(ConfigError, match="one or two axes"):
        parse_config("sweep")
    with pytest.raises(ConfigError, match="params"):
        parse_config("sweep", overrides=["sweep.axis1=initial.m0", "sweep.values1=1,2"])
    with pytest.raises(ConfigError):
        parse_config("protocol", overrides=["params.N=2.5"])
    with pytest.raises(ConfigError):
        parse_config("bogus")
    with pytest.raises(ParameterError, match="slight-anharmonicity"):
        parse_config("protocol", overrides=["params.mu=2.0"])


def test_value_lists():
    cfg = parse_config("sweep", overrides=["sweep.axis1=params.delta", "sweep.values1=0.2:2.0:10"])
    assert cfg.values1 == tuple(np.linspace(0.2, 2.0, 10))
    cfg = parse_config("sweep", overrides=["sweep.axis1=params.N", "sweep.values1=10, 20,40"])
    assert cfg.values1 == (10.0, 20.0, 40.0)


@pytest.mark.parametrize("value", [0.1, 1 / 3, np.pi * 1e-7, 2.0 ** -30, 123456.789])
def test_float_round_trip(value):
    cfg = parse_config("rate", overrides=[f"params.Omega={format_value(value)}"])
    again = parse_config("rate", text=cfg.to_text())
    assert again.params.Omega == value
    assert again.params == cfg.params


def test_every_key_maps_to_a_field():
    for key, (attr, _) in KEYS.items():
        owner = ModelParams() if key.startswith("params.") else RunConfig("rate")
        assert hasattr(owner, attr), key


def test_exit_codes(tmp_path, capsys):
    assert main(["protocol", "--set", "foo=1", "--out", str(tmp_path)]) == 2
    assert "foo" in capsys.readouterr().err
    assert main(["protocol", "--set", "params.mu=abc"]) == 2
    assert main(["protocol", "--set", "params.mu=1.5"]) == 3
    assert "slight-anharmonicity" in capsys.readouterr().err
    assert main(["rate", "--set", "params.kappa=0"]) == 4
    assert main(["displacement", "--set", "params.mu=0.02", "--set", "initial.m0=10"]) == 3


def test_protocol_outputs(tmp_path):
    assert main(["protocol", "--out", str(tmp_path), "--set", "params.c_floor=0"]) == 0
    comments, rows = read_csv(tmp_path / "cycles.csv")
    assert comments[0].startswith("# cavcool") and "params.mu=0.01" in comments[1]
    assert rows[1]["stage"] == "cooling" and float(rows[1]["m_after"]) == pytest.approx(9.84)
    _, summary = read_csv(tmp_path / "summary.csv")
    assert [int(r["N"]) for r in summary] == [100, 1000, 10000, 100000, 1000000]


def test_sweep_resonance_and_determinism(tmp_path):
    args = ["sweep", "--set", "sweep.axis1=params.delta", "--set", "sweep.values1=0.2:2.0:37"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--workers", "2"]) == 0
    a = (tmp_path / "a" / "sweep.csv").read_text().splitlines()
    b = (tmp_path / "b" / "sweep.csv").read_text().splitlines()
    # the config comment records out/workers, everything else must match byte for byte
    assert a[0] == b[0] and a[2:] == b[2:]
    _, rows = read_csv(tmp_path / "a" / "sweep.csv")
    delta = np.array([float(r["delta"]) for r in rows])
    A = np.array([float(r["A_N"]) for r in rows])
    assert delta[np.argmax(A)] == pytest.approx(1.0)
    for r in rows:
        assert float(r["A_N_adiabatic"]) == pytest.approx(float(r["A_N"]), rel=1e-9)


def test_two_axis_sweep_order(tmp_path):
    args = ["sweep", "--out", str(tmp_path), "--set", "sweep.axis1=params.N", "--set", "sweep.values1=10,100",
            "--set", "sweep.axis2=params.kappa", "--set", "sweep.values2=0.3,0.6,0.9"]
    assert main(args) == 0
    _, rows = read_csv(tmp_path / "sweep.csv")
    assert [(r["N"], r["kappa"]) for r in rows] == [
        (n, k) for n in ("10", "100") for k in ("0.29999999999999999", "0.59999999999999998", "0.90000000000000002")]


def test_sweep_point_without_floor():
    row = sweep_point(ModelParams(mu=0.0))
    assert np.isnan(row["m_final_closed"]) and row["A_N"] > 0


def test_rate_and_displacement_outputs(tmp_path):
    assert main(["rate", "--out", str(tmp_path), "--set", "params.N=2", "--set", "integ.t_final=50",
                 "--set", "integ.stride=100"]) == 0
    _, rows = read_csv(tmp_path / "rate.csv")
    for r in rows:
        assert float(r["m"]) - float(r["zeta"]) == pytest.approx(10 - 0.16, abs=1e-12)
    assert main(["displacement", "--out", str(tmp_path), "--set", "displacement.periods=5"]) == 0
    _, rows = read_csv(tmp_path / "displacement.csv")
    assert float(rows[0]["zeta_end"]) == pytest.approx(0.16)
    assert float(rows[0]["x_first_order"]) == pytest.approx(-0.4 * np.sqrt(2))


def test_oracle_output(tmp_path):
    args = ["oracle", "--out", str(tmp_path), "--set", "layout.n_b=3", "--set", "layout.n_c=2",
            "--set", "integ.t_final=1", "--set", "integ.stride=10", "--set", "initial.m0=0",
            "--set", "initial.alpha=0.1"]
    assert main(args) == 0
    comments, rows = read_csv(tmp_path / "oracle.csv")
    assert len(comments) == 2 and [float(r["t"]) for r in rows] == [0.0, 0.5, 1.0]
    assert float(rows[0]["zeta"]) == pytest.approx(0.01, rel=1e-3)
    assert "zh_2200" not in rows[0] and "x_333" in rows[0]


def test_verify(capsys):
    assert main(["verify"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert len(out) == 9 and all(l.startswith("PASS") for l in out)
