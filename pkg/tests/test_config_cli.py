import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gbmsim import ConfigError, bundled_scenarios, load_scenario, parse_config
from gbmsim.config import ScenarioConfig
from gbmsim.cli import main
from gbmsim.grid import read_snapshot
from gbmsim.runner import initial_state

MINIMAL = """
[params]
rho = 1.0
alpha = 0.03
beta1 = 0.03
beta2 = 0.03
gamma = 0.003
delta = 0.3
K = 1.0

[grid]
nx = 16
ny = 16

[initial]
tumor_bumps = one
necrosis = 0.0
vasculature = 0.5

[run]
t_end = 2.0
dt = 0.05
"""


class TestParseConfig:
    def test_minimal_parses_with_defaults(self):
        cfg = parse_config(MINIMAL, name="mini")
        assert cfg.params.delta == 0.3
        assert cfg.grid.bounds == (-2.0, 2.0, -2.0, 2.0)
        assert cfg.bumps[0].amplitude == 0.8
        assert cfg.checks == ("apriori_box", "necrosis_monotone")

    def test_bundled_delta_dominant_params(self):
        cfg = load_scenario("delta_dominant_one_tumor")
        p = cfg.params
        assert (p.rho, p.alpha, p.beta1, p.beta2) == (1.0, 0.03, 0.03, 0.03)
        assert (p.gamma, p.delta, p.K) == (0.003, 0.3, 1.0)
        assert cfg.vasculature0 == 0.5 and cfg.necrosis0 == 0.0
        assert len(cfg.bumps) == 1

    def test_bundled_gamma_dominant_swaps_roles(self):
        cfg = load_scenario("gamma_dominant_three_tumors")
        assert cfg.params.gamma == 0.3 and cfg.params.delta == 0.03
        assert len(cfg.bumps) == 3

    def test_all_bundled_scenarios_parse(self):
        names = bundled_scenarios()
        assert len(names) >= 9
        for name in names:
            cfg = load_scenario(name)
            assert cfg.dt <= cfg.dt_cap

    def test_amplitude_above_capacity_rejected(self):
        bad = MINIMAL.replace("tumor_bumps = one",
                              "tumor_bumps = one\nbump_amplitude = 1.5")
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert any("bump_amplitude" in v and "[0, K]" in v
                   for v in err.value.violations)

    def test_empty_file_lists_all_required_keys(self):
        with pytest.raises(ConfigError) as err:
            parse_config("")
        text = "\n".join(err.value.violations)
        for key in ("params.rho", "params.K", "grid.nx", "initial.vasculature",
                    "run.t_end", "run.dt"):
            assert key in text

    def test_unknown_key_carries_line_number(self):
        bad = MINIMAL + "\n[run]\nwibble = 3\n"
        # note: duplicate [run] section header is fine, duplicate keys are not
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert any("wibble" in v and v.startswith("line ")
                   for v in err.value.violations)

    def test_unknown_section_rejected(self):
        with pytest.raises(ConfigError) as err:
            parse_config(MINIMAL + "\n[wibbles]\na = 1\n")
        assert any("unknown section" in v for v in err.value.violations)

    def test_dt_above_reaction_cap_rejected(self):
        bad = MINIMAL.replace("dt = 0.05", "dt = 0.4")
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert any("explicit-reaction cap" in v for v in err.value.violations)

    def test_all_violations_reported_at_once(self):
        bad = MINIMAL.replace("rho = 1.0", "rho = -1.0") \
                     .replace("vasculature = 0.5", "vasculature = 7.0") \
                     .replace("dt = 0.05", "dt = 0.0")
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert len(err.value.violations) >= 3

    def test_check_window_keys_parse(self):
        cfg = parse_config(MINIMAL + "\n[checks]\nwarmup = 3.5\nslack = 1e-2\n")
        assert cfg.warmup == 3.5
        assert cfg.slack == 1e-2
        assert cfg.phi_horizon == cfg.t_end  # 0 means end of run

    def test_near_capacity_requires_consistent_necrosis(self):
        bad = MINIMAL.replace("necrosis = 0.0", "necrosis = 0.5") + (
            "\n[checks]\nnames = envelope_near_capacity\neps = 0.02\n")
        with pytest.raises(ConfigError) as err:
            parse_config(bad)
        assert any("K - eps" in v for v in err.value.violations)

    @settings(max_examples=200, deadline=None)
    @given(junk=st.text(max_size=300))
    def test_arbitrary_text_never_escapes_config_error(self, junk):
        try:
            cfg = parse_config(junk)
        except ConfigError:
            return
        assert isinstance(cfg, ScenarioConfig)

    @settings(max_examples=100, deadline=None)
    @given(junk=st.text(alphabet="[]=#.abil mnoprst0123456789\n", max_size=200))
    def test_config_like_text_never_escapes_config_error(self, junk):
        try:
            parse_config(MINIMAL + "\n" + junk)
        except ConfigError:
            pass

    def test_initial_state_respects_box(self):
        cfg = parse_config(MINIMAL)
        state = initial_state(cfg)
        assert state.T.max() <= cfg.params.K
        assert state.T.min() >= 0.0
        # coarse grid: nearest cell center sits h/2 off the bump peak
        assert 0.6 <= state.T.max() <= 0.8


class TestCli:
    def test_eig_constant_prints_beta1(self, capsys, tmp_path):
        code = main(["eig", "decay_eigenvalue_gated", "--out", str(tmp_path)])
        out = capsys.readouterr().out
        assert code == 0
        lam = float(out.splitlines()[0].split("=")[1])
        assert lam == pytest.approx(2.0, abs=1e-8)  # beta1 * N0 = 2 * 1

    def test_eig_via_config_file(self, capsys, tmp_path):
        # constant N0 = 1 with weak conversion: lambda1 = beta1
        cfg = tmp_path / "flat.cfg"
        cfg.write_text(MINIMAL.replace("necrosis = 0.0", "necrosis = 1.0")
                              .replace("vasculature = 0.5", "vasculature = 0.0"))
        code = main(["eig", "--config", str(cfg)])
        out = capsys.readouterr().out
        assert code == 0
        lam = float(out.splitlines()[0].split("=")[1])
        assert lam == pytest.approx(0.03, abs=1e-8)

    def test_eig_writes_field(self, tmp_path):
        field = tmp_path / "eig.dat"
        code = main(["eig", "decay_eigenvalue_gated", "--field-out", str(field)])
        assert code == 0
        f, _ = read_snapshot(field)
        assert np.abs(f.values).max() == pytest.approx(1.0, abs=1e-10)

    def test_pde_run_writes_outputs_and_passes(self, tmp_path):
        out = tmp_path / "run"
        code = main(["pde", "run", "uniform_ode_match", "--out", str(out),
                     "--t-end", "2.0"])
        assert code == 0
        assert (out / "series.csv").is_file()
        assert (out / "verdicts.csv").is_file()
        snaps = os.listdir(out / "snapshots")
        assert any(name.startswith("T_t") for name in snaps)
        header = (out / "series.csv").read_text().splitlines()[0]
        assert header == "t,Tmax,Tmin,Nmax,Phimax,massT,massN,massPhi"

    def test_pde_run_byte_identical_reruns(self, tmp_path):
        outputs = []
        for tag in ("a", "b"):
            out = tmp_path / tag
            code = main(["pde", "run", "uniform_ode_match", "--out", str(out),
                         "--t-end", "2.0"])
            assert code == 0
            outputs.append((out / "series.csv").read_bytes())
        assert outputs[0] == outputs[1]

    def test_ode_run_writes_series(self, tmp_path):
        out = tmp_path / "ode"
        code = main(["ode", "run", "uniform_ode_match", "--out", str(out),
                     "--t-end", "5.0"])
        assert code == 0
        lines = (out / "ode_series.csv").read_text().splitlines()
        assert lines[0] == "t,T,N,Phi"
        assert len(lines) == 7  # header + t = 0..5 sampled daily

    def test_ode_run_rejects_bumpy_scenario(self, capsys):
        code = main(["ode", "run", "delta_dominant_one_tumor"])
        assert code == 2
        assert "uniform" in capsys.readouterr().err

    def test_verify_passing_run_exits_zero(self, tmp_path, capsys):
        out = tmp_path / "ok"
        code = main(["verify", "uniform_ode_match", "--out", str(out),
                     "--t-end", "2.0"])
        assert code == 0
        assert "PASS  apriori_box" in capsys.readouterr().out
        assert (out / "plot.gp").is_file()

    def test_verify_exit_codes(self, tmp_path, capsys):
        # a horizon too short for phi decay must fail the vanishing check
        out = tmp_path / "v"
        code = main(["verify", "delta_dominant_one_tumor", "--out", str(out),
                     "--t-end", "5.0", "--dt", "0.05"])
        captured = capsys.readouterr().out
        assert code == 1
        assert "failed_checks" in captured
        assert (out / "verdicts.csv").read_text().count("fail") >= 1

    def test_sweep_gate_flips_at_threshold(self, tmp_path, capsys):
        out = tmp_path / "sweep"
        code = main(["sweep", "delta", "0.001,0.002,0.003,0.03,0.3",
                     "decay_destruction_dominant",
                     "--check", "envelope_destruction_dominant",
                     "--out", str(out)])
        assert code == 0
        rows = (out / "sweep.csv").read_text().splitlines()[1:]
        verdicts = [row.split(",")[2] for row in rows]
        # gamma / K = 0.003: fails strictly below, passes from the boundary on
        assert verdicts == ["fail", "fail", "pass", "pass", "pass"]

    def test_unknown_scenario_is_an_error(self, capsys):
        code = main(["pde", "run", "no_such_scenario"])
        assert code == 2
        assert "no bundled scenario" in capsys.readouterr().err
