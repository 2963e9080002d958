import csv
import io
import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ancilla_metrology.errors import ConfigError, ContractViolation, SingularPointError
from ancilla_metrology.harness import checks, cli, config, figures, runner

finite = st.floats(-1e6, 1e6, allow_nan=False)


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    return list(csv.DictReader(io.StringIO(text)))


class TestConfigParsing:
    @pytest.mark.parametrize("text,value", [
        ("1.5", 1.5), ("pi", math.pi), ("2pi", 2 * math.pi), ("0.5*pi", math.pi / 2),
        ("pi/2", math.pi / 2), ("-pi/4", -math.pi / 4), ("1e-3", 1e-3),
    ])
    def test_floats(self, text, value):
        assert config.parse_float(text) == pytest.approx(value)

    @pytest.mark.parametrize("text", ["abc", "inf", "nan", "pi pi"])
    def test_bad_floats(self, text):
        with pytest.raises(ConfigError):
            config.parse_float(text)

    def test_ints_and_bools(self):
        assert config.parse_int("4") == 4 and config.parse_int("4.0") == 4
        with pytest.raises(ConfigError):
            config.parse_int("4.5")
        assert config.parse_bool("Yes") and not config.parse_bool("off")
        with pytest.raises(ConfigError):
            config.parse_bool("maybe")

    def test_text_format(self):
        cfg = config.loads("# header\nN = 4   # spins\nprobe = thermal\nbeta = 2\nt1 = pi/2\n\n")
        assert (cfg.N, cfg.probe, cfg.beta, cfg.t1) == (4, "thermal", 2.0, math.pi / 2)

    @pytest.mark.parametrize("text", [
        "N = 4\nN = 5\n", "N 4\n", "colour = red\n", "probe = squeezed\n", "N = auto\n",
        "mode = sweep\naxis = t1\n", "points = 1\n", "jobs = 0\n", "tol = -1\n",
        "mode = sweep\naxis = dt\nstart = -1\nstop = 1\n",
    ])
    def test_rejects(self, text):
        with pytest.raises(ConfigError):
            config.loads(text)

    def test_auto(self):
        cfg = config.loads("omega_a = auto\nt1 = auto\n")
        assert cfg.omega_a is None and cfg.t1 is None

    @given(
        N=st.integers(1, 500), g=finite, omega_p=finite, omega_a=st.none() | finite,
        t1=st.none() | finite, theta=finite, probe=st.sampled_from(config.PROBES),
        weights=st.none() | st.lists(st.floats(0, 1), min_size=1, max_size=6).map(tuple),
        strict=st.booleans(), method=st.sampled_from(config.METHODS),
        out=st.none() | st.from_regex(r"[a-z][a-z0-9_/.]{0,12}", fullmatch=True),
        tol=st.none() | st.floats(1e-15, 1.0),
    )
    @settings(max_examples=80)
    def test_round_trip(self, **values):
        cfg = config.build(values)
        assert config.loads(config.dumps(cfg)) == cfg

    def test_round_trip_sweep(self):
        cfg = config.build(dict(mode="sweep", axis="theta", start=0.0, stop=2 * math.pi,
                                points=7, endpoint=False, measure="both"))
        assert config.loads(config.dumps(cfg)) == cfg


class TestResolve:
    def test_defaults(self):
        r = runner.resolve(config.RunConfig())
        assert r.params.t1 == pytest.approx(math.pi / 2)
        assert r.params.omega_a == pytest.approx(5.5)
        assert r.inputs["n2"] == 0 and r.inputs["frame_t1"] == pytest.approx(math.pi / 2)

    def test_omega_a_stays_at_optimum_when_t1_set(self):
        r = runner.resolve(config.RunConfig(N=10, t1=0.3))
        assert r.params.t1 == 0.3 and r.params.omega_a == pytest.approx(5.5)
        assert r.inputs["frame_t1"] == pytest.approx(math.pi / 2)

    def test_g_zero_needs_t1(self):
        with pytest.raises(ConfigError):
            runner.resolve(config.RunConfig(g=0.0))
        r = runner.resolve(config.RunConfig(g=0.0, t1=0.7))
        assert r.params.omega_a == 0.0 and r.inputs["frame_t1"] == 0.7

    def test_mixture_needs_weights(self):
        with pytest.raises(ConfigError):
            runner.resolve(config.RunConfig(probe="mixture"))

    def test_echoes_every_input(self):
        rec = runner.evaluate(config.RunConfig(N=3, probe="thermal"))
        for key in ("N", "g", "omega_p", "omega_a", "t1", "t2", "theta", "probe", "beta",
                    "ancilla", "schedule", "dt", "method", "frame_t1"):
            assert key in rec.inputs


class TestEvaluate:
    def test_optimized_n10(self):
        rec = runner.evaluate(config.RunConfig(N=10))
        assert rec.outputs["fq_total"] == pytest.approx(100, rel=1e-10)
        assert rec.outputs["prob_plus"] == pytest.approx(0.5)

    def test_thermal_beta2(self):
        rec = runner.evaluate(config.RunConfig(N=10, probe="thermal", beta=2.0))
        assert rec.outputs["fq_total"] / 100 == pytest.approx(0.946, abs=0.005)

    def test_theta_independence(self):
        a = runner.evaluate(config.RunConfig(N=3, theta=1.2)).outputs["fq_total"]
        b = runner.evaluate(config.RunConfig(N=3, theta=0.1)).outputs["fq_total"]
        assert a == pytest.approx(b, rel=1e-8)

    def test_method_all(self):
        rec = runner.evaluate(config.RunConfig(N=4, probe="superposed", a=0.6, b=0.8, method="all"))
        assert set(rec.alternates) == {"fq_pure", "fq_sld", "fq_spectral"}
        text = runner.to_csv([rec])
        assert text.splitlines()[0].endswith("method_tag,fq_pure,fq_sld,fq_spectral")

    def test_cfi_only(self):
        rec = runner.evaluate(config.RunConfig(N=4, theta=0.3), with_qfi=False, with_cfi=True)
        assert rec.outputs["fc"] == pytest.approx(16, rel=1e-8)
        assert rec.outputs["method_tag"] == "jz-readout" and rec.outputs["fq_total"] is None


class TestSweep:
    def _cfg(self, **kw):
        base = dict(mode="sweep", axis="t1", start=0.0, stop=math.pi, points=9, N=10)
        base.update(kw)
        return config.build(base)

    def test_t1_peak(self):
        recs = runner.sweep(self._cfg())
        t1 = [r.inputs["t1"] for r in recs]
        fq = [r.outputs["fq_total"] for r in recs]
        assert t1 == sorted(t1)
        k = max(range(len(fq)), key=fq.__getitem__)
        assert t1[k] == pytest.approx(math.pi / 2) and fq[k] == pytest.approx(100, rel=1e-8)

    def test_measurement_delay_plateau_wider_for_larger_n(self):
        width = {}
        for N in (2, 10):
            recs = runner.sweep(self._cfg(axis="dt", schedule="measurement_delay", stop=1.5,
                                          points=31, N=N))
            width[N] = sum(r.outputs["fq_total"] / N ** 2 > 0.95 for r in recs)
        assert width[10] > width[2]

    def test_theta_row_constant(self):
        recs = runner.sweep(self._cfg(axis="theta", stop=2 * math.pi, points=8, endpoint=False, N=5))
        vals = [r.outputs["fq_total"] for r in recs]
        assert max(vals) - min(vals) < 1e-8 * 25

    def test_n_axis(self):
        recs = runner.sweep(self._cfg(axis="N", start=1, stop=5, points=5))
        assert [r.inputs["N"] for r in recs] == [1, 2, 3, 4, 5]
        assert [r.outputs["fq_total"] for r in recs] == pytest.approx([1, 4, 9, 16, 25])
        with pytest.raises(ConfigError):
            runner.sweep(self._cfg(axis="N", start=1, stop=3, points=5))

    def test_parallel_output_identical(self):
        cfg = self._cfg(points=6, N=4, probe="thermal", measure="both")
        serial = runner.to_csv(runner.sweep(cfg))
        parallel = runner.to_csv(runner.sweep(cfg.replace(jobs=2)))
        assert serial == parallel

    def test_csv_schema(self):
        text = runner.to_csv(runner.sweep(self._cfg(points=3, N=2)))
        header = text.splitlines()[0].split(",")
        n_in = len(header) - len(runner.OUTPUT_COLUMNS)
        inputs = header[:n_in]
        assert inputs == sorted(inputs, key=lambda k: (k.lower(), k))
        assert tuple(header[n_in:]) == runner.OUTPUT_COLUMNS
        assert "wall_time" not in header
        row = read_csv(text)[1]
        assert row["fq_total"] == "4" and row["fc"] == ""

    def test_cell_format(self):
        assert runner.format_cell(1 / 3) == "0.333333333333"
        assert runner.format_cell(None) == "" and runner.format_cell(True) == "true"
        assert runner.format_cell((0.5, 0.25)) == "0.5 0.25"

    def test_json_nan_as_null(self):
        rec = runner.ResultRecord({"N": 2}, {"fq_total": math.nan}, 0.1)
        data = json.loads(runner.to_json([rec]))
        assert data[0]["outputs"]["fq_total"] is None


class TestCli:
    def test_qfi_csv(self, capsys):
        code, out, _ = run_cli(capsys, "qfi", "--N", "10")
        assert code == 0
        assert float(read_csv(out)[0]["fq_total"]) == pytest.approx(100)

    def test_flags_override_file(self, tmp_path, capsys):
        path = tmp_path / "run.cfg"
        path.write_text("N = 3\nprobe = thermal\nbeta = 2\n")
        code, out, _ = run_cli(capsys, "qfi", "--config", str(path), "--N", "4", "--format", "json")
        assert code == 0
        data = json.loads(out)[0]
        assert data["inputs"]["N"] == 4 and data["inputs"]["probe"] == "thermal"

    def test_underscore_and_dash_flags(self, capsys):
        a = run_cli(capsys, "qfi", "--omega-p", "3", "--N", "2")[1]
        b = run_cli(capsys, "qfi", "--omega_p", "3", "--N", "2")[1]
        assert a == b and read_csv(a)[0]["omega_p"] == "3"

    def test_cfi(self, capsys):
        code, out, _ = run_cli(capsys, "cfi", "--N", "5", "--theta", "0.4")
        assert code == 0 and float(read_csv(out)[0]["fc"]) == pytest.approx(25, rel=1e-8)

    def test_sweep_to_file(self, tmp_path, capsys):
        out = tmp_path / "sub" / "s.csv"
        code, _, _ = run_cli(capsys, "sweep", "--axis", "theta", "--start", "0", "--stop", "pi",
                             "--points", "3", "--N", "2", "--out", str(out))
        assert code == 0 and len(read_csv(out.read_text())) == 3

    @pytest.mark.parametrize("argv", [
        ["qfi", "--N", "0"], ["qfi", "--probe", "squeezed"], ["qfi", "--bogus", "1"],
        ["sweep", "--axis", "t1"], ["qfi", "--config", "/nonexistent/file"], ["nope"],
        ["qfi", "--g", "0"],
    ])
    def test_config_errors_exit_1(self, capsys, argv):
        code, _, err = run_cli(capsys, *argv)
        assert code == 1 and err.startswith("error:")

    def test_spectral_out_of_domain_exit_1(self, capsys):
        code, _, _ = run_cli(capsys, "qfi", "--method", "spectral", "--schedule", "encoding_delay",
                             "--dt", "0.1")
        assert code == 1

    @pytest.mark.parametrize("exc", [ContractViolation("non-Hermitian"), SingularPointError("0/0")])
    def test_numerical_errors_exit_3(self, capsys, monkeypatch, exc):
        def boom(*a, **k):
            raise exc
        monkeypatch.setattr(runner.pipeline, "circuit_qfi", boom)
        code, _, err = run_cli(capsys, "qfi")
        assert code == 3 and "contract" in err

    def test_figure_smoke(self, tmp_path, capsys):
        code, _, err = run_cli(capsys, "figure", "fig3c", "--out", str(tmp_path))
        assert code == 0
        rows = read_csv((tmp_path / "fig3c.csv").read_text())
        meta = json.loads((tmp_path / "fig3c.manifest.json").read_text())
        assert len(rows) == figures.FIG3_POINTS * len(figures.FIG3_N) == meta["rows"]
        assert list(rows[0]) == ["g_dt", "N", "fq_over_n2", "prob_plus"]
        assert meta["omega_a"]["10"] == pytest.approx(5.5)
        first = [float(r["fq_over_n2"]) for r in rows if r["g_dt"] == "0"]
        assert first == pytest.approx([1.0] * 3)

    def test_unknown_figure(self, capsys):
        assert run_cli(capsys, "figure", "fig9")[0] == 1
        with pytest.raises(ConfigError):
            figures.build("fig9")


class TestValidate:
    def test_tol_override(self):
        loose = checks.oracle_equivalence(count=3)[0]
        tight = checks.oracle_equivalence(1e-8, count=3)[0]
        assert loose.tol == 1e-6 and tight.tol == 1e-8
        assert checks.no_ancilla(1e-12)[0].tol == 1e-12

    def test_report_formats(self):
        rows = [checks.Check("C1", "x", checks.PASS, 1.0, 1.0, 0.0, 1e-8),
                checks.Check("C3w", "y", checks.WARN, 0.4, 0.75, 0.35, None, "both values")]
        data = json.loads(cli._validation_report(rows, "json"))
        assert data["summary"] == {"PASS": 1, "WARN": 1, "FAIL": 0}
        text = cli._validation_report(rows, "csv")
        assert read_csv(text)[1]["tol"] == "" and "both values" in text

    def test_warn_entries_show_both_values(self):
        warn = checks.thermal_tensions()
        assert all(c.status == checks.WARN for c in warn)
        small_beta = [c for c in warn if "0.1" in c.name][0]
        assert "closed form" in small_beta.detail and "SLD oracle" in small_beta.detail

    def test_check_line(self):
        c = checks.Check("C2", "probabilities", checks.PASS, 1e-16, 0.5, 1e-16, 1e-10)
        assert c.line().startswith("[PASS] C2 probabilities: measured=")
