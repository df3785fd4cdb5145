import json
import subprocess
import sys

import numpy as np
import pytest

from wgdist.cli import (EXIT_NUMERIC, EXIT_OK, EXIT_USAGE, ParseError, Report, bundled_dataset, main,
                        parse_data, plot_data)
from wgdist.distribution import WGParams, cdf


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestParsing:
    def test_comments_and_blanks(self):
        s = parse_data("# header\n1.5\n\n 2.0 \n3\n")
        np.testing.assert_array_equal(s.xs, [1.5, 2.0, 3.0])

    @pytest.mark.parametrize("text,where", [("1\nabc\n3\n", ":2:"), ("1\n2\n-3\n", ":3:"),
                                            ("1\n2\nnan\n", ":3:")])
    def test_line_numbers(self, text, where):
        with pytest.raises(ParseError, match=where):
            parse_data(text, "f.txt")

    def test_too_few(self):
        with pytest.raises(ParseError):
            parse_data("1\n2\n")

    def test_bundled(self):
        assert bundled_dataset("carbon-fibre").n == 100
        assert bundled_dataset("air-conditioning").n == 213


class TestFit:
    def test_carbon_fibre(self, capsys):
        code, out, err = run(capsys, "fit", "--dataset", "carbon-fibre")
        assert code == EXIT_OK
        doc = json.loads(out)
        est = doc["results"]["estimates"]
        assert est["p"] == pytest.approx(0.3073, rel=0.02)
        assert est["alpha"] == pytest.approx(3.0093, rel=0.02)
        assert {t["null_model"] for t in doc["results"]["lr_tests"]} == {"EG", "Weibull", "exponential"}
        assert len(doc["results"]["confidence_intervals"]) == 3
        assert doc["diagnostics"]["converged"] is True
        assert "WG fit" in err

    def test_report_round_trip(self, capsys):
        code, out, _ = run(capsys, "fit", "--dataset", "carbon-fibre")
        rep = Report.from_json(out)
        assert json.loads(rep.to_json()) == json.loads(out)

    def test_input_file(self, capsys, tmp_path):
        f = tmp_path / "d.txt"
        xs = np.random.default_rng(1).weibull(2.0, 150)
        f.write_text("\n".join(repr(float(x)) for x in xs))
        code, out, _ = run(capsys, "fit", "--input", str(f))
        assert code == EXIT_OK
        assert json.loads(out)["inputs"]["n"] == 150

    def test_not_converged_exit(self, capsys):
        code, out, _ = run(capsys, "fit", "--dataset", "carbon-fibre", "--max-iter", "1",
                           "--tol", "1e-12", "--no-accel")
        assert code == EXIT_NUMERIC
        assert json.loads(out)["diagnostics"]["converged"] is False

    def test_bad_file(self, capsys, tmp_path):
        f = tmp_path / "bad.txt"
        f.write_text("1\n2\nx\n")
        code, _, err = run(capsys, "fit", "--input", str(f))
        assert code == EXIT_USAGE and "bad.txt:3" in err

    def test_missing_data(self, capsys):
        assert run(capsys, "fit")[0] == EXIT_USAGE
        assert run(capsys, "fit", "--dataset", "carbon-fibre", "--input", "x")[0] == EXIT_USAGE


class TestOtherCommands:
    def test_eval(self, capsys):
        code, out, _ = run(capsys, "eval", "--params", "0.8,0.4,2", "--fn", "cdf", "2.0")
        assert code == EXIT_OK
        lines = out.strip().splitlines()
        assert lines[0] == "x\tcdf"
        assert float(lines[1].split("\t")[1]) == pytest.approx(0.817598278479075650, rel=1e-14)

    def test_eval_grid(self, capsys):
        code, out, _ = run(capsys, "eval", "--params", "0.5,1,1", "--grid", "0.1", "1", "5")
        assert code == EXIT_OK and len(out.strip().splitlines()) == 6

    def test_bad_params(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["eval", "--params", "1.5,1,1", "1"])
        assert exc.value.code == EXIT_USAGE
        with pytest.raises(SystemExit) as exc:
            main(["eval", "--params", "0.5,1", "1"])
        assert exc.value.code == EXIT_USAGE

    def test_sample_reproducible(self, capsys):
        _, a, _ = run(capsys, "sample", "--params", "0.5,1,2", "-n", "20", "--seed", "4")
        _, b, _ = run(capsys, "sample", "--params", "0.5,1,2", "-n", "20", "--seed", "4",)
        assert a == b and len(a.split()) == 20

    def test_sample_compound(self, capsys):
        code, out, _ = run(capsys, "sample", "--params", "0.5,1,2", "-n", "5", "--method", "compound")
        assert code == EXIT_OK and all(float(v) > 0 for v in out.split())

    def test_order_stat(self, capsys):
        code, out, _ = run(capsys, "order-stat", "--params", "0.8,0.4,2", "--i", "7", "--n", "15")
        res = json.loads(out)["results"]
        assert code == EXIT_OK
        assert res["expr11"]["value"] == pytest.approx(0.9850294308602001, rel=1e-12)
        assert res["quadrature"]["value"] == pytest.approx(0.9667406384532267, rel=1e-10)

    def test_order_stat_bad_rank(self, capsys):
        assert run(capsys, "order-stat", "--params", "0.8,0.4,2", "--i", "16", "--n", "15")[0] == EXIT_USAGE

    def test_moments(self, capsys):
        code, out, _ = run(capsys, "moments", "--params", "0,2,1", "--figure3", "--alphas", "1")
        res = json.loads(out)["results"]
        assert res["moments"]["mean"] == pytest.approx(0.5)
        assert len(res["figure3"]["1.0"]) == 100

    def test_entropy(self, capsys):
        code, out, _ = run(capsys, "entropy", "--params", "0.2,1,2", "--gamma", "2", "3")
        res = json.loads(out)["results"]
        assert code == EXIT_OK
        assert all(e["agrees_with_quadrature"] for e in res["renyi"])
        assert "delta_vs_quadrature" in res["shannon_paper_formula"]

    def test_plot_data(self, capsys, tmp_path):
        prefix = tmp_path / "out" / "cf"
        code, out, _ = run(capsys, "plot-data", "--dataset", "carbon-fibre", "--prefix", str(prefix))
        assert code == EXIT_OK
        dens = (tmp_path / "out" / "cf_density.tsv").read_text().splitlines()
        qq = (tmp_path / "out" / "cf_qq.tsv").read_text().splitlines()
        assert dens[0] == "kind\tx\tdensity" and qq[0] == "rank\tobserved\texpected"
        assert len(qq) == 101
        kinds = {line.split("\t")[0] for line in dens[1:]}
        assert kinds == {"histogram", "fitted_pdf"}


def test_plot_data_qq_positions():
    sample = bundled_dataset("carbon-fibre")
    theta = WGParams(0.3, 0.31, 3.0)
    (_, dens), _, (obs, expected) = plot_data(sample, theta, bins=10)
    n = sample.n
    np.testing.assert_allclose(cdf(theta, expected), (np.arange(1, n + 1) - 0.5) / n, rtol=1e-10)
    assert np.all(np.diff(obs) >= 0)
    assert dens.sum() * (obs[-1] - obs[0]) / 10 == pytest.approx(1.0, rel=1e-9)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wgdist", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "0.1.0" in proc.stdout
