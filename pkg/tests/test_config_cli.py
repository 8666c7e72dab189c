"""Configuration loading and the command-line front end."""

import csv
import io
import json

import numpy as np
import pytest

from lhsl.cli import main
from lhsl.config import load_config, normalize
from lhsl.dispersion import band_edges
from lhsl.errors import ConfigError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    comments = {}
    body = []
    for line in text.splitlines():
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            comments[key] = value
        else:
            body.append(line)
    return comments, list(csv.DictReader(io.StringIO("\n".join(body))))


class TestConfig:
    def test_paper_defaults(self):
        cfg = load_config(paper_defaults=True)
        assert cfg.line.sl.n_cells == 200
        assert cfg.line.sl.eps == 2.0
        assert cfg.solver["max_iter"] == 10_000

    def test_unknown_key_with_line(self, tmp_path):
        p = tmp_path / "run.yaml"
        p.write_text("superlattice:\n  eps: 2.0\n  colour: red\n")
        with pytest.raises(ConfigError) as info:
            load_config(p, paper_defaults=True)
        assert info.value.key == "superlattice.colour"
        assert info.value.line == 3

    def test_missing_key_is_named(self):
        with pytest.raises(ConfigError) as info:
            load_config(overrides={"superlattice.eps": 2.0})
        assert "superlattice." in info.value.key

    def test_bad_type(self, tmp_path):
        p = tmp_path / "run.yaml"
        p.write_text("solver:\n  max_iter: lots\n")
        with pytest.raises(ConfigError) as info:
            load_config(p, paper_defaults=True)
        assert info.value.key == "solver.max_iter"
        assert info.value.line == 2

    def test_unknown_block(self):
        with pytest.raises(ConfigError):
            normalize({"nonsense": {}})

    def test_nothing_given(self):
        with pytest.raises(ConfigError):
            load_config()

    def test_overrides(self):
        cfg = load_config(paper_defaults=True, overrides={"superlattice.eps": 1.1, "solver.max_iter": 7})
        assert cfg.line.sl.eps == 1.1
        assert cfg.solver["max_iter"] == 7

    def test_grid_forms(self):
        cfg = load_config(paper_defaults=True, overrides={
            "qubit.g_over_wsl": {"start": 0.0, "stop": 1.0, "num": 5},
            "qubit.delta0_over_wsl": [1.5, 2.0]})
        assert cfg.g_grid.tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert cfg.delta0_grid.tolist() == [1.5, 2.0]

    def test_round_trip(self, tmp_path):
        first = load_config(paper_defaults=True, overrides={"superlattice.eps": 1.1})
        p = tmp_path / "dumped.yaml"
        p.write_text(first.dump())
        second = load_config(p)
        assert second.data == first.data
        assert second.dump() == first.dump()

    def test_invalid_physics_is_config_error(self):
        cfg = load_config(paper_defaults=True, overrides={"superlattice.eps": -1.0})
        with pytest.raises(ConfigError):
            cfg.line


class TestCli:
    def test_dispersion_rows_and_header(self, capsys):
        code, out, _ = run(capsys, "dispersion", "--paper-defaults", "--k-points", "100")
        assert code == 0
        comments, rows = parse_csv(out)
        assert len(rows) == 200
        assert {r["branch"] for r in rows} == {"lower", "upper"}
        e = band_edges(load_config(paper_defaults=True).line.sl)
        for name in ("omega_1minus", "omega_1plus", "omega_2"):
            assert float(comments[name + "_rad_s"]) == pytest.approx(getattr(e, name), rel=1e-12)

    def test_units_in_columns(self, capsys):
        _, out, _ = run(capsys, "dispersion", "--paper-defaults", "--k-points", "3")
        header = [ln for ln in out.splitlines() if not ln.startswith("#")][0]
        assert "k_rad_per_m" in header and "omega_rad_s" in header

    def test_single_branch(self, capsys):
        _, out, _ = run(capsys, "dispersion", "--paper-defaults", "--k-points", "10", "--branch", "lower")
        _, rows = parse_csv(out)
        assert len(rows) == 10

    def test_gapless_line(self, capsys):
        code, out, _ = run(capsys, "dispersion", "--paper-defaults", "--set", "superlattice.eps=1.0")
        assert code == 0
        comments, _ = parse_csv(out)
        assert float(comments["gap_width_rad_s"]) == 0.0

    def test_band_edges_json(self, capsys):
        code, out, _ = run(capsys, "band-edges", "--paper-defaults", "--format", "json")
        assert code == 0
        payload = json.loads(out)
        by_edge = {r["edge"]: r for r in payload["records"]}
        assert by_edge["omega_1minus"]["omega_over_wsl"] == pytest.approx(1 / 3, rel=1e-12)

    def test_byte_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for d in (a, b):
            assert main(["modes", "--paper-defaults", "--set", "superlattice.n_cells=20",
                         "--out", str(d)]) == 0
        names = sorted(p.name for p in a.iterdir())
        assert names
        for name in names:
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_profile(self, capsys):
        code, out, _ = run(capsys, "profile", "--paper-defaults", "--set", "superlattice.n_cells=20",
                           "--index", "3")
        assert code == 0
        _, rows = parse_csv(out)
        assert rows[0]["segment"] == "sl" and rows[-1]["segment"] == "rh"
        assert float(rows[0]["re_I"]) == 0.0

    def test_dom_methods(self, capsys):
        _, out, _ = run(capsys, "dom", "--paper-defaults", "--set", "superlattice.n_cells=50")
        _, rows = parse_csv(out)
        assert {r["method"] for r in rows} == {"numerical", "analytical", "piecewise_fit"}

    def test_phase_diagram_jumps(self, tmp_path):
        code = main(["phase-diagram", "--paper-defaults", "--out", str(tmp_path), "--format", "json",
                     "--set", "superlattice.eps=1.1", "--set", "superlattice.n_cells=100",
                     "--set", "qubit.delta0_over_wsl=[1.5, 2.0]"])
        assert code == 0
        payload = json.loads((tmp_path / "phase_diagram.json").read_text())
        summary = payload["summary"]
        assert summary["jumps"]
        assert summary["all_converged"]
        g = [r["g_over_wsl"] for r in payload["records"]]
        assert np.isclose(max(g), 0.1)

    def test_renormalize_both(self, capsys):
        code, out, _ = run(capsys, "renormalize", "--paper-defaults", "--set", "superlattice.n_cells=50",
                           "--set", "qubit.g_over_wsl=[0.0, 0.01]", "--set", "qubit.delta0_over_wsl=[2.0]")
        assert code == 0
        _, rows = parse_csv(out)
        assert len(rows) == 4

    def test_config_error_exit(self, capsys, tmp_path):
        p = tmp_path / "bad.yaml"
        p.write_text("superlattice:\n  eps: 2.0\n  bogus: 1\n")
        code, out, err = run(capsys, "band-edges", "--paper-defaults", "--config", str(p))
        assert code == 2
        assert out == ""
        payload = json.loads(err)
        assert payload["error"] == "config"
        assert payload["key"] == "superlattice.bogus" and payload["line"] == 3

    def test_domain_error_exit(self, capsys):
        code, _, err = run(capsys, "profile", "--paper-defaults", "--set", "superlattice.n_cells=5",
                           "--index", "100000")
        assert code == 3
        assert json.loads(err)["error"] == "domain"

    def test_bad_set_syntax(self, capsys):
        code, _, err = run(capsys, "band-edges", "--paper-defaults", "--set", "superlattice.eps")
        assert code == 2
        assert json.loads(err)["error"] == "config"
