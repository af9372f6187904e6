import json

import numpy as np
import pytest

from interference_ri.cli import main
from interference_ri.fileio import load_outcomes, parse_grid, save_outcomes
from interference_ri.assignment import save_assignment
from interference_ri.exceptions import ParseError
from interference_ri.models import make_model
from interference_ri.network import generate_network, generate_positions, load_edges, save_edges

import oracles


@pytest.fixture
def files(tmp_path):
    n = 8
    net = generate_network(generate_positions(n, 3), 9)
    y0 = np.random.default_rng(1).uniform(30, 70, n)
    z = np.array([1, 0, 1, 0, 0, 1, 1, 0])
    y = make_model("spillover", net).from_uniformity(y0, z, {"beta": 2.0, "tau": 0.5})
    save_edges(net, tmp_path / "net.csv")
    save_outcomes(y, tmp_path / "y.txt")
    save_assignment(z, tmp_path / "z.txt")
    return tmp_path, net, y, z


def data_args(tmp):
    return ["--outcomes", str(tmp / "y.txt"), "--assignment", str(tmp / "z.txt"), "--network", str(tmp / "net.csv")]


def run_json(capsys, argv):
    assert main(argv) == 0
    return json.loads(capsys.readouterr().out)


class TestNetgen:
    def test_two_units(self, tmp_path):
        assert main(["netgen", "--n", "2", "--edges", "1", "--seed", "1", "--out", str(tmp_path / "e.csv")]) == 0
        assert (tmp_path / "e.csv").read_text() == "u,v\n0,1\n"

    def test_byte_identical(self, tmp_path):
        for name in ("a", "b"):
            main(["netgen", "--n", "40", "--edges", "60", "--seed", "9", "--out", str(tmp_path / f"{name}.csv"),
                  "--positions-out", str(tmp_path / f"{name}_pos.csv")])
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a_pos.csv").read_bytes() == (tmp_path / "b_pos.csv").read_bytes()

    def test_large_network_size(self, tmp_path):
        main(["netgen", "--n", "256", "--edges", "512", "--seed", "4", "--out", str(tmp_path / "e.csv")])
        lines = (tmp_path / "e.csv").read_text().splitlines()[1:]
        assert len(lines) == 512
        deg = np.zeros(256, int)
        for line in lines:
            u, v = map(int, line.split(","))
            deg[u] += 1
            deg[v] += 1
        assert deg.sum() == 1024

    def test_bad_flags(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["netgen", "--n", "2"])
        assert info.value.code == 2
        assert main(["netgen", "--n", "3", "--edges", "9", "--seed", "1", "--out", str(tmp_path / "e.csv")]) == 2

    def test_seed_required(self, tmp_path):
        with pytest.raises(SystemExit) as info:
            main(["netgen", "--n", "3", "--edges", "1", "--out", str(tmp_path / "e.csv")])
        assert info.value.code == 2


class TestTest:
    def test_constant_outcomes(self, tmp_path, capsys):
        save_outcomes(np.full(6, 3.0), tmp_path / "y.txt")
        save_assignment([1, 1, 1, 0, 0, 0], tmp_path / "z.txt")
        out = run_json(capsys, ["test", "--outcomes", str(tmp_path / "y.txt"), "--assignment",
                                str(tmp_path / "z.txt"), "--method", "exact"])
        assert out["p_value"] == 1.0 and out["observed_stat"] == 0.0

    def test_sharp_null_equivalence(self, files, capsys):
        tmp, *_ = files
        common = data_args(tmp) + ["--method", "montecarlo", "--draws", "300", "--seed", "5", "--stat", "rank"]
        a = run_json(capsys, ["test", *common, "--model", "spillover", "--beta", "1", "--tau", "0.7"])
        b = run_json(capsys, ["test", *common, "--model", "additive", "--alpha", "0"])
        assert a["p_value"] == b["p_value"]

    def test_exact_matches_oracle(self, files, capsys):
        tmp, net, y, z = files
        out = run_json(capsys, ["test", *data_args(tmp), "--model", "spillover", "--beta", "1.5", "--tau", "0.4",
                                "--method", "exact", "--stat", "ks"])
        expected = oracles.exact_pvalue("spillover", "ks", y.tolist(), z.tolist(), net.sorted_edges(),
                                        {"beta": 1.5, "tau": 0.4})
        assert out["p_value"] == float(expected)
        assert out["reference_size"] == 70

    def test_montecarlo_without_seed(self, files):
        tmp, *_ = files
        assert main(["test", *data_args(tmp), "--method", "montecarlo"]) == 2

    def test_missing_param(self, files):
        tmp, *_ = files
        assert main(["test", *data_args(tmp), "--model", "spillover", "--beta", "2", "--method", "exact"]) == 2

    def test_exact_too_large_exit_3(self, tmp_path):
        save_outcomes(np.arange(40.0), tmp_path / "y.txt")
        save_assignment([1] * 20 + [0] * 20, tmp_path / "z.txt")
        assert main(["test", "--outcomes", str(tmp_path / "y.txt"), "--assignment", str(tmp_path / "z.txt"),
                     "--method", "exact"]) == 3

    def test_asymptotic_rank_exit_3(self, files):
        tmp, *_ = files
        assert main(["test", *data_args(tmp), "--stat", "rank", "--method", "asymptotic"]) == 3

    def test_bad_outcome_file(self, files):
        tmp, *_ = files
        (tmp / "y.txt").write_text("y\n1.0\nabc\n")
        assert main(["test", *data_args(tmp), "--method", "exact"]) == 2


class TestGridAndRegion:
    def grid(self, tmp, out, seed="3"):
        return main(["grid", *data_args(tmp), "--model", "spillover", "--beta-grid", "0.5:3:6",
                     "--tau-grid", "0:1:5", "--method", "montecarlo", "--draws", "200", "--seed", seed,
                     "--out", str(out), "--report", str(out.with_suffix(".json"))])

    def test_rows_and_determinism(self, files):
        tmp, *_ = files
        assert self.grid(tmp, tmp / "s1.csv") == 0
        assert self.grid(tmp, tmp / "s2.csv") == 0
        text = (tmp / "s1.csv").read_text()
        assert text == (tmp / "s2.csv").read_text()
        assert len(text.splitlines()) == 1 + 6 * 5
        report = json.loads((tmp / "s1.json").read_text())
        assert report["provenance"]["method"] == {"kind": "montecarlo", "draws": 200, "seed": 3}

    def test_beta_one_row_constant(self, files):
        tmp, *_ = files
        main(["grid", *data_args(tmp), "--model", "spillover", "--beta-grid", "1:1:1", "--tau-grid", "0:2:9",
              "--method", "exact", "--out", str(tmp / "s.csv")])
        ps = {line.split(",")[-1] for line in (tmp / "s.csv").read_text().splitlines()[1:]}
        assert len(ps) == 1

    def test_region(self, files, capsys):
        tmp, *_ = files
        self.grid(tmp, tmp / "s.csv")
        rows = (tmp / "s.csv").read_text().splitlines()
        maxp = max(float(r.split(",")[-1]) for r in rows[1:])

        def region(alpha):
            assert main(["region", "--surface", str(tmp / "s.csv"), "--alpha", str(alpha)]) == 0
            return capsys.readouterr().out.splitlines()

        assert region(min(maxp, 0.999)) == ["beta,tau,p"] or maxp == 1.0
        assert region(1e-9) == rows
        kept = [set(region(a)[1:]) for a in (0.01, 0.05, 0.2, 0.5)]
        assert all(b <= a for a, b in zip(kept, kept[1:]))

    def test_grid_flag_syntax(self):
        assert parse_grid("0:1:5").tolist() == [0.0, 0.25, 0.5, 0.75, 1.0]
        assert parse_grid("2").tolist() == [2.0]
        with pytest.raises(ParseError):
            parse_grid("0:1")
        with pytest.raises(ParseError):
            parse_grid("0:1:0")


class TestSimulate:
    def test_density_zero_preset(self, tmp_path):
        cfg = {"preset": "density", "member": "edges0", "axis": "tau", "replications": 15, "draws": 100,
               "seed": 8}
        (tmp_path / "c.json").write_text(json.dumps(cfg))
        assert main(["simulate", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "r.json")]) == 0
        rates = {line.split(",")[2] for line in (tmp_path / "r_edges0_power.csv").read_text().splitlines()[1:]}
        assert len(rates) == 1
        report = json.loads((tmp_path / "r.json").read_text())
        assert set(report["members"]["edges0"]) == {"config", "power", "size", "coverage"}

    def test_deterministic(self, tmp_path):
        cfg = {"n": 16, "edges": 20, "replications": 12, "draws": 100, "seed": 2,
               "grid": {"beta": [1.0, 2.0], "tau": [0.5]}}
        (tmp_path / "c.json").write_text(json.dumps(cfg))
        for name in ("a", "b"):
            assert main(["simulate", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / f"{name}.json")]) == 0
        assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()
        assert (tmp_path / "a_config_size.csv").read_bytes() == (tmp_path / "b_config_size.csv").read_bytes()

    def test_seed_required(self, tmp_path):
        (tmp_path / "c.json").write_text(json.dumps({"n": 16, "edges": 20}))
        assert main(["simulate", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "r.json")]) == 2

    def test_bad_config(self, tmp_path):
        (tmp_path / "c.json").write_text("{not json")
        assert main(["simulate", "--config", str(tmp_path / "c.json"), "--out", str(tmp_path / "r.json")]) == 2


def test_outcome_file_header_and_errors(tmp_path):
    (tmp_path / "y.txt").write_text("y\n1.5\n-2\n\n3e2\n")
    assert load_outcomes(tmp_path / "y.txt").tolist() == [1.5, -2.0, 300.0]
    (tmp_path / "y.txt").write_text("1\nnan\n")
    with pytest.raises(ParseError) as info:
        load_outcomes(tmp_path / "y.txt")
    assert info.value.line == 2


def test_edge_roundtrip_via_cli(tmp_path):
    main(["netgen", "--n", "20", "--edges", "30", "--seed", "1", "--out", str(tmp_path / "e.csv")])
    net = load_edges(tmp_path / "e.csv", n=20)
    assert net == generate_network(generate_positions(20, 1), 30)
