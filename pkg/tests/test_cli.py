import json

import pytest

from unildpc.cli import main

FAST = ["--grid-bins", "511", "--grid-range", "20", "--resolution", "15"]


def run(*argv):
    return main([str(a) for a in argv])


def read(path):
    with open(path) as fh:
        return fh.read()


class TestBasis:
    def test_single_channel(self, tmp_path):
        out = tmp_path / "b.json"
        assert run("basis", "--capacity", 0.5, "--levels-left", 1, "--levels-right", 1, "--out", out) == 0
        obj = json.loads(read(out))
        assert len(obj["channels"]) == 1
        assert obj["_meta"]["params"]["capacity"] == 0.5

    def test_default_resolution(self, tmp_path):
        out = tmp_path / "b.json"
        assert run("basis", "--capacity", 0.628, "--out", out) == 0
        obj = json.loads(read(out))
        nl, nr = len(obj["left_points"]), len(obj["right_points"])
        assert len(obj["channels"]) == nl * nr and nl + nr == 63

    @pytest.mark.parametrize("c", [1.0, 0.0, -0.2])
    def test_degenerate_capacity(self, tmp_path, c, capsys):
        assert run("basis", "--capacity", c, "--out", tmp_path / "b.json") == 2
        assert "error" in capsys.readouterr().err

    def test_missing_required(self):
        assert run("basis") == 2

    def test_unknown_flag(self):
        assert run("basis", "--capacity", 0.5, "--bogus", 1) == 2


class TestConfig:
    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"capacity": 0.4, "levels-left": 2, "levels_right": 2}))
        out = tmp_path / "b.json"
        assert run("basis", "--config", cfg, "--capacity", 0.5, "--out", out) == 0
        obj = json.loads(read(out))
        assert obj["_meta"]["params"]["capacity"] == 0.5
        assert len(obj["left_points"]) == len(obj["right_points"]) == 2

    def test_unknown_key(self, tmp_path):
        cfg = tmp_path / "c.json"
        cfg.write_text(json.dumps({"capacity": 0.4, "nope": 1}))
        assert run("basis", "--config", cfg) == 2

    def test_missing_config(self, tmp_path):
        assert run("basis", "--config", tmp_path / "none.json") == 2


class TestDesign:
    def test_degree_two_infeasible(self, tmp_path):
        assert run("design", "--capacity", 0.7, "--max-var-degree", 2, "--levels", 4, "--out", tmp_path / "d") == 3

    def test_bad_rho_range(self, tmp_path):
        assert run("design", "--capacity", 0.7, "--rho-mean-range", "9,3", "--out", tmp_path / "d") == 2


class TestThreshold:
    def test_regular_code(self, tmp_path):
        out, csv = tmp_path / "t.json", tmp_path / "t.csv"
        assert run("threshold", "--code", "regular36", "--tol", 0.1, *FAST, "--out", out, "--csv-out", csv) == 0
        obj = json.loads(read(out))
        lo, hi = obj["bracket"]
        assert hi - lo <= 0.1 and obj["monotone"]
        lines = read(csv).splitlines()
        assert lines[0].startswith("#") and "capacity,converged" in lines

    def test_missing_code_file(self, tmp_path):
        assert run("threshold", "--code", tmp_path / "missing.json", "--out", tmp_path / "t") == 2

    def test_tol_too_small(self, tmp_path):
        assert run("threshold", "--code", "regular36", "--tol", 1e-6, "--out", tmp_path / "t") == 2


class TestDe:
    def test_perfect_channel(self, tmp_path):
        out = tmp_path / "de.csv"
        ch = json.dumps({"type": "bec", "e": 0.0})
        assert run("de", "--code", "regular36", "--channel", ch, "--grid-bins", 511, "--out", out) == 0
        rows = [l for l in read(out).splitlines() if not l.startswith("#")]
        assert rows[0] == "iteration,error_prob,bhattacharyya"
        assert len(rows) == 2

    def test_bec_column(self, tmp_path):
        out = tmp_path / "de.csv"
        ch = json.dumps({"type": "bec", "e": 0.4})
        assert run("de", "--code", "regular36", "--channel", ch, "--grid-bins", 1023, "--out", out) == 0
        text = read(out)
        assert "converged=true" in text
        rows = [l.split(",") for l in text.splitlines() if not l.startswith("#")][1:]
        x = 0.4
        for it, _p, b in rows[:20]:
            x = 0.4 * (1 - (1 - x) ** 5) ** 2
            assert float(b) == pytest.approx(x, abs=1e-3)

    def test_bad_grid(self, tmp_path):
        ch = json.dumps({"type": "bsc", "epsilon": 0.05})
        assert run("de", "--code", "regular36", "--channel", ch, "--grid-bins", 100, "--out", tmp_path / "x") == 2

    def test_bad_channel(self, tmp_path):
        ch = json.dumps({"type": "bsc", "epsilon": 0.7})
        assert run("de", "--code", "regular36", "--channel", ch, "--out", tmp_path / "x") == 2


class TestSimulate:
    @pytest.fixture
    def channels(self, tmp_path):
        path = tmp_path / "ch.json"
        path.write_text(json.dumps([{"type": "bsc", "epsilon": 0.03}, {"type": "bec", "e": 0.3}]))
        return path

    def test_zero_trials(self, tmp_path, channels):
        out = tmp_path / "ber.csv"
        assert run("simulate", "--code", "regular36", "--channels-file", channels, "--n", 600, "--trials", 0,
                   "--out", out) == 0
        lines = read(out).splitlines()
        assert lines[-1] == "channel_json,capacity,bits_sent,bit_errors,ber"
        assert all(l.startswith("#") for l in lines[:-1])

    def test_byte_identical(self, tmp_path, channels):
        a, b, adj = tmp_path / "a.csv", tmp_path / "b.csv", tmp_path / "adj.txt"
        args = ["simulate", "--code", "regular36", "--channels-file", channels, "--n", 600, "--trials", 3,
                "--seed", 7]
        assert run(*args, "--out", a, "--adjacency-out", adj) == 0
        assert run(*args, "--out", b) == 0
        assert read(a) == read(b)
        assert len(read(adj).splitlines()) == 300

    def test_negative_trials(self, tmp_path, channels):
        assert run("simulate", "--code", "regular36", "--channels-file", channels, "--trials", -1,
                   "--out", tmp_path / "x") == 2


class TestValidate:
    def test_empty_pass(self, tmp_path):
        out = tmp_path / "v.json"
        assert run("validate", "--code", "regular36", "--capacity", 0.7, "--count", 0, *FAST, "--out", out) == 0
        obj = json.loads(read(out))
        assert obj["passed"] and obj["tested"] == 0

    def test_precondition(self, tmp_path, capsys):
        assert run("validate", "--code", "regular36", "--capacity", 0.52, "--count", 2, *FAST,
                   "--out", tmp_path / "v.json") == 4
        err = capsys.readouterr().err
        assert "failing_channel" in err

    def test_deterministic(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        args = ["validate", "--code", "regular36", "--capacity", 0.7, "--count", 3, "--mix-points", 1, *FAST]
        assert run(*args, "--seed", 3, "--out", a) == 0
        assert run(*args, "--seed", 3, "--out", b) == 0
        assert read(a) == read(b)
