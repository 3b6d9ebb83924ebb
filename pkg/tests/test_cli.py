import csv
import json
import os
import subprocess
import sys
from pathlib import Path

import pytest

HERE = Path(__file__).parent
GOLDEN = HERE / "golden"
SMALL = HERE / "fixtures" / "small.csv"


def run(*args, env=None, cwd=None):
    full_env = {k: v for k, v in os.environ.items() if not k.startswith("IMSTRUCT_")}
    full_env.update(env or {})
    return subprocess.run([sys.executable, "-m", "imstruct", *map(str, args)],
                          capture_output=True, text=True, env=full_env, cwd=cwd)


def assert_same(doc, golden, ignore=()):
    if isinstance(golden, dict):
        assert set(doc) == set(golden)
        for key in golden:
            if key not in ignore:
                assert_same(doc[key], golden[key], ignore)
    elif isinstance(golden, list):
        assert len(doc) == len(golden)
        for a, b in zip(doc, golden):
            assert_same(a, b, ignore)
    elif isinstance(golden, float):
        assert doc == pytest.approx(golden, rel=1e-9, abs=1e-12)
    else:
        assert doc == golden


def analyze_args(out, *extra):
    return ["analyze", "--data", SMALL, "--response", "resp", "--exclude", "label", "--gamma", "1",
            "--alpha", "0.05", "--alpha", "0.5", "--mc-samples", "1000", "--out", out, *extra]


class TestGolden:
    def test_transform(self, tmp_path):
        res = run("transform", "--dist", "binom", "--params", "6,0.2", "--out", tmp_path / "t.json")
        assert res.returncode == 0, res.stderr
        assert_same(json.loads((tmp_path / "t.json").read_text()),
                    json.loads((GOLDEN / "transform_binom.json").read_text()))
        assert (tmp_path / "t.contour.csv").read_text() == (GOLDEN / "transform_binom.contour.csv").read_text()

    def test_elicit(self, tmp_path):
        res = run("elicit", "--p", "3", "--gamma", "1", "--grid", "0.5:2:0.5", "--out", tmp_path / "e.json")
        assert res.returncode == 0, res.stderr
        assert_same(json.loads((tmp_path / "e.json").read_text()),
                    json.loads((GOLDEN / "elicit_p3_gamma1.json").read_text()))

    def test_analyze_schema(self, tmp_path):
        res = run(*analyze_args(tmp_path / "a.json", "--seed", "7"))
        assert res.returncode == 0, res.stderr
        doc = json.loads((tmp_path / "a.json").read_text())
        golden = json.loads((GOLDEN / "analyze_small.json").read_text())
        assert_same(doc, golden, ignore=("data",))
        for table in ("structures", "complexity"):
            assert (tmp_path / f"a.{table}.csv").exists()


class TestAnalyze:
    def test_invariants_and_roundtrip(self, tmp_path):
        run(*analyze_args(tmp_path / "a.json"))
        doc = json.loads((tmp_path / "a.json").read_text())
        values = [r["possibility"] for r in doc["structures"]]
        assert all(0 <= v <= 1 for v in values)
        assert values.count(1.0) == 1
        reranked = sorted(doc["structures"], key=lambda r: (-r["possibility"], r["complexity"], r["mask"]))
        assert reranked == doc["structures"]
        with open(tmp_path / "a.structures.csv") as fh:
            rows = list(csv.DictReader(fh))
        assert [int(r["mask"]) for r in rows] == [r["mask"] for r in doc["structures"]]

    def test_bit_reproducible(self, tmp_path):
        run(*analyze_args(tmp_path / "a.json", "--seed", "3"))
        run(*analyze_args(tmp_path / "b.json", "--seed", "3", "--n-jobs", "2"))
        assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()

    def test_seed_from_environment_and_flag_precedence(self, tmp_path):
        run(*analyze_args(tmp_path / "a.json"), env={"IMSTRUCT_SEED": "11"})
        assert json.loads((tmp_path / "a.json").read_text())["metadata"]["seed"] == 11
        run(*analyze_args(tmp_path / "b.json", "--seed", "5"), env={"IMSTRUCT_SEED": "11"})
        assert json.loads((tmp_path / "b.json").read_text())["metadata"]["seed"] == 5

    def test_cache_dir_from_environment(self, tmp_path):
        cache = tmp_path / "cache"
        res = run(*analyze_args(tmp_path / "a.json"), env={"IMSTRUCT_CACHE_DIR": str(cache)})
        assert res.returncode == 0, res.stderr
        assert len(list(cache.glob("*.npz"))) == 1

    def test_gamma_zero_ranks_full_model_first(self):
        res = run("analyze", "--data", SMALL, "--response", "resp", "--exclude", "label",
                  "--gamma", "0", "--mc-samples", "1000")
        assert res.returncode == 0, res.stderr
        assert json.loads(res.stdout)["structures"][0]["mask"] == 7

    def test_interactions_with_marginality(self, tmp_path):
        res = run(*analyze_args(tmp_path / "a.json", "--interactions", "u:v", "--marginality"))
        assert res.returncode == 0, res.stderr
        doc = json.loads((tmp_path / "a.json").read_text())
        assert doc["metadata"]["covariates"][-1] == "u.v"
        # 16 subsets minus the 6 containing u.v without both parents
        assert doc["metadata"]["universe_size"] == 10


class TestElicitAndTransform:
    def test_target_mean(self):
        res = run("elicit", "--p", "3", "--target-mean", "0.6667")
        assert res.returncode == 0
        assert json.loads(res.stdout)["gamma"] == pytest.approx(0.8713204641, abs=1e-8)

    def test_p8(self):
        gamma = json.loads(run("elicit", "--p", "8", "--target-mean", "0.25").stdout)["gamma"]
        assert 1.5 < gamma < 2.0

    def test_gamma_grid_transform(self):
        res = run("transform", "--dist", "gamma", "--params", "2,1", "--grid", "0:10:0.01")
        rows = json.loads(res.stdout)["contour"]
        top = max(rows, key=lambda r: r["possibility"])
        assert top["point"] == 1.0 and top["possibility"] == 1.0


class TestSimulate:
    def test_coverage(self, tmp_path):
        res = run("simulate", "coverage", "--reps", "100", "--mc-samples", "1000", "--seed", "7",
                  "--alpha", "0.1", "--alpha", "0.3", "--out", tmp_path / "c.json")
        assert res.returncode == 0, res.stderr
        doc = json.loads((tmp_path / "c.json").read_text())
        assert [r["alpha"] for r in doc["records"]] == [0.1, 0.3]
        assert (tmp_path / "c.coverage.csv").exists()

    def test_validity(self):
        res = run("simulate", "validity", "--reps", "100", "--mc-samples", "1000")
        assert res.returncode == 0, res.stderr
        records = json.loads(res.stdout)["records"]
        assert records[-1] == {"alpha": 1.0, "cdf": 1.0}

    def test_false_confidence(self):
        res = run("simulate", "false-confidence", "--reps", "20", "--seed", "7")
        assert res.returncode == 0, res.stderr
        doc = json.loads(res.stdout)
        assert doc["records"][-1]["cdf"] == 1.0

    def test_invalid_config_is_usage_error(self):
        assert run("simulate", "coverage", "--reps", "10").returncode == 2


class TestExitCodes:
    def test_unknown_command(self):
        assert run("frobnicate").returncode == 2

    def test_missing_required_flag(self):
        assert run("analyze", "--data", SMALL).returncode == 2

    def test_negative_gamma(self):
        assert run("analyze", "--data", SMALL, "--response", "resp", "--gamma", "-1").returncode == 2

    def test_bad_target(self):
        assert run("elicit", "--p", "3", "--target-mean", "4").returncode == 2

    def test_unsupported_family(self):
        assert run("transform", "--dist", "cauchy", "--params", "0,1").returncode == 2

    def test_bad_seed(self):
        assert run("elicit", "--p", "3", "--gamma", "1", "--seed", "x").returncode == 2
        assert run("simulate", "false-confidence", "--reps", "2", env={"IMSTRUCT_SEED": "x"}).returncode == 2

    def test_missing_file(self, tmp_path):
        res = run("analyze", "--data", tmp_path / "nope.csv", "--response", "y", "--gamma", "1")
        assert res.returncode == 3
        assert json.loads(res.stderr)["error"] == "DataError"

    def test_non_numeric_cell(self, tmp_path):
        text = SMALL.read_text().splitlines()
        fields = text[3].split(",")
        fields[2] = "oops"
        text[3] = ",".join(fields)
        bad = tmp_path / "bad.csv"
        bad.write_text("\n".join(text) + "\n")
        res = run("analyze", "--data", bad, "--response", "resp", "--exclude", "label", "--gamma", "1")
        assert res.returncode == 3
        err = json.loads(res.stderr)
        assert err["row"] == 3 and err["column"] == "v"

    def test_rank_deficiency(self, tmp_path):
        lines = ["a,b,c,y"] + [f"{i},{2 * i},{i % 3},{i * 0.5 + (i % 2)}" for i in range(10)]
        path = tmp_path / "rank.csv"
        path.write_text("\n".join(lines) + "\n")
        res = run("analyze", "--data", path, "--response", "y", "--gamma", "1", "--mc-samples", "1000")
        assert res.returncode == 4
        assert json.loads(res.stderr)["error"] == "RankDeficiencyError"
