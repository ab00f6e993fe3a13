import json
import os

import pytest

from webnav.cli import main


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    """Run the full CLI pipeline once on a small synthetic corpus."""
    root = tmp_path_factory.mktemp("cli")
    paths = {
        "corpus": str(root / "corpus.jsonl"),
        "graph": str(root / "graph.navg"),
        "stats": str(root / "stats.json"),
        "vectors": str(root / "vectors.txt"),
        "phi": str(root / "phi.bin"),
        "data": str(root / "data"),
        "model": str(root / "model.ckpt"),
        "report": str(root / "report.json"),
    }
    assert main(["synth", "--nodes", "160", "--categories", "12",
                 "--seed", "3", "--out", paths["corpus"]]) == 0
    assert main(["--quiet", "compile", "--corpus", paths["corpus"],
                 "--start", "Start", "--out", paths["graph"],
                 "--stats", paths["stats"]]) == 0
    assert main(["--quiet", "embed", "--corpus", paths["corpus"], "--dim", "16",
                 "--epochs", "6", "--lr", "0.1", "--seed", "1",
                 "--out", paths["vectors"]]) == 0
    assert main(["--quiet", "phi", "--graph", paths["graph"],
                 "--vectors", paths["vectors"], "--out", paths["phi"]]) == 0
    assert main(["--quiet", "gen", "--graph", paths["graph"], "--nh", "4",
                 "--nq", "1", "--train", "20", "--valid", "4", "--test", "4",
                 "--seed", "7", "--out", paths["data"]]) == 0
    assert main(["--quiet", "train", "--graph", paths["graph"],
                 "--phi", paths["phi"], "--vectors", paths["vectors"],
                 "--data", paths["data"], "--core", "ff", "--units", "16",
                 "--epochs", "4", "--lr", "0.1", "--seed", "2",
                 "--out", paths["model"]]) == 0
    return paths


def test_stats_file_schema(pipeline):
    stats = json.loads(open(pipeline["stats"]).read())
    assert set(stats) == {
        "nodes", "edges",
        "hyperlinks_mean", "hyperlinks_sd", "hyperlinks_max", "hyperlinks_min",
        "words_mean", "words_sd", "words_max", "words_min",
    }
    assert stats["nodes"] == 160


def test_eval_reward_and_report(pipeline, capsys):
    code = main(["--quiet", "eval", "--metric", "reward",
                 "--graph", pipeline["graph"], "--data", pipeline["data"],
                 "--model", pipeline["model"], "--phi", pipeline["phi"],
                 "--vectors", pipeline["vectors"], "--nn", "4",
                 "--out", pipeline["report"]])
    assert code == 0
    report = json.loads(open(pipeline["report"]).read())
    assert report["metric"] == "average_reward"
    assert 0.0 <= report["value"] <= 1.0
    assert "wall_time" not in json.dumps(report)
    assert main(["report", pipeline["report"]]) == 0
    out = capsys.readouterr().out
    assert "average_reward" in out


def test_eval_recall_simplesearch(pipeline, capsys):
    code = main(["--quiet", "eval", "--metric", "recall", "--system",
                 "simplesearch", "--graph", pipeline["graph"],
                 "--data", pipeline["data"], "--k", "4"])
    assert code == 0
    assert "recall@4" in capsys.readouterr().out


def test_search_command(pipeline, capsys):
    assert main(["--quiet", "search", "--graph", pipeline["graph"],
                 "--query", "t0w1 t0w2", "--k", "3"]) == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert 1 <= len(out) <= 3


def test_eval_read_only(pipeline):
    from webnav.graph import file_sha256

    before = {k: file_sha256(pipeline[k]) for k in ("graph", "phi", "model")}
    main(["--quiet", "eval", "--metric", "reward", "--graph", pipeline["graph"],
          "--data", pipeline["data"], "--model", pipeline["model"],
          "--phi", pipeline["phi"], "--vectors", pipeline["vectors"]])
    after = {k: file_sha256(pipeline[k]) for k in ("graph", "phi", "model")}
    assert before == after


def test_graph_mismatch_detected(pipeline, tmp_path):
    other_graph = str(tmp_path / "other.navg")
    corpus2 = str(tmp_path / "c2.jsonl")
    main(["synth", "--nodes", "40", "--categories", "4", "--seed", "9",
          "--out", corpus2])
    main(["--quiet", "compile", "--corpus", corpus2, "--start", "Start",
          "--out", other_graph])
    code = main(["--quiet", "eval", "--metric", "reward",
                 "--graph", other_graph, "--data", pipeline["data"],
                 "--model", pipeline["model"], "--phi", pipeline["phi"],
                 "--vectors", pipeline["vectors"]])
    assert code == 2


def test_usage_error_exit_code():
    assert main(["gen", "--graph"]) == 1
    assert main(["no-such-command"]) == 1


def test_data_error_exit_code(tmp_path):
    assert main(["--quiet", "compile", "--corpus", str(tmp_path / "missing.jsonl"),
                 "--start", "X", "--out", str(tmp_path / "g.navg")]) == 2


def test_import_qa_command(pipeline, tmp_path):
    pairs = tmp_path / "qa.jsonl"
    with open(pairs, "w") as fh:
        fh.write(json.dumps({"question": "Which article is 3?",
                             "answer": "Article 3"}) + "\n")
        fh.write(json.dumps({"question": "Missing?", "answer": "Nope"}) + "\n")
    out = tmp_path / "qa_data"
    assert main(["--quiet", "import-qa", "--graph", pipeline["graph"],
                 "--pairs", str(pairs), "--out", str(out)]) == 0
    meta = json.loads((out / "meta.json").read_text())
    assert meta["kind"] == "imported"
    assert meta["unresolved"] == 1


def test_train_init_flag_finetunes(pipeline, tmp_path):
    out = str(tmp_path / "fine.ckpt")
    code = main(["--quiet", "train", "--graph", pipeline["graph"],
                 "--phi", pipeline["phi"], "--vectors", pipeline["vectors"],
                 "--data", pipeline["data"], "--epochs", "1", "--lr", "0.1",
                 "--seed", "4", "--init", pipeline["model"], "--out", out])
    assert code == 0
    assert open(out, "rb").read() != open(pipeline["model"], "rb").read()


def test_global_seed_overrides_command_seed(pipeline, tmp_path):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    main(["--quiet", "--seed", "21", "gen", "--graph", pipeline["graph"],
          "--nh", "4", "--nq", "1", "--train", "4", "--valid", "1",
          "--test", "1", "--seed", "99", "--out", a])
    main(["--quiet", "gen", "--graph", pipeline["graph"], "--nh", "4",
          "--nq", "1", "--train", "4", "--valid", "1", "--test", "1",
          "--seed", "21", "--out", b])
    for name in ("train.jsonl", "meta.json"):
        assert (
            open(os.path.join(a, name), "rb").read()
            == open(os.path.join(b, name), "rb").read()
        )


def test_sweep_command_smoke(pipeline, tmp_path, capsys):
    out = str(tmp_path / "sweep.json")
    code = main(["--quiet", "sweep", "--graph", pipeline["graph"],
                 "--phi", pipeline["phi"], "--vectors", pipeline["vectors"],
                 "--nh", "4", "--nq", "1", "--seeds", "1", "--train", "6",
                 "--valid", "1", "--test", "2", "--units", "8",
                 "--epochs", "2", "--out", out])
    assert code == 0
    result = json.loads(open(out).read())
    assert "4-1" in result["cells"]
    assert main(["report", out]) == 0
    assert "n_h" in capsys.readouterr().out
