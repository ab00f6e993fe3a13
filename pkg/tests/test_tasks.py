import random
from collections import deque

import pytest

from webnav.corpus import RawDocument, compile_graph
from webnav.env import contains
from webnav.errors import DataError, GenerationError
from webnav.tasks import (
    Example,
    bfs_distances,
    check_example,
    find_path,
    generate_dataset,
    import_qa_pairs,
    load_splits,
    sample_path,
    save_splits,
    select_query,
)
from webnav.tfidf import build_tfidf_index
from webnav.textutil import tokenize


def all_shortest_paths(g, target):
    """Brute-force BFS oracle: every minimum-length start->target path."""
    best = None
    results = []
    queue = deque([(g.start_node, [g.start_node])])
    while queue:
        node, path = queue.popleft()
        if best is not None and len(path) > best:
            continue
        if node == target:
            if best is None:
                best = len(path)
            if len(path) == best:
                results.append(path)
            continue
        for nb in g.edges[node]:
            if nb not in path:  # shortest paths never revisit
                queue.append((nb, path + [nb]))
    return results


def chain_graph(*bodies):
    docs = [RawDocument(title=f"D{i}", body=b) for i, b in enumerate(bodies)]
    return compile_graph(iter(docs), "D0")


# --- sample_path -------------------------------------------------------------

def test_sample_path_on_chain_is_forced():
    g = chain_graph("go [[D1]]", "go [[D2]]", "end")
    path = sample_path(g, 2, random.Random(0))
    assert path == [0, 1, 2]


def test_sample_path_rejects_short_walks():
    g = chain_graph("go [[D1]] [[D2]]", "x", "y")
    with pytest.raises(DataError, match="at least 2"):
        sample_path(g, 1, random.Random(0))


def test_sample_path_restarts_on_dead_ends():
    # D1 is a dead end; only walks through D2 can reach 2 hops
    g = chain_graph("go [[D1]] [[D2]]", "stuck", "go [[D3]]", "end")
    for seed in range(5):
        path = sample_path(g, 2, random.Random(seed))
        assert path == [0, 2, 3]


def test_sample_path_errors_when_graph_too_shallow():
    g = chain_graph("go [[D1]]", "dead end")
    with pytest.raises(GenerationError, match="restarts"):
        sample_path(g, 3, random.Random(1))


def test_sample_path_seed_replay(synth_world):
    g = synth_world.graph
    first = sample_path(g, 4, random.Random(123))
    again = sample_path(g, 4, random.Random(123))
    assert first == again
    assert len(first) == 5


# --- select_query ------------------------------------------------------------

def window_scores_brute_force(g, node, n_q, idx):
    """Score every n_q-sentence window exactly as specified, independently."""
    spans = g.sentence_spans[node]
    text = g.texts[node]
    out = []
    for start in range(len(spans) - n_q + 1):
        window = text[spans[start][0] : spans[start + n_q - 1][1]]
        tokens = tokenize(window)
        score = (
            sum(idx.weight(t, node) for t in tokens) / len(tokens) if tokens else 0.0
        )
        out.append((score, start))
    return out


def test_select_query_single_candidate():
    g = chain_graph("Only one sentence here.", "filler [[D0]]")
    idx = build_tfidf_index(g)
    q = select_query(g, 0, 1, idx, random.Random(0))
    assert q == "Only one sentence here."


def test_select_query_no_candidate():
    g = chain_graph("One. Two. Three.", "filler")
    idx = build_tfidf_index(g)
    assert select_query(g, 0, 4, idx, random.Random(0)) is None


def test_select_query_top5_matches_brute_force():
    sentences = [
        "Zebra quagga unique words here.",
        "Common common common filler.",
        "Another rare xylophone sentence.",
        "More common filler text again.",
        "Quetzal jaguar words appear.",
        "Filler filler filler ends.",
        "Rare vocabulary wins scores.",
        "The last common sentence closes.",
    ]
    body = " ".join(sentences)
    g = chain_graph(body, "common filler text [[D0]]")
    idx = build_tfidf_index(g)
    assert len(g.sentence_spans[0]) == 8
    scored = window_scores_brute_force(g, 0, 2, idx)
    assert len(scored) == 7
    scored.sort(key=lambda item: (-item[0], item[1]))
    top5_starts = {start for _, start in scored[:5]}
    text = g.texts[0]
    spans = g.sentence_spans[0]
    top5_windows = {
        text[spans[s][0] : spans[s + 1][1]] for s in top5_starts
    }
    seen = set()
    for seed in range(60):
        seen.add(select_query(g, 0, 2, idx, random.Random(seed)))
    assert seen == top5_windows


def test_select_query_ties_prefer_earlier_window():
    # six sentences that permute the same words: every window scores the
    # same, so only the five earliest windows can be drawn
    words = ["alpha", "beta", "gamma", "delta"]
    sentences = [
        " ".join(words[i:] + words[:i]).capitalize() + "."
        for i in range(4)
    ] + ["Alpha gamma beta delta.", "Delta beta gamma alpha."]
    g = chain_graph(" ".join(sentences), "filler [[D0]]")
    idx = build_tfidf_index(g)
    spans = g.sentence_spans[0]
    text = g.texts[0]
    assert len(spans) == 6
    seen = set()
    for seed in range(60):
        q = select_query(g, 0, 1, idx, random.Random(seed))
        seen.add(next(s for s, (a, b) in enumerate(spans) if text[a:b] == q))
    assert seen == {0, 1, 2, 3, 4}


# --- find_path ---------------------------------------------------------------

def test_find_path_to_start_is_trivial(tiny_graph):
    assert find_path(tiny_graph, tiny_graph.start_node) == [tiny_graph.start_node]


def test_find_path_chain():
    g = chain_graph("go [[D1]]", "go [[D2]]", "end")
    assert find_path(g, 2) == [0, 1, 2]


def test_find_path_unreachable():
    docs = [
        RawDocument(title="A", body="no links"),
        RawDocument(title="B", body="islands [[A]]"),
    ]
    g = compile_graph(iter(docs), "A")
    assert find_path(g, 1) is None


def test_find_path_prefers_lowest_parent():
    # two shortest paths to D3: via D1 and via D2; the lowest parent wins
    docs = [
        RawDocument(title="D0", body="[[D1]] [[D2]]"),
        RawDocument(title="D1", body="[[D3]]"),
        RawDocument(title="D2", body="[[D3]]"),
        RawDocument(title="D3", body="end"),
    ]
    g = compile_graph(iter(docs), "D0")
    path = find_path(g, 3)
    oracle = all_shortest_paths(g, 3)
    assert path in oracle
    assert path == min(oracle)  # lexicographically smallest parent chain


def test_find_path_length_matches_bfs_oracle(synth_world):
    g = synth_world.graph
    dist = bfs_distances(g, g.start_node)
    for target in range(0, g.n_nodes, 37):
        path = find_path(g, target)
        if dist[target] is None:
            assert path is None
        else:
            assert len(path) == dist[target] + 1
            check_example(
                g, Example(query="q", target=target, path=tuple(path))
            )


# --- generate_dataset ----------------------------------------------------------

def test_generate_dataset_validity(synth_world):
    g = synth_world.graph
    splits = generate_dataset(g, 4, 1, {"train": 2, "valid": 1, "test": 1}, seed=3)
    targets = {}
    for name in ("train", "valid", "test"):
        for ex in splits.split(name):
            check_example(g, ex)
            assert contains(g.texts[ex.target], ex.query)
            targets.setdefault(name, set()).add(ex.target)
    assert not targets["train"] & targets["valid"]
    assert not targets["train"] & targets["test"]
    assert not targets["valid"] & targets["test"]


def test_generate_dataset_hop_count_is_half_nh(synth_world):
    splits = generate_dataset(
        synth_world.graph, 4, 1, {"train": 5, "valid": 0, "test": 0}, seed=9
    )
    for ex in splits.train:
        assert len(ex.path) == 3  # 2 hops


def test_generate_dataset_rejects_odd_nh(synth_world):
    with pytest.raises(DataError):
        generate_dataset(synth_world.graph, 5, 1, {"train": 1}, seed=0)
    with pytest.raises(DataError):
        generate_dataset(synth_world.graph, 2, 1, {"train": 1}, seed=0)


def test_generate_dataset_deterministic_files(tmp_path, synth_world):
    g = synth_world.graph
    out1, out2 = tmp_path / "d1", tmp_path / "d2"
    for out in (out1, out2):
        splits = generate_dataset(g, 4, 2, {"train": 4, "valid": 2, "test": 2}, seed=21)
        save_splits(splits, str(out), graph_sha256="x")
    for name in ("train.jsonl", "valid.jsonl", "test.jsonl", "meta.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_generate_dataset_error_reports_achieved_counts():
    g = chain_graph("go [[D1]]. Sentence.", "go [[D2]]. Sentence.", "end. Sentence.")
    # only one possible 2-hop target; valid cannot claim a second one
    with pytest.raises(GenerationError, match="achieved"):
        generate_dataset(g, 4, 1, {"train": 1, "valid": 1, "test": 0}, seed=0)


def test_save_load_roundtrip(tmp_path, synth_world):
    splits = generate_dataset(
        synth_world.graph, 4, 1, {"train": 3, "valid": 1, "test": 1}, seed=5
    )
    save_splits(splits, str(tmp_path / "ds"), graph_sha256="abc")
    loaded = load_splits(str(tmp_path / "ds"))
    assert loaded.train == splits.train
    assert loaded.valid == splits.valid
    assert loaded.test == splits.test
    assert loaded.meta["graph_sha256"] == "abc"
    assert loaded.meta["n_h"] == 4


# --- import_qa_pairs ----------------------------------------------------------

def qa_world():
    docs = [
        RawDocument(title="Start", body="hub [[Copernicus]] [[Mid]]"),
        RawDocument(title="Copernicus", body="An astronomer."),
        RawDocument(title="Mid", body="[[Washington]]"),
        RawDocument(title="Washington", body="A state."),
        RawDocument(title="Island", body="unreachable"),
    ]
    return compile_graph(iter(docs), "Start")


def test_import_qa_keeps_resolvable_reachable_pairs():
    g = qa_world()
    pairs = [
        ("Galileo espoused this man's theory.", "Copernicus"),
        ("Record snow fell in this state.", "Washington"),
        ("Gone.", "NoSuchPage"),
        ("Stranded.", "Island"),
    ]
    splits = import_qa_pairs(g, pairs, {"train": 2, "valid": 1, "test": 1})
    kept = splits.train + splits.valid + splits.test
    assert len(kept) == 2
    assert kept[0].query.startswith("Galileo")
    assert kept[0].target == g.node_id("Copernicus")
    assert splits.meta["unresolved"] == 1
    assert splits.meta["unreachable"] == 1


def test_import_qa_paths_are_minimal():
    g = qa_world()
    splits = import_qa_pairs(g, [("q", "Washington")], {"train": 1})
    (ex,) = splits.train
    assert list(ex.path) == [0, 2, 3]  # BFS shortest
    dist = bfs_distances(g, g.start_node)
    assert len(ex.path) - 1 == dist[ex.target]


def test_import_qa_repeat_answers_stay_in_one_split():
    g = qa_world()
    pairs = [(f"q{i}", "Copernicus") for i in range(4)] + [("w", "Washington")]
    splits = import_qa_pairs(g, pairs, {"train": 1, "valid": 1, "test": 1})
    # all Copernicus pairs follow the first into train, even past its count
    assert [ex.query for ex in splits.train] == ["q0", "q1", "q2", "q3"]
    assert [ex.target for ex in splits.valid] == [g.node_id("Washington")]


def test_import_qa_preserves_input_order():
    g = qa_world()
    pairs = [("a", "Copernicus"), ("b", "Washington"), ("c", "Copernicus")]
    splits = import_qa_pairs(g, pairs, {"train": 10, "valid": 0, "test": 0})
    assert [ex.query for ex in splits.train] == ["a", "b", "c"]


def test_import_qa_zero_retained_is_an_error():
    g = qa_world()
    with pytest.raises(DataError, match="no usable pairs"):
        import_qa_pairs(g, [("q", "Nope")], {"train": 1})


def test_import_qa_hop_histogram_matches_bfs_oracle(synth_world):
    g = synth_world.graph
    rng = random.Random(4)
    titles = [g.titles[rng.randrange(g.n_nodes)] for _ in range(20)]
    pairs = [(f"question {i}", t) for i, t in enumerate(titles)]
    splits = import_qa_pairs(g, pairs, {"train": 20, "valid": 0, "test": 0})
    dist = bfs_distances(g, g.start_node)
    for ex in splits.train:
        assert len(ex.path) - 1 == dist[ex.target]
