#!/usr/bin/env python3
"""Regenerate recorded_session.json by scripting one session against the
real service. The recorded exchange drives the UI replay test: the client,
fed exactly these responses, must arrive at exactly this summary.

Run from the repository root (server package installed):

    python frontend/fixtures/record_fixture.py
"""

import json
import os

from fastapi.testclient import TestClient

from webnav.corpus import RawDocument, compile_graph
from webnav.service import create_app
from webnav.tasks import DatasetSplits, Example


def build_world():
    docs = [
        RawDocument(
            title="Hub",
            body="The hub. " + " ".join(f"[[N{i}]]" for i in range(6)),
        ),
        RawDocument(title="N0", body="Zero. The magic answer sits here."),
        RawDocument(title="N1", body="One body."),
        RawDocument(title="N2", body="Two. The magic answer sits here."),
        RawDocument(title="N3", body="Three goes back."),
        RawDocument(title="N4", body="Four."),
        RawDocument(title="N5", body="Five."),
    ]
    g = compile_graph(iter(docs), "Hub")
    examples = [
        Example(query="The magic answer sits here.", target=1, path=(0, 1)),
        Example(query="One body.", target=2, path=(0, 2)),
        Example(query="Three goes back.", target=4, path=(0, 4)),
    ]
    splits = DatasetSplits(train=[], valid=[], test=examples,
                           meta={"kind": "generated", "n_h": 4, "n_q": 1})
    return g, {"demo": splits}


class Recorder:
    def __init__(self, client):
        self.client = client
        self.exchange = []

    def call(self, method, path, body=None):
        if method == "GET":
            res = self.client.get(path)
        else:
            res = self.client.post(path, json=body)
        entry = {
            "request": {"method": method, "path": path},
            "response": {"status": res.status_code, "json": res.json()},
        }
        if body is not None:
            entry["request"]["body"] = body
        self.exchange.append(entry)
        return res.json()


def main():
    clock_value = [100000.0]
    g, datasets = build_world()
    app = create_app(g, datasets, store_dir=None, clock=lambda: clock_value[0])
    rec = Recorder(TestClient(app))

    rec.call("GET", "/api/datasets")
    created = rec.call("POST", "/api/sessions", {
        "dataset": "demo", "limits": {"max_queries": 3}, "seed": 5,
    })
    sid = created["session"]
    base = f"/api/sessions/{sid}"

    def act(body):
        return rec.call("POST", f"{base}/actions", body)

    # trial 1: peek the right edge, move, stop (success on this world)
    obs = created["observation"]
    queries = {ex.query: ex for ex in datasets["demo"].test}
    ex = queries[obs["query"]]
    edge = g.edges[0].index(ex.path[1])
    act({"type": "peek", "edge": edge})
    act({"type": "move", "edge": edge})
    act({"type": "stop"})

    # trial 2: hit the peek budget, then give up
    for i in range(4):
        act({"type": "peek", "edge": i})
    act({"type": "peek", "edge": 4})  # rejected: BudgetExceeded
    rec.call("GET", f"{base}/observation")  # client reconciles
    act({"type": "giveup"})

    # trial 3: stop at the hub (failure); session completes
    act({"type": "stop"})
    rec.call("GET", f"{base}/summary")

    out = os.path.join(os.path.dirname(__file__), "recorded_session.json")
    with open(out, "w", encoding="utf-8") as fh:
        json.dump({"exchange": rec.exchange}, fh, indent=2, ensure_ascii=False,
                  sort_keys=True)
        fh.write("\n")
    print(f"{out}: {len(rec.exchange)} exchanges")


if __name__ == "__main__":
    main()
