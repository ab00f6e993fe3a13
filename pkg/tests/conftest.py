import numpy as np
import pytest

from webnav.corpus import RawDocument, compile_graph
from webnav.embeddings import compute_phi, train_cbow
from webnav.synth import make_synthetic_corpus


@pytest.fixture
def tiny_docs():
    return [
        RawDocument(
            title="Alpha",
            body=(
                "Alpha is the first article. It mentions [[Beta|the second one]] "
                "and [[Gamma]].\n"
                "== External Links ==\n"
                "Hidden [[Delta]] link here.\n"
                "== History ==\n"
                "Alpha grew. See [[Beta]] again."
            ),
        ),
        RawDocument(
            title="Beta",
            body="Beta follows alpha. A path continues to [[Gamma]] now.",
        ),
        RawDocument(
            title="Gamma",
            body="Gamma ends many paths. It links [[Missing]] and [[Gamma]] itself.",
        ),
        RawDocument(title="Wikipedia:About", body="Meta page linking [[Alpha]]."),
    ]


@pytest.fixture
def tiny_graph(tiny_docs):
    return compile_graph(iter(tiny_docs), "Alpha")


class SynthWorld:
    """Shared desk-scale world: 500-node synthetic graph plus embeddings."""

    def __init__(self):
        self.docs = make_synthetic_corpus(500, seed=11)
        self.graph = compile_graph(iter(self.docs), "Start")
        self.wv = train_cbow(
            list(self.graph.texts), dim=32, window=5, epochs=30, lr=0.1, seed=5
        )
        self.phi32 = compute_phi(self.graph, self.wv)
        self.phi = self.phi32.astype(np.float64)


@pytest.fixture(scope="session")
def synth_world():
    return SynthWorld()
