"""Immutable directed document graph and its on-disk container.

The ``.navg`` container is a single file: magic string, format version,
node table (length-prefixed UTF-8 title and text plus sentence spans), then
one adjacency list per node encoded as zigzag-varint deltas. The byte layout
is part of the contract: compiling identical corpus bytes must produce an
identical file.
"""

from __future__ import annotations

import hashlib
import io
import struct
from dataclasses import dataclass, field

from .errors import DataError

MAGIC = b"WNAVGRPH"
FORMAT_VERSION = 1

_U32 = struct.Struct("<I")


@dataclass(frozen=True)
class NavGraph:
    """The navigation world: one node per document, edges in link order.

    Node ids are dense integers 0..N-1 assigned in corpus order. ``edges[i]``
    lists target node ids in the textual order of the source links (the list
    position is the edge index); duplicates and self-loops are preserved.
    ``sentence_spans[i]`` are (start, end) character offsets into
    ``texts[i]``.
    """

    titles: list[str]
    texts: list[str]
    sentence_spans: list[list[tuple[int, int]]]
    edges: list[list[int]]
    start_node: int
    format_version: int = FORMAT_VERSION
    _title_to_id: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(
            self, "_title_to_id", {t: i for i, t in enumerate(self.titles)}
        )

    @property
    def n_nodes(self) -> int:
        return len(self.titles)

    @property
    def n_edges(self) -> int:
        return sum(len(e) for e in self.edges)

    def node_id(self, title: str) -> int | None:
        return self._title_to_id.get(title)

    def out_degree(self, node: int) -> int:
        return len(self.edges[node])

    def neighbors(self, node: int) -> list[int]:
        return self.edges[node]

    def validate(self) -> None:
        n = self.n_nodes
        if n == 0:
            raise DataError("graph has no nodes")
        if not 0 <= self.start_node < n:
            raise DataError(f"start node {self.start_node} out of range")
        for i, targets in enumerate(self.edges):
            for t in targets:
                if not 0 <= t < n:
                    raise DataError(f"edge {i}->{t} points outside the graph")
        for i, spans in enumerate(self.sentence_spans):
            limit = len(self.texts[i])
            for s, e in spans:
                if not 0 <= s < e <= limit:
                    raise DataError(f"sentence span ({s},{e}) of node {i} out of range")


def _zigzag(v: int) -> int:
    return (v << 1) if v >= 0 else ((-v) << 1) - 1


def _unzigzag(z: int) -> int:
    return (z >> 1) if (z & 1) == 0 else -((z + 1) >> 1)


def _write_varint(buf: io.BytesIO, z: int) -> None:
    while True:
        b = z & 0x7F
        z >>= 7
        if z:
            buf.write(bytes((b | 0x80,)))
        else:
            buf.write(bytes((b,)))
            return


def _read_varint(buf: io.BytesIO) -> int:
    shift = 0
    z = 0
    while True:
        raw = buf.read(1)
        if not raw:
            raise DataError("truncated varint in graph file")
        b = raw[0]
        z |= (b & 0x7F) << shift
        if not b & 0x80:
            return z
        shift += 7


def _write_blob(buf: io.BytesIO, text: str) -> None:
    raw = text.encode("utf-8")
    buf.write(_U32.pack(len(raw)))
    buf.write(raw)


def _read_u32(buf: io.BytesIO) -> int:
    raw = buf.read(4)
    if len(raw) != 4:
        raise DataError("truncated graph file")
    return _U32.unpack(raw)[0]


def _read_blob(buf: io.BytesIO) -> str:
    n = _read_u32(buf)
    raw = buf.read(n)
    if len(raw) != n:
        raise DataError("truncated graph file")
    return raw.decode("utf-8")


def save_graph(g: NavGraph, path: str) -> None:
    buf = io.BytesIO()
    buf.write(MAGIC)
    buf.write(_U32.pack(g.format_version))
    buf.write(_U32.pack(g.n_nodes))
    buf.write(_U32.pack(g.start_node))
    for i in range(g.n_nodes):
        _write_blob(buf, g.titles[i])
        _write_blob(buf, g.texts[i])
        spans = g.sentence_spans[i]
        buf.write(_U32.pack(len(spans)))
        for s, e in spans:
            buf.write(_U32.pack(s))
            buf.write(_U32.pack(e))
    for targets in g.edges:
        buf.write(_U32.pack(len(targets)))
        prev = 0
        for t in targets:
            _write_varint(buf, _zigzag(t - prev))
            prev = t
    with open(path, "wb") as fh:
        fh.write(buf.getvalue())


def load_graph(path: str) -> NavGraph:
    with open(path, "rb") as fh:
        buf = io.BytesIO(fh.read())
    if buf.read(len(MAGIC)) != MAGIC:
        raise DataError(f"{path}: not a graph file (bad magic)")
    version = _read_u32(buf)
    if version != FORMAT_VERSION:
        raise DataError(f"{path}: unsupported graph format version {version}")
    n = _read_u32(buf)
    start = _read_u32(buf)
    titles, texts, spans = [], [], []
    for _ in range(n):
        titles.append(_read_blob(buf))
        texts.append(_read_blob(buf))
        k = _read_u32(buf)
        spans.append([(_read_u32(buf), _read_u32(buf)) for _ in range(k)])
    edges: list[list[int]] = []
    for _ in range(n):
        deg = _read_u32(buf)
        targets = []
        prev = 0
        for _ in range(deg):
            prev = prev + _unzigzag(_read_varint(buf))
            targets.append(prev)
        edges.append(targets)
    g = NavGraph(titles, texts, spans, edges, start, version)
    g.validate()
    return g


def file_sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()
