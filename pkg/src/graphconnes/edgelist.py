"""Line-oriented edge-list text format.

::

    # comment
    directed false
    node a          # optional; declares a node (needed for isolated ones)
    edge a b

The ``directed`` header must precede every other statement. Labels are
arbitrary whitespace-free tokens, mapped to dense ids in order of first
appearance. Any other keyword is an error.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .graph import Graph, GraphError, build_graph


class EdgeListError(GraphError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class LabelledGraph:
    graph: Graph
    labels: tuple[str, ...]

    def node(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise EdgeListError(f"unknown node label {label!r}") from None


def parse_edgelist(text: str) -> LabelledGraph:
    directed = None
    ids: dict[str, int] = {}
    edges: list[tuple[int, int]] = []

    def node_id(label: str) -> int:
        return ids.setdefault(label, len(ids))

    for lineno, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        key, args = tokens[0], tokens[1:]
        if key == "directed":
            if directed is not None:
                raise EdgeListError("repeated 'directed' header", lineno)
            if len(args) != 1 or args[0] not in ("true", "false"):
                raise EdgeListError("expected 'directed true' or 'directed false'", lineno)
            directed = args[0] == "true"
            continue
        if directed is None:
            raise EdgeListError("the 'directed' header must come first", lineno)
        if key == "node":
            if len(args) != 1:
                raise EdgeListError("expected 'node <label>'", lineno)
            node_id(args[0])
        elif key == "edge":
            if len(args) != 2:
                raise EdgeListError("expected 'edge <u> <v>'", lineno)
            u, v = node_id(args[0]), node_id(args[1])
            if u == v:
                raise EdgeListError(f"self-loop at {args[0]!r}", lineno)
            edges.append((u, v))
        else:
            raise EdgeListError(f"unknown keyword {key!r}", lineno)
    if directed is None:
        raise EdgeListError("missing 'directed' header")
    labels = tuple(sorted(ids, key=ids.get))
    try:
        graph = build_graph(len(ids), edges, directed)
    except GraphError as exc:
        raise EdgeListError(str(exc)) from None
    return LabelledGraph(graph, labels)


def format_edgelist(g: Graph, labels=None) -> str:
    """Serialize ``g``; every node is declared so ids survive a round trip."""
    labels = [str(v) for v in range(g.node_count)] if labels is None else list(labels)
    lines = [f"directed {'true' if g.directed else 'false'}"]
    lines += [f"node {label}" for label in labels]
    pairs = g.edges if g.directed else g.bonds()
    lines += [f"edge {labels[i]} {labels[k]}" for i, k in pairs]
    return "\n".join(lines) + "\n"


def read_edgelist(path) -> LabelledGraph:
    return parse_edgelist(Path(path).read_text(encoding="utf-8"))


def write_edgelist(path, g: Graph, labels=None) -> None:
    Path(path).write_text(format_edgelist(g, labels), encoding="utf-8")
