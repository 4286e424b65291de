"""Typed company knowledge graph: loading, entity resolution, relation extraction.

The graph file is JSON lines of node and edge records. Duplicate company
identities (joined by same-company edges) are merged before extraction.
First-order relations are direct edges between in-universe companies;
second-order relations connect two in-universe companies that share an
intermediate node (industry, customer or supplier counterparty). The seven
relations stack into an N x N x K adjacency tensor with a unit diagonal.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import (
    ConfigurationError,
    EmptyGraphError,
    IntegrityError,
    ParseError,
    ResolutionConflictError,
    SchemaError,
    UnknownTickerError,
)

NODE_TYPES = frozenset({"company", "sector", "industry", "country"})
EDGE_TYPES = frozenset(
    {
        "in-country",
        "in-industry",
        "in-sector",
        "parent-company-of",
        "partner-with",
        "related-to",
        "same-company",
        "shareholder",
        "supplier",
        "customer",
        "partner",
    }
)


@dataclass(frozen=True)
class Node:
    id: str
    node_type: str
    in_nikkei: bool


@dataclass(frozen=True)
class Edge:
    src: str
    dst: str
    edge_type: str


@dataclass(frozen=True)
class KnowledgeGraph:
    """Validated node and edge sets; nodes keyed by id."""

    nodes: dict[str, Node]
    edges: frozenset[Edge]

    @property
    def company_universe(self) -> tuple[str, ...]:
        """Lexicographically ordered in-market company ids."""
        return tuple(
            sorted(n.id for n in self.nodes.values() if n.node_type == "company" and n.in_nikkei)
        )


@dataclass(frozen=True)
class RelationSpec:
    """One extracted relation: its defining edge type(s) and order."""

    name: str
    order: str  # "first" | "second"
    edge_types: tuple[str, ...]  # direct edge for first order, edge to the shared node for second


# Row order is load-bearing: it fixes the slice index of each relation in the
# stacked "all" tensor and therefore the meaning of each learned weight.
RELATION_SPECS = (
    RelationSpec("supplies-from", "first", ("supplier",)),
    RelationSpec("customer-of", "first", ("customer",)),
    RelationSpec("partner-with", "first", ("partner-with", "partner")),
    RelationSpec("shares-owned-by", "first", ("shareholder",)),
    RelationSpec("common-industry", "second", ("in-industry",)),
    RelationSpec("common-customer", "second", ("customer",)),
    RelationSpec("common-supplier", "second", ("supplier",)),
)
RELATION_NAMES = tuple(spec.name for spec in RELATION_SPECS)
FIRST_ORDER_SPECS = tuple(s for s in RELATION_SPECS if s.order == "first")
SECOND_ORDER_SPECS = tuple(s for s in RELATION_SPECS if s.order == "second")


@dataclass(frozen=True)
class RelationTensor:
    """Binary, symmetric N x N x K adjacency with unit diagonal per slice."""

    tickers: tuple[str, ...]
    relations: tuple[str, ...]
    adjacency: np.ndarray  # (N, N, K) float64 in {0, 1}
    degrees: np.ndarray  # (N,) int64: connected counterparts incl. self, any slice
    mask: np.ndarray  # (N, N) bool: any slice nonzero

    def __post_init__(self):
        n = len(self.tickers)
        k = len(self.relations)
        adj = np.asarray(self.adjacency, dtype=np.float64)
        object.__setattr__(self, "adjacency", adj)
        if adj.shape != (n, n, k):
            raise ConfigurationError(f"adjacency shape {adj.shape} != {(n, n, k)}")
        if not np.isin(adj, (0.0, 1.0)).all():
            raise ConfigurationError("adjacency values must be 0 or 1")
        for slice_k in range(k):
            a = adj[:, :, slice_k]
            if not np.array_equal(a, a.T):
                raise ConfigurationError(f"relation slice {slice_k} not symmetric")
            if not (np.diagonal(a) == 1.0).all():
                raise ConfigurationError(f"relation slice {slice_k} diagonal not all ones")

    @property
    def n_stocks(self) -> int:
        return len(self.tickers)

    @property
    def n_relations(self) -> int:
        return len(self.relations)


_NODE_KEYS = {"kind", "id", "node_type", "in_nikkei"}
_EDGE_KEYS = {"kind", "src", "dst", "edge_type"}


def load_graph(path) -> KnowledgeGraph:
    """Parse and validate the JSON-lines graph file (pre entity resolution)."""
    nodes: dict[str, Node] = {}
    edges: set[Edge] = set()
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            raw = raw.strip()
            if not raw:
                continue
            try:
                rec = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad JSON: {exc.msg}", line=lineno) from None
            if not isinstance(rec, dict):
                raise ParseError("record is not an object", line=lineno)
            kind = rec.get("kind")
            if kind == "node":
                if set(rec) != _NODE_KEYS:
                    raise SchemaError(
                        f"line {lineno}: node keys {sorted(rec)} != {sorted(_NODE_KEYS)}"
                    )
                node_id, node_type, in_nikkei = rec["id"], rec["node_type"], rec["in_nikkei"]
                if not isinstance(node_id, str) or not node_id:
                    raise SchemaError(f"line {lineno}: node id must be a non-empty string")
                if node_type not in NODE_TYPES:
                    raise SchemaError(f"line {lineno}: unknown node_type {node_type!r}")
                if not isinstance(in_nikkei, bool):
                    raise SchemaError(f"line {lineno}: in_nikkei must be a boolean")
                if in_nikkei and node_type != "company":
                    raise SchemaError(f"line {lineno}: in_nikkei set on non-company {node_id!r}")
                if node_id in nodes:
                    raise IntegrityError(f"line {lineno}: duplicate node id {node_id!r}")
                nodes[node_id] = Node(node_id, node_type, in_nikkei)
            elif kind == "edge":
                if set(rec) != _EDGE_KEYS:
                    raise SchemaError(
                        f"line {lineno}: edge keys {sorted(rec)} != {sorted(_EDGE_KEYS)}"
                    )
                src, dst, edge_type = rec["src"], rec["dst"], rec["edge_type"]
                if not isinstance(src, str) or not isinstance(dst, str):
                    raise SchemaError(f"line {lineno}: edge endpoints must be strings")
                if edge_type not in EDGE_TYPES:
                    raise SchemaError(f"line {lineno}: unknown edge_type {edge_type!r}")
                edges.add(Edge(src, dst, edge_type))
            else:
                raise SchemaError(f"line {lineno}: unknown kind {kind!r}")

    for e in edges:
        for endpoint in (e.src, e.dst):
            if endpoint not in nodes:
                raise IntegrityError(f"edge {e.src!r}->{e.dst!r} references missing node {endpoint!r}")
    return KnowledgeGraph(nodes=nodes, edges=frozenset(edges))


def resolve_entities(g: KnowledgeGraph) -> KnowledgeGraph:
    """Merge same-company components into single nodes.

    The canonical id is the lexicographically smallest member, so the result
    is independent of edge input order. Incident edges are redirected; merged
    self-loops, duplicates and all same-company edges are dropped.
    """
    parent: dict[str, str] = {nid: nid for nid in g.nodes}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(a: str, b: str) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            # Lexicographic root keeps canonical ids input-order-free.
            lo, hi = (ra, rb) if ra < rb else (rb, ra)
            parent[hi] = lo

    for e in g.edges:
        if e.edge_type == "same-company":
            a, b = g.nodes[e.src], g.nodes[e.dst]
            if a.node_type != b.node_type:
                raise ResolutionConflictError(
                    f"same-company edge joins {a.id!r} ({a.node_type}) "
                    f"and {b.id!r} ({b.node_type})"
                )
            union(e.src, e.dst)

    canon = {nid: find(nid) for nid in g.nodes}
    merged: dict[str, Node] = {}
    for nid, node in g.nodes.items():
        root = canon[nid]
        prev = merged.get(root)
        if prev is None:
            merged[root] = Node(root, node.node_type, node.in_nikkei)
        else:
            merged[root] = Node(root, prev.node_type, prev.in_nikkei or node.in_nikkei)

    new_edges: set[Edge] = set()
    for e in g.edges:
        if e.edge_type == "same-company":
            continue
        src, dst = canon[e.src], canon[e.dst]
        if src == dst:
            continue
        new_edges.add(Edge(src, dst, e.edge_type))
    return KnowledgeGraph(nodes=merged, edges=frozenset(new_edges))


def _check_universe(g: KnowledgeGraph, universe) -> None:
    companies = set(g.company_universe)
    for ticker in universe:
        if ticker not in g.nodes:
            raise UnknownTickerError(f"ticker {ticker!r} absent from graph")
        if ticker not in companies:
            raise UnknownTickerError(f"ticker {ticker!r} is not an in-market company node")


def extract_first_order(g: KnowledgeGraph, universe) -> dict[str, set[tuple[str, str]]]:
    """Unordered in-universe pairs directly joined by each first-order edge type."""
    _check_universe(g, universe)
    members = set(universe)
    out: dict[str, set[tuple[str, str]]] = {spec.name: set() for spec in FIRST_ORDER_SPECS}
    for e in g.edges:
        if e.src not in members or e.dst not in members or e.src == e.dst:
            continue
        pair = (e.src, e.dst) if e.src < e.dst else (e.dst, e.src)
        for spec in FIRST_ORDER_SPECS:
            if e.edge_type in spec.edge_types:
                out[spec.name].add(pair)
    return out


def extract_second_order(g: KnowledgeGraph, universe) -> dict[str, set[tuple[str, str]]]:
    """In-universe pairs sharing an intermediate node via each second-order edge type.

    The intermediate may be any node in the graph (for common-industry it
    must be an industry node); a pair appears at most once per relation no
    matter how many intermediates it shares.
    """
    _check_universe(g, universe)
    members = set(universe)
    out: dict[str, set[tuple[str, str]]] = {}
    for spec in SECOND_ORDER_SPECS:
        neighbors: dict[str, set[str]] = {ticker: set() for ticker in universe}
        for e in g.edges:
            if e.edge_type not in spec.edge_types:
                continue
            for company, other in ((e.src, e.dst), (e.dst, e.src)):
                if company not in members:
                    continue
                if spec.name == "common-industry" and g.nodes[other].node_type != "industry":
                    continue
                neighbors[company].add(other)
        by_intermediate: dict[str, set[str]] = {}
        for company, mids in neighbors.items():
            for mid in mids:
                by_intermediate.setdefault(mid, set()).add(company)
        pairs: set[tuple[str, str]] = set()
        for companies in by_intermediate.values():
            group = sorted(companies)
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    pairs.add((group[i], group[j]))
        out[spec.name] = pairs
    return out


def build_relation_tensor(
    first: dict[str, set[tuple[str, str]]],
    second: dict[str, set[tuple[str, str]]],
    universe,
    selection: str,
) -> RelationTensor:
    """Stack edge sets into the adjacency tensor for one relation or "all"."""
    edge_sets = {**first, **second}
    if selection == "all":
        names = RELATION_NAMES
    elif selection in RELATION_NAMES:
        names = (selection,)
    else:
        raise ConfigurationError(
            f"unknown relation selection {selection!r}; expected one of {RELATION_NAMES + ('all',)}"
        )
    tickers = tuple(universe)
    index = {t: i for i, t in enumerate(tickers)}
    n, k = len(tickers), len(names)
    adjacency = np.zeros((n, n, k), dtype=np.float64)
    for slice_k, name in enumerate(names):
        for a, b in edge_sets.get(name, ()):
            ia, ib = index.get(a), index.get(b)
            if ia is None or ib is None:
                continue
            adjacency[ia, ib, slice_k] = 1.0
            adjacency[ib, ia, slice_k] = 1.0
        adjacency[:, :, slice_k][np.diag_indices(n)] = 1.0
    mask = adjacency.any(axis=2)
    degrees = mask.sum(axis=0).astype(np.int64)
    return RelationTensor(
        tickers=tickers, relations=names, adjacency=adjacency, degrees=degrees, mask=mask
    )


def identity_tensor(tickers) -> RelationTensor:
    """Self-loop-only tensor (K=1); the graph layer reduces to a pass-through."""
    tickers = tuple(tickers)
    n = len(tickers)
    adjacency = np.eye(n, dtype=np.float64)[:, :, None]
    return RelationTensor(
        tickers=tickers,
        relations=("self",),
        adjacency=adjacency,
        degrees=np.ones(n, dtype=np.int64),
        mask=np.eye(n, dtype=bool),
    )


@dataclass(frozen=True)
class GraphSummary:
    node_count: int
    edge_count: int
    avg_degree: float


def graph_summary(g: KnowledgeGraph) -> GraphSummary:
    """Node/edge counts and average degree (2E/V) of a graph."""
    if not g.nodes:
        raise EmptyGraphError("graph has no nodes")
    v, e = len(g.nodes), len(g.edges)
    return GraphSummary(node_count=v, edge_count=e, avg_degree=2.0 * e / v)
