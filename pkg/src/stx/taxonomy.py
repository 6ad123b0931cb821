"""Browse-node hierarchy loading and root-category resolution.

Nodes may have several parents. When a walk reaches such a node, one parent
is picked by a draw keyed on ``(seed, node)``, so a node always resolves the
same way for a given seed no matter which lookup reaches it first.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

from ._seeding import derive_seed
from .errors import CycleError, MalformedTaxonomy, StxError, UnknownNode

logger = logging.getLogger(__name__)

__all__ = [
    "TaxonomyGraph",
    "ResolutionReport",
    "load_taxonomy",
    "parse_taxonomy",
    "resolve_root",
    "resolve_all",
]


@dataclass(frozen=True)
class TaxonomyGraph:
    parents: dict
    names: dict = field(default_factory=dict)
    duplicates: int = 0
    placeholders: tuple = ()

    def __post_init__(self):
        for node, plist in self.parents.items():
            for p in plist:
                if p not in self.parents:
                    raise MalformedTaxonomy(f"parent {p!r} of {node!r} is not declared")

    @property
    def roots(self) -> frozenset:
        return frozenset(n for n, p in self.parents.items() if not p)

    def __contains__(self, node) -> bool:
        return node in self.parents

    def __len__(self):
        return len(self.parents)

    def name(self, node) -> str:
        return self.names.get(node, node)


def parse_taxonomy(lines) -> TaxonomyGraph:
    """Build a graph from an iterable of JSON-Lines strings or dicts."""
    parents, names = {}, {}
    duplicates = 0
    for raw in lines:
        if isinstance(raw, str):
            if not raw.strip():
                continue
            try:
                obj = json.loads(raw)
            except json.JSONDecodeError as exc:
                raise MalformedTaxonomy(f"bad taxonomy line: {exc}") from None
        else:
            obj = raw
        node = obj.get("node_id")
        if not isinstance(node, str) or not node:
            raise MalformedTaxonomy(f"taxonomy line without node_id: {obj!r}")
        if node in parents:
            duplicates += 1
        plist = obj.get("parent_ids") or []
        parents[node] = list(dict.fromkeys(str(p) for p in plist))
        if "name" in obj:
            names[node] = obj["name"]
    if duplicates:
        logger.warning("taxonomy: %d duplicate node_id lines, last one kept", duplicates)
    missing = sorted({p for plist in parents.values() for p in plist} - parents.keys())
    if missing:
        logger.warning("taxonomy: %d undeclared parents materialized as roots", len(missing))
    for p in missing:
        parents[p] = []
    if not any(not p for p in parents.values()):
        raise MalformedTaxonomy("taxonomy has no root nodes")
    return TaxonomyGraph(parents, names, duplicates, tuple(missing))


def load_taxonomy(path) -> TaxonomyGraph:
    with open(path, encoding="utf-8") as fh:
        return parse_taxonomy(fh)


def _choose_parent(graph: TaxonomyGraph, node, seed: int):
    plist = graph.parents[node]
    if len(plist) == 1:
        return plist[0]
    return plist[derive_seed("parent", seed, node) % len(plist)]


def _walk(graph: TaxonomyGraph, node, seed: int, memo: dict | None = None):
    if node not in graph.parents:
        raise UnknownNode(node)
    path, on_path = [], {}
    cur = node
    while True:
        if memo is not None and cur in memo:
            root = memo[cur]
            break
        if cur in on_path:
            raise CycleError(path[on_path[cur]:] + [cur])
        if not graph.parents[cur]:
            root = cur
            break
        on_path[cur] = len(path)
        path.append(cur)
        cur = _choose_parent(graph, cur, seed)
    if memo is not None:
        for n in path:
            memo[n] = root
        memo[root] = root
    return root


def resolve_root(graph: TaxonomyGraph, node, seed: int = 0):
    """Walk parent links from ``node`` to a root.

    Raises
    ------
    UnknownNode
        ``node`` is not in the graph.
    CycleError
        The walk revisits a node; ``exc.cycle`` lists the loop.
    """
    return _walk(graph, node, seed)


@dataclass
class ResolutionReport:
    resolved: dict
    errors: list

    def to_json(self) -> dict:
        return {"resolved": dict(self.resolved), "errors": list(self.errors)}


def resolve_all(graph: TaxonomyGraph, nodes, seed: int = 0) -> ResolutionReport:
    """Resolve many nodes with memoization; failures are collected, not raised."""
    memo = {}
    resolved, errors, failed = {}, [], set()
    for node in nodes:
        if node in resolved or node in failed:
            continue
        try:
            resolved[node] = _walk(graph, node, seed, memo)
        except StxError as exc:
            failed.add(node)
            entry = {"node": node, "error": type(exc).__name__, "message": str(exc)}
            if isinstance(exc, CycleError):
                entry["cycle"] = exc.cycle
            errors.append(entry)
    return ResolutionReport(resolved, errors)
