"""Instance parsing: undirected edge lists, G-Set, SNAP arc lists, TTP files.

All node ids are 0-based in memory.  Files are 1-based unless a parser says
otherwise.  Lines starting with ``#`` or ``%`` are comments everywhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

COMMENT_PREFIXES = ("#", "%")


class ParseError(ValueError):
    """Base class for instance parse failures; ``line`` is 1-based or None."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(where + message)


class MalformedLineError(ParseError):
    pass


class NodeRangeError(ParseError):
    pass


class DuplicateEdgeError(ParseError):
    pass


class SelfLoopError(ParseError):
    pass


class CountMismatchError(ParseError):
    pass


class InvalidWeightError(ParseError):
    pass


class MissingSectionError(ParseError):
    pass


class ProbabilityClampWarning(UserWarning):
    pass


def _ro(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


def _csr(n, src, dst):
    order = np.lexsort((dst, src))
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    return np.cumsum(indptr), order


@dataclass(frozen=True, eq=False)
class UndirectedGraph:
    """Undirected weighted graph, edges stored once with ``u < v``."""

    node_count: int
    edges: np.ndarray  # (m, 2) int64
    weights: np.ndarray  # (m,) float64
    degree: np.ndarray = field(init=False)
    indptr: np.ndarray = field(init=False)
    indices: np.ndarray = field(init=False)

    def __post_init__(self):
        edges = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        weights = np.asarray(self.weights, dtype=np.float64).reshape(-1)
        if len(edges) != len(weights):
            raise ValueError("edges and weights differ in length")
        n = self.node_count
        if n < 1:
            raise ValueError("node_count must be positive")
        if len(edges):
            if edges.min() < 0 or edges.max() >= n:
                raise ValueError("edge endpoint out of range")
            if np.any(edges[:, 0] == edges[:, 1]):
                raise ValueError("self-loop")
        lo = np.minimum(edges[:, 0], edges[:, 1])
        hi = np.maximum(edges[:, 0], edges[:, 1])
        order = np.lexsort((hi, lo))
        edges = np.stack([lo[order], hi[order]], axis=1)
        weights = weights[order]
        if len(edges) > 1 and np.any(np.all(edges[1:] == edges[:-1], axis=1)):
            raise ValueError("duplicate edge")
        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        indptr, perm = _csr(n, src, dst)
        object.__setattr__(self, "edges", _ro(edges))
        object.__setattr__(self, "weights", _ro(weights))
        object.__setattr__(self, "degree", _ro(np.diff(indptr)))
        object.__setattr__(self, "indptr", _ro(indptr))
        object.__setattr__(self, "indices", _ro(dst[perm]))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def same_structure(self, other: UndirectedGraph) -> bool:
        return (
            self.node_count == other.node_count
            and np.array_equal(self.edges, other.edges)
            and np.array_equal(self.weights, other.weights)
        )


@dataclass(frozen=True, eq=False)
class DirectedGraph:
    """Directed graph with independent-cascade arc probabilities.

    ``edge_prob[a] = weight[a] / in_degree[dst[a]]``, clamped to 1.0; the
    indices of clamped arcs are kept in ``clamped_arcs``.  Arcs are sorted
    by (src, dst), so ``indptr`` indexes them directly.
    """

    node_count: int
    src: np.ndarray
    dst: np.ndarray
    weight: np.ndarray
    in_degree: np.ndarray = field(init=False)
    out_degree: np.ndarray = field(init=False)
    indptr: np.ndarray = field(init=False)
    edge_prob: np.ndarray = field(init=False)
    clamped_arcs: np.ndarray = field(init=False)

    def __post_init__(self):
        n = self.node_count
        src = np.asarray(self.src, dtype=np.int64).reshape(-1)
        dst = np.asarray(self.dst, dtype=np.int64).reshape(-1)
        w = np.asarray(self.weight, dtype=np.float64).reshape(-1)
        if not (len(src) == len(dst) == len(w)):
            raise ValueError("arc arrays differ in length")
        if n < 1:
            raise ValueError("node_count must be positive")
        if len(src):
            if min(src.min(), dst.min()) < 0 or max(src.max(), dst.max()) >= n:
                raise ValueError("arc endpoint out of range")
            if np.any(src == dst):
                raise ValueError("self-loop")
            if np.any(w <= 0):
                raise ValueError("arc weights must be positive")
        indptr, order = _csr(n, src, dst)
        src, dst, w = src[order], dst[order], w[order]
        if len(src) > 1 and np.any((src[1:] == src[:-1]) & (dst[1:] == dst[:-1])):
            raise ValueError("duplicate arc")
        in_degree = np.bincount(dst, minlength=n).astype(np.int64)
        prob = w / np.maximum(in_degree[dst], 1)
        clamped = np.flatnonzero(prob > 1.0)
        if len(clamped):
            warnings.warn(
                f"{len(clamped)} arc probabilities exceeded 1 and were clamped",
                ProbabilityClampWarning,
                stacklevel=3,
            )
            prob = np.minimum(prob, 1.0)
        object.__setattr__(self, "src", _ro(src))
        object.__setattr__(self, "dst", _ro(dst))
        object.__setattr__(self, "weight", _ro(w))
        object.__setattr__(self, "in_degree", _ro(in_degree))
        object.__setattr__(self, "out_degree", _ro(np.diff(indptr)))
        object.__setattr__(self, "indptr", _ro(indptr))
        object.__setattr__(self, "edge_prob", _ro(prob))
        object.__setattr__(self, "clamped_arcs", _ro(clamped))

    @property
    def arc_count(self) -> int:
        return len(self.src)

    def same_structure(self, other: DirectedGraph) -> bool:
        return (
            self.node_count == other.node_count
            and np.array_equal(self.src, other.src)
            and np.array_equal(self.dst, other.dst)
            and np.array_equal(self.weight, other.weight)
        )


@dataclass(frozen=True, eq=False)
class TTPInstance:
    """Packing-while-travelling data on the fixed route 1, 2, ..., n, 1.

    Items are ordered by city, then by order of appearance in the file;
    ``city_end[i]`` is the number of items in cities ``0..i``.
    """

    distances: np.ndarray
    item_profit: np.ndarray
    item_weight: np.ndarray
    item_city: np.ndarray
    v_min: float
    v_max: float
    capacity: float
    rent: float
    name: str = ""
    city_end: np.ndarray = field(init=False)

    def __post_init__(self):
        d = np.asarray(self.distances, dtype=np.float64).reshape(-1)
        p = np.asarray(self.item_profit, dtype=np.float64).reshape(-1)
        w = np.asarray(self.item_weight, dtype=np.float64).reshape(-1)
        c = np.asarray(self.item_city, dtype=np.int64).reshape(-1)
        n = len(d)
        if n < 1 or np.any(d <= 0):
            raise ValueError("need at least one leg and positive distances")
        if not (len(p) == len(w) == len(c)) or len(p) == 0:
            raise ValueError("need at least one item with profit, weight and city")
        if np.any(p <= 0) or np.any(w <= 0):
            raise ValueError("item profits and weights must be positive")
        if c.min() < 0 or c.max() >= n:
            raise ValueError("item city out of range")
        if not (0 < self.v_min < self.v_max) or not self.capacity > 0 or self.rent < 0:
            raise ValueError("need 0 < v_min < v_max, capacity > 0, rent >= 0")
        order = np.argsort(c, kind="stable")
        object.__setattr__(self, "distances", _ro(d))
        object.__setattr__(self, "item_profit", _ro(p[order]))
        object.__setattr__(self, "item_weight", _ro(w[order]))
        object.__setattr__(self, "item_city", _ro(c[order]))
        object.__setattr__(self, "city_end", _ro(np.cumsum(np.bincount(c, minlength=n))))

    @property
    def city_count(self) -> int:
        return len(self.distances)

    @property
    def item_count(self) -> int:
        return len(self.item_profit)

    @property
    def nu(self) -> float:
        return (self.v_max - self.v_min) / self.capacity

    @classmethod
    def from_city_items(cls, distances, items_per_city, v_min, v_max, capacity, rent, name=""):
        """Build from ``items_per_city[i] = [(profit, weight), ...]``."""
        profit, weight, city = [], [], []
        for i, items in enumerate(items_per_city):
            for p, w in items:
                profit.append(p)
                weight.append(w)
                city.append(i)
        return cls(distances, profit, weight, city, v_min, v_max, capacity, rent, name)


# --- text helpers ------------------------------------------------------------

def _data_lines(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith(COMMENT_PREFIXES):
            continue
        yield lineno, line


def _ints(parts, lineno, what):
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise MalformedLineError(f"expected integer {what}, got {' '.join(parts)!r}", lineno) from None


def _float(token, lineno):
    try:
        return float(token)
    except ValueError:
        raise MalformedLineError(f"bad weight {token!r}", lineno) from None


def _read_text(source) -> str:
    if isinstance(source, Path):
        return source.read_text()
    return source


def _parse_counted_edges(text: str, weighted: bool, allow_negative: bool) -> UndirectedGraph:
    lines = _data_lines(_read_text(text))
    header = next(lines, None)
    if header is None:
        raise MissingSectionError("missing 'n m' header")
    hline, htext = header
    parts = htext.split()
    dimacs = parts[0] == "p"
    if dimacs:
        parts = parts[2:]
    if len(parts) != 2:
        raise MalformedLineError(f"header must be 'n m', got {htext!r}", hline)
    n, m = _ints(parts, hline, "counts")
    if n < 1 or m < 0:
        raise MalformedLineError("node count must be positive and edge count non-negative", hline)
    edges, weights, seen = [], [], set()
    last_line = hline
    for lineno, line in lines:
        parts = line.split()
        if dimacs:
            if parts[0] == "c":
                continue
            if parts[0] == "e":
                parts = parts[1:]
        if len(parts) not in (2, 3):
            raise MalformedLineError(f"expected 'u v [w]', got {line!r}", lineno)
        u, v = _ints(parts[:2], lineno, "node ids")
        for node in (u, v):
            if not 1 <= node <= n:
                raise NodeRangeError(f"node id {node} out of range 1..{n}", lineno)
        if u == v:
            raise SelfLoopError(f"self-loop at node {u}", lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise DuplicateEdgeError(f"duplicate edge {key[0]} {key[1]}", lineno)
        seen.add(key)
        w = _float(parts[2], lineno) if (weighted and len(parts) == 3) else 1.0
        if not math.isfinite(w) or (w < 0 and not allow_negative):
            raise InvalidWeightError(f"invalid weight {w}", lineno)
        edges.append((key[0] - 1, key[1] - 1))
        weights.append(w)
        last_line = lineno
    if len(edges) != m:
        raise CountMismatchError(f"header declares {m} edges, found {len(edges)}", last_line)
    return UndirectedGraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), np.array(weights))


def parse_edge_list(text: str, weighted: bool = False) -> UndirectedGraph:
    """Parse an ``n m`` header followed by ``u v [w]`` lines (1-based).

    DIMACS-style ``p edge n m`` / ``e u v`` files (as used by the frb
    instances) are accepted too.  Without ``weighted`` every weight is 1.0.
    """
    return _parse_counted_edges(text, weighted, allow_negative=False)


def parse_gset(text: str) -> UndirectedGraph:
    """Parse a G-Set max-cut file.  Negative weights are kept as written."""
    return _parse_counted_edges(text, weighted=True, allow_negative=True)


def parse_snap_weighted(
    text: str,
    one_indexed: bool = False,
    node_count: int | None = None,
    bidirectional: bool = False,
) -> DirectedGraph:
    """Parse SNAP-style ``u v [weight]`` arc lines into a DirectedGraph.

    Missing weights default to 1.  ``bidirectional`` adds the reverse of
    every arc (undirected SNAP networks such as ego-Facebook).
    """
    base = 1 if one_indexed else 0
    src, dst, w = [], [], []
    seen = set()
    for lineno, line in _data_lines(_read_text(text)):
        parts = line.split()
        if len(parts) not in (2, 3):
            raise MalformedLineError(f"expected 'u v [weight]', got {line!r}", lineno)
        u, v = (x - base for x in _ints(parts[:2], lineno, "node ids"))
        if u < 0 or v < 0 or (node_count is not None and max(u, v) >= node_count):
            raise NodeRangeError(f"node id out of range in {line!r}", lineno)
        if u == v:
            raise SelfLoopError(f"self-loop at node {u + base}", lineno)
        weight = _float(parts[2], lineno) if len(parts) == 3 else 1.0
        if not weight > 0 or not math.isfinite(weight):
            raise InvalidWeightError(f"arc weight must be positive, got {weight}", lineno)
        pairs = [(u, v), (v, u)] if bidirectional else [(u, v)]
        for a, b in pairs:
            if (a, b) in seen:
                raise DuplicateEdgeError(f"duplicate arc {a + base} {b + base}", lineno)
            seen.add((a, b))
            src.append(a)
            dst.append(b)
            w.append(weight)
    n = node_count if node_count is not None else (max(max(src), max(dst)) + 1 if src else 1)
    return DirectedGraph(n, src, dst, w)


_TTP_FIELDS = {
    "DIMENSION": "dimension",
    "NUMBER OF ITEMS": "items",
    "CAPACITY OF KNAPSACK": "capacity",
    "MIN SPEED": "v_min",
    "MAX SPEED": "v_max",
    "RENTING RATIO": "rent",
    "EDGE_WEIGHT_TYPE": "edge_weight_type",
    "PROBLEM NAME": "name",
}


def parse_ttp(text: str) -> TTPInstance:
    """Parse a TTP-competition file; the route is the identity permutation.

    ``d_i = ceil(euclid(city i, city i+1))`` and the last leg closes the tour
    back to city 1 (CEIL_2D).
    """
    fields: dict[str, tuple[str, int]] = {}
    coords: dict[int, tuple[float, float]] = {}
    items: list[tuple[float, float, int, int]] = []
    section = None
    for lineno, line in _data_lines(_read_text(text)):
        upper = line.upper()
        if upper.startswith("NODE_COORD_SECTION"):
            section = "coords"
            continue
        if upper.startswith("ITEMS SECTION"):
            section = "items"
            continue
        if ":" in line and not line[0].isdigit():
            key, _, value = line.partition(":")
            key = key.strip().upper()
            if key in _TTP_FIELDS:
                fields[_TTP_FIELDS[key]] = (value.strip(), lineno)
            section = None
            continue
        if upper == "EOF":
            break
        parts = line.split()
        if section == "coords":
            if len(parts) != 3:
                raise MalformedLineError(f"expected 'index x y', got {line!r}", lineno)
            idx = _ints(parts[:1], lineno, "city index")[0]
            coords[idx] = (_float(parts[1], lineno), _float(parts[2], lineno))
        elif section == "items":
            if len(parts) != 4:
                raise MalformedLineError(f"expected 'index profit weight city', got {line!r}", lineno)
            idx = _ints(parts[:1], lineno, "item index")[0]
            city = _ints(parts[3:], lineno, "city")[0]
            items.append((_float(parts[1], lineno), _float(parts[2], lineno), city, lineno))
        else:
            raise MalformedLineError(f"unexpected line {line!r}", lineno)

    for required in ("dimension", "capacity", "v_min", "v_max", "rent"):
        if required not in fields:
            key = next(k for k, v in _TTP_FIELDS.items() if v == required)
            raise MissingSectionError(f"missing '{key}' field")
    ewt = fields.get("edge_weight_type", ("CEIL_2D", None))
    if ewt[0].upper() != "CEIL_2D":
        raise MalformedLineError(f"unsupported EDGE_WEIGHT_TYPE {ewt[0]!r}", ewt[1])

    def num(key, cast=float):
        value, lineno = fields[key]
        try:
            return cast(value)
        except ValueError:
            raise MalformedLineError(f"bad value {value!r}", lineno) from None

    n = num("dimension", int)
    if not coords:
        raise MissingSectionError("missing NODE_COORD_SECTION")
    if sorted(coords) != list(range(1, n + 1)):
        raise CountMismatchError(f"expected coordinates for cities 1..{n}, got {len(coords)}")
    if not items:
        raise MissingSectionError("no items (ITEMS SECTION missing or empty)")
    if "items" in fields and num("items", int) != len(items):
        raise CountMismatchError(f"header declares {num('items', int)} items, found {len(items)}")
    for _, _, city, lineno in items:
        if not 1 <= city <= n:
            raise NodeRangeError(f"item assigned to unknown city {city}", lineno)

    if n < 2:
        raise ParseError("TTP instance needs at least two cities")
    xy = np.array([coords[i] for i in range(1, n + 1)])
    nxt = np.roll(xy, -1, axis=0)
    distances = np.ceil(np.hypot(*(nxt - xy).T))
    return TTPInstance(
        distances,
        [p for p, _, _, _ in items],
        [w for _, w, _, _ in items],
        [c - 1 for _, _, c, _ in items],
        v_min=num("v_min"),
        v_max=num("v_max"),
        capacity=num("capacity"),
        rent=num("rent"),
        name=fields.get("name", ("", None))[0],
    )


# --- writers (round-trip) ----------------------------------------------------

def _num(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def format_edge_list(graph: UndirectedGraph, weighted: bool = True) -> str:
    lines = [f"{graph.node_count} {graph.edge_count}"]
    for (u, v), w in zip(graph.edges, graph.weights):
        lines.append(f"{u + 1} {v + 1} {_num(w)}" if weighted else f"{u + 1} {v + 1}")
    return "\n".join(lines) + "\n"


format_gset = format_edge_list


def format_snap(graph: DirectedGraph, one_indexed: bool = False) -> str:
    base = 1 if one_indexed else 0
    lines = [f"# nodes {graph.node_count} arcs {graph.arc_count}"]
    for u, v, w in zip(graph.src, graph.dst, graph.weight):
        lines.append(f"{u + base} {v + base} {_num(w)}")
    return "\n".join(lines) + "\n"


def load_instance(path, fmt: str, **kwargs):
    """Read ``path`` with the parser named by ``fmt``."""
    parsers = {
        "edge-list": parse_edge_list,
        "gset": parse_gset,
        "snap": parse_snap_weighted,
        "ttp": parse_ttp,
    }
    if fmt not in parsers:
        raise ValueError(f"unknown instance format {fmt!r}; choose from {sorted(parsers)}")
    return parsers[fmt](Path(path).read_text(), **kwargs)


def random_graph(n: int, p: float, rng: np.random.Generator, weights=None) -> UndirectedGraph:
    """G(n, p) graph; ``weights`` is an optional callable ``(rng, m) -> array``."""
    iu, iv = np.triu_indices(n, k=1)
    keep = rng.random(len(iu)) < p
    edges = np.stack([iu[keep], iv[keep]], axis=1)
    w = np.ones(len(edges)) if weights is None else np.asarray(weights(rng, len(edges)), dtype=float)
    return UndirectedGraph(n, edges, w)


def random_digraph(n: int, arcs: int, rng: np.random.Generator, max_weight: int = 1) -> DirectedGraph:
    """Random simple digraph with exactly ``arcs`` arcs and integer weights."""
    pairs = np.array([(u, v) for u in range(n) for v in range(n) if u != v], dtype=np.int64).reshape(-1, 2)
    pick = rng.choice(len(pairs), size=min(arcs, len(pairs)), replace=False)
    w = rng.integers(1, max_weight + 1, size=len(pick))
    return DirectedGraph(n, pairs[pick, 0], pairs[pick, 1], w)
