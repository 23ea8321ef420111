"""Undirected simple graphs, perfect domination, and instance generators.

Vertices are dense integer ids ``0..n-1``. Graphs are immutable after
construction; every operation here is a pure function, safe to call from
many threads at once.

A broadcast set ``S`` perfectly dominates a vertex ``v`` when ``v`` is not
in ``S`` and exactly one neighbor of ``v`` is.  ``perfectly_dominated``
returns that set of receivers, and ``reception_value`` its size: the number
of simultaneous successful receptions the broadcast set achieves in one
round of the collision radio model.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import GraphFormatError

VertexSet = frozenset  # subset of [0, n); dual role: broadcasters / receivers


class Graph:
    """Immutable undirected simple graph on vertices ``0..n-1``.

    Construction rejects self-loops and duplicate edges outright rather
    than deduplicating, so that generated instances are bit-exact
    reproducible.
    """

    __slots__ = ("n", "neighbors", "adjacency_masks", "edges")

    def __init__(self, n: int, edges: Iterable[tuple[int, int]]):
        if n < 0:
            raise ValueError("vertex count must be nonnegative")
        neighbor_sets: list[set[int]] = [set() for _ in range(n)]
        seen: set[tuple[int, int]] = set()
        normalized: list[tuple[int, int]] = []
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) has a vertex id outside [0, {n})")
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise ValueError(f"duplicate edge ({key[0]}, {key[1]})")
            seen.add(key)
            normalized.append(key)
            neighbor_sets[u].add(v)
            neighbor_sets[v].add(u)
        self.n = n
        self.neighbors = tuple(frozenset(s) for s in neighbor_sets)
        masks = [0] * n
        for u, v in normalized:
            masks[u] |= 1 << v
            masks[v] |= 1 << u
        self.adjacency_masks = tuple(masks)
        self.edges = tuple(sorted(normalized))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(len(s) for s in self.neighbors)

    def adjacency_matrix(self, dtype=np.float32) -> np.ndarray:
        """Dense symmetric 0/1 matrix; float32 keeps small counts exact in BLAS."""
        m = np.zeros((self.n, self.n), dtype=dtype)
        for u, v in self.edges:
            m[u, v] = 1
            m[v, u] = 1
        return m

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.edge_count})"


def check_vertex_set(g: Graph, s: Iterable[int]) -> frozenset[int]:
    """Validate ``s`` as a subset of the graph's vertices and freeze it."""
    out = frozenset(s)
    for v in out:
        if not isinstance(v, (int, np.integer)) or not 0 <= v < g.n:
            raise ValueError(f"vertex id {v!r} outside [0, {g.n})")
    return frozenset(int(v) for v in out)


def perfectly_dominated(g: Graph, s: Iterable[int]) -> frozenset[int]:
    """Vertices outside ``s`` with exactly one neighbor in ``s``.

    These are the receivers that successfully decode a message when the
    vertices of ``s`` all broadcast simultaneously.
    """
    broadcast = check_vertex_set(g, s)
    return frozenset(
        v
        for v in range(g.n)
        if v not in broadcast and len(g.neighbors[v] & broadcast) == 1
    )


def reception_value(g: Graph, s: Iterable[int]) -> int:
    """Number of successful receptions when ``s`` broadcasts: ``|D(s)|``."""
    return len(perfectly_dominated(g, s))


def reception_value_of_mask(g: Graph, mask: int) -> int:
    """Fast bitmask variant: bit ``i`` of ``mask`` marks vertex ``i`` as a broadcaster."""
    if mask < 0 or mask >> g.n:
        raise ValueError("mask has bits outside [0, n)")
    count = 0
    adj = g.adjacency_masks
    for v in range(g.n):
        if not (mask >> v) & 1 and (adj[v] & mask).bit_count() == 1:
            count += 1
    return count


def set_to_mask(s: Iterable[int]) -> int:
    mask = 0
    for v in s:
        mask |= 1 << v
    return mask


def mask_to_set(mask: int) -> frozenset[int]:
    out = []
    v = 0
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return frozenset(out)


# ---------------------------------------------------------------------------
# Generators

GENERATOR_KINDS = ("star", "path", "cycle", "complete", "gnp", "bridged-stars")


def generate(
    kind: str,
    *,
    n: int | None = None,
    p: float | None = None,
    seed: int | None = None,
    leaf_count: int | None = None,
) -> Graph:
    """Build a named instance deterministically.

    ``star``/``path``/``cycle``/``complete`` take ``n``; ``gnp`` takes
    ``n``, ``p`` and a mandatory ``seed``; ``bridged-stars`` takes
    ``leaf_count`` (see :func:`rxcap.game.bridged_stars_gadget`).
    Fixed arguments always produce the identical graph.
    """
    if kind == "bridged-stars":
        from . import game  # deferred: game builds on this module

        g, _ = game.bridged_stars_gadget(10 if leaf_count is None else leaf_count)
        return g
    if n is None:
        raise ValueError(f"generator {kind!r} requires n")
    if n < 1:
        raise ValueError("n must be at least 1")
    if kind == "star":
        return Graph(n, [(0, v) for v in range(1, n)])
    if kind == "path":
        return Graph(n, [(v, v + 1) for v in range(n - 1)])
    if kind == "cycle":
        if n < 3:
            raise ValueError("cycle requires n >= 3")
        return Graph(n, [(v, (v + 1) % n) for v in range(n)])
    if kind == "complete":
        return Graph(n, [(u, v) for u in range(n) for v in range(u + 1, n)])
    if kind == "gnp":
        if p is None or not 0.0 <= p <= 1.0:
            raise ValueError("gnp requires p in [0, 1]")
        if seed is None:
            raise ValueError("gnp requires a seed")
        return gnp(n, p, seed)
    raise ValueError(f"unknown generator kind {kind!r}")


def gnp(n: int, p: float, seed: int) -> Graph:
    """G(n, p) with independent edges.

    The PRNG is numpy's PCG64 seeded with ``seed``; candidate pairs are
    scanned in row-major order (0,1), (0,2), ..., (n-2,n-1), so the seed
    fully determines the output across runs and machines.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
    draws = rng.random(len(pairs))
    return Graph(n, [pair for pair, x in zip(pairs, draws) if x < p])


# ---------------------------------------------------------------------------
# Text format: first line "n m", then m lines "u v" with 0 <= u < v < n.

def parse_graph(text: str) -> Graph:
    """Parse the plain edge-list format; errors carry 1-based line numbers."""
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise GraphFormatError(1, "missing header 'n m'")
    header = lines[0].split()
    if len(header) != 2:
        raise GraphFormatError(1, f"expected 'n m', got {lines[0].strip()!r}")
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise GraphFormatError(1, f"header fields must be integers, got {lines[0].strip()!r}") from None
    if n < 0 or m < 0:
        raise GraphFormatError(1, "n and m must be nonnegative")
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    lineno = 1
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split()
        if len(parts) != 2:
            raise GraphFormatError(lineno, f"expected 'u v', got {raw.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphFormatError(lineno, f"vertex ids must be integers, got {raw.strip()!r}") from None
        if not 0 <= u < v < n:
            raise GraphFormatError(lineno, f"edge ({u}, {v}) violates 0 <= u < v < n = {n}")
        if (u, v) in seen:
            raise GraphFormatError(lineno, f"duplicate edge ({u}, {v})")
        seen.add((u, v))
        edges.append((u, v))
    if len(edges) != m:
        raise GraphFormatError(lineno, f"header promised {m} edges, found {len(edges)}")
    return Graph(n, edges)


def format_graph(g: Graph) -> str:
    """Inverse of :func:`parse_graph`; edges emitted in sorted order, LF endings."""
    out = [f"{g.n} {g.edge_count}"]
    out.extend(f"{u} {v}" for u, v in g.edges)
    return "\n".join(out) + "\n"


def load_graph(path) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def save_graph(g: Graph, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_graph(g))


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        return True
    seen = {0}
    stack = [0]
    while stack:
        u = stack.pop()
        for v in g.neighbors[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == g.n


def isolated_vertices(g: Graph) -> tuple[int, ...]:
    return tuple(v for v in range(g.n) if not g.neighbors[v])
