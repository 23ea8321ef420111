"""Unique coverage instances and their reduction to perfect domination.

A unique-coverage instance is a universe of ``m`` elements plus an ordered
collection of element subsets; choosing a subcollection scores one point
per element contained in exactly one chosen set.

:func:`reduce_instance` rebuilds such an instance as a graph: one vertex
per set (block A), ``k`` disjoint copies of the element vertices wired to
the sets containing them, and an apex vertex adjacent to all of A.  For
every chosen subcollection the lifted broadcast set (chosen set-vertices
plus the apex) perfectly dominates exactly

    k * unique_coverage(chosen) + (#sets - #chosen)

vertices: each element copy succeeds iff the element is uniquely covered,
and each unchosen set-vertex hears only the apex.  The identity makes the
construction's value transfer testable exactly, instance by instance.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

from .errors import ExhaustiveLimitError, UcpFormatError
from .graph import Graph

DEFAULT_UCP_EXHAUSTIVE_LIMIT = 22


@dataclass(frozen=True)
class UCPInstance:
    """Universe ``0..universe_size-1`` plus an ordered list of subsets.

    Sets may repeat and may be empty; every element id must be in range.
    """

    universe_size: int
    sets: tuple[frozenset[int], ...]

    def __post_init__(self):
        if self.universe_size < 0:
            raise ValueError("universe size must be nonnegative")
        for i, s in enumerate(self.sets):
            for e in s:
                if not 0 <= e < self.universe_size:
                    raise ValueError(
                        f"set {i} contains element {e} outside [0, {self.universe_size})"
                    )

    @property
    def set_count(self) -> int:
        return len(self.sets)


def make_instance(universe_size: int, sets: Iterable[Iterable[int]]) -> UCPInstance:
    return UCPInstance(universe_size, tuple(frozenset(s) for s in sets))


def _check_chosen(inst: UCPInstance, chosen: Iterable[int]) -> frozenset[int]:
    out = frozenset(int(i) for i in chosen)
    for i in out:
        if not 0 <= i < inst.set_count:
            raise ValueError(f"set index {i} outside [0, {inst.set_count})")
    return out


def unique_coverage(inst: UCPInstance, chosen: Iterable[int]) -> int:
    """Number of elements contained in exactly one chosen set."""
    picked = _check_chosen(inst, chosen)
    once: set[int] = set()
    more: set[int] = set()
    for i in picked:
        for e in inst.sets[i]:
            if e in once:
                more.add(e)
            else:
                once.add(e)
    return len(once - more)


def exact_ucp(
    inst: UCPInstance, *, max_exhaustive: int = DEFAULT_UCP_EXHAUSTIVE_LIMIT
) -> tuple[int, frozenset[int]]:
    """Maximum unique coverage over all subcollections, with the smallest-bitmask witness."""
    s = inst.set_count
    if s > max_exhaustive:
        raise ExhaustiveLimitError(
            f"exact search over 2^{s} subcollections exceeds the limit of {max_exhaustive} sets; "
            f"pass a larger max_exhaustive to force it"
        )
    element_masks = [0] * s
    for i, members in enumerate(inst.sets):
        for e in members:
            element_masks[i] |= 1 << e
    best_value, best_mask = -1, 0
    for mask in range(1 << s):
        once = 0
        more = 0
        rest = mask
        while rest:
            i = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            em = element_masks[i]
            more |= once & em
            once |= em
        value = (once & ~more).bit_count()
        if value > best_value:
            best_value, best_mask = value, mask
    witness = frozenset(i for i in range(s) if (best_mask >> i) & 1)
    return best_value, witness


@dataclass(frozen=True)
class ReductionOutput:
    """Graph encoding of a unique-coverage instance.

    Vertex numbering: set-vertices ``a_vertices`` first (in set order), then
    the ``k`` element copies (element order within each copy), then the apex
    ``v_vertex`` last.  ``b_copies[t][j]`` is the vertex of element ``j`` in
    copy ``t``.
    """

    graph: Graph
    k: int
    a_vertices: tuple[int, ...]
    b_copies: tuple[tuple[int, ...], ...]
    v_vertex: int

    def sidecar_dict(self) -> dict:
        return {
            "k": self.k,
            "a": list(self.a_vertices),
            "b": [list(copy) for copy in self.b_copies],
            "v": self.v_vertex,
        }


def reduce_instance(inst: UCPInstance, k: int | None = None) -> ReductionOutput:
    """Build the k-copy reduction graph (``k`` defaults to the set count).

    Elements covered by no set still receive their ``k`` vertex copies;
    they are isolated and inert under domination.
    """
    m, s = inst.universe_size, inst.set_count
    if m < 1 or s < 1:
        raise ValueError("reduction requires at least one element and one set")
    if k is None:
        k = s
    if k < 1:
        raise ValueError("k must be at least 1")
    a_vertices = tuple(range(s))
    b_copies = tuple(tuple(s + t * m + j for j in range(m)) for t in range(k))
    v_vertex = s + k * m
    edges: list[tuple[int, int]] = []
    for i in range(s):
        for t in range(k):
            for e in sorted(inst.sets[i]):
                edges.append((a_vertices[i], b_copies[t][e]))
    for i in range(s):
        edges.append((a_vertices[i], v_vertex))
    graph = Graph(v_vertex + 1, edges)
    return ReductionOutput(graph, k, a_vertices, b_copies, v_vertex)


def lift_solution(
    inst: UCPInstance, out: ReductionOutput, chosen: Iterable[int]
) -> tuple[frozenset[int], int]:
    """Map a chosen subcollection to its broadcast set on the reduction graph.

    Returns the broadcast set (chosen set-vertices plus the apex) and the
    closed-form value it achieves:
    ``k * unique_coverage(chosen) + (set_count - len(chosen))``.
    """
    picked = _check_chosen(inst, chosen)
    broadcast = frozenset(out.a_vertices[i] for i in picked) | {out.v_vertex}
    predicted = out.k * unique_coverage(inst, picked) + (inst.set_count - len(picked))
    return broadcast, predicted


# ---------------------------------------------------------------------------
# Text format: first line "m s"; then s lines of space-separated element ids
# (a blank line is an empty set).

def parse_ucp(text: str) -> UCPInstance:
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise UcpFormatError(1, "missing header 'm s'")
    header = lines[0].split()
    if len(header) != 2:
        raise UcpFormatError(1, f"expected 'm s', got {lines[0].strip()!r}")
    try:
        m, s = int(header[0]), int(header[1])
    except ValueError:
        raise UcpFormatError(1, f"header fields must be integers, got {lines[0].strip()!r}") from None
    if m < 0 or s < 0:
        raise UcpFormatError(1, "m and s must be nonnegative")
    if len(lines) < 1 + s:
        raise UcpFormatError(len(lines), f"header promised {s} set lines, found {len(lines) - 1}")
    sets: list[frozenset[int]] = []
    for lineno in range(2, 2 + s):
        raw = lines[lineno - 1]
        members: set[int] = set()
        for token in raw.split():
            try:
                e = int(token)
            except ValueError:
                raise UcpFormatError(lineno, f"element ids must be integers, got {token!r}") from None
            if not 0 <= e < m:
                raise UcpFormatError(lineno, f"element {e} outside [0, {m})")
            members.add(e)
        sets.append(frozenset(members))
    for lineno in range(2 + s, len(lines) + 1):
        if lines[lineno - 1].strip():
            raise UcpFormatError(lineno, "trailing content after the promised set lines")
    return UCPInstance(m, tuple(sets))


def format_ucp(inst: UCPInstance) -> str:
    out = [f"{inst.universe_size} {inst.set_count}"]
    out.extend(" ".join(str(e) for e in sorted(s)) for s in inst.sets)
    return "\n".join(out) + "\n"


def load_ucp(path) -> UCPInstance:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_ucp(fh.read())
