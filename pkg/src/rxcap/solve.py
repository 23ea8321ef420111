"""Solvers for the maximum perfectly-dominated-set problem.

Four routes to a good broadcast set:

* :func:`exact_opt` — exhaustive search over all ``2^n`` subsets (refused
  above a configurable vertex limit).
* :func:`local_search_maximal` — single-vertex add/remove hill climbing to
  a maximal set.
* :func:`approx_log` — multi-scale product sampling: every vertex joins
  independently with probability ``2^-i`` for each scale ``i`` up to
  ``ceil(log2 n)``, so a receiver of degree ``d`` is perfectly dominated
  with constant probability at the scale nearest ``1/(d+1)``.
* :func:`derandomize` — method of conditional expectations driven by the
  closed-form :func:`expected_value`, turning any product distribution
  into a single set at least as good as its expectation.

Witness sets are tie-broken toward the smallest bitmask (bit ``i`` is
vertex ``i``), so results are stable across runs, thread counts, and
reimplementations.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ExhaustiveLimitError
from .graph import (
    Graph,
    check_vertex_set,
    mask_to_set,
    reception_value,
    reception_value_of_mask,
    set_to_mask,
)

DEFAULT_EXHAUSTIVE_LIMIT = 26


@dataclass(frozen=True)
class SolveResult:
    """A broadcast set with its recomputed value and the route that found it."""

    best_set: frozenset[int]
    best_value: int
    method: str  # "exact" | "local-search" | "sampled" | "derandomized"
    scales_tried: tuple[tuple[float, int], ...] | None = None

    def to_json_dict(self) -> dict:
        out: dict = {
            "method": self.method,
            "value": self.best_value,
            "set": sorted(self.best_set),
        }
        if self.scales_tried is not None:
            out["scales"] = [[p, v] for p, v in self.scales_tried]
        return out


def _batch_values(g: Graph, masks: np.ndarray) -> np.ndarray:
    """Reception value for every subset bitmask in ``masks`` (vectorized)."""
    vals = np.zeros(masks.shape[0], dtype=np.int16)
    dtype = masks.dtype.type
    for v in range(g.n):
        adj = dtype(g.adjacency_masks[v])
        hit = (np.bitwise_count(masks & adj) == 1) & (((masks >> dtype(v)) & dtype(1)) == 0)
        vals += hit
    return vals


def exact_opt(g: Graph, *, max_exhaustive: int = DEFAULT_EXHAUSTIVE_LIMIT, chunk: int = 1 << 20) -> SolveResult:
    """Optimal broadcast set by full enumeration of all ``2^n`` subsets.

    Refuses when ``g.n > max_exhaustive`` (default 26, ~6.7e7 subsets);
    raise the limit explicitly to force larger runs.  The witness is the
    maximizer with the smallest bitmask.
    """
    if g.n > max_exhaustive:
        raise ExhaustiveLimitError(
            f"exact search over 2^{g.n} subsets exceeds the limit of {max_exhaustive} vertices; "
            f"pass a larger max_exhaustive to force it"
        )
    if g.n > 63:
        raise ExhaustiveLimitError("exact search is not supported beyond 63 vertices")
    dtype = np.uint32 if g.n <= 31 else np.uint64
    best_value = -1
    best_mask = 0
    total = 1 << g.n
    for start in range(0, total, chunk):
        stop = min(start + chunk, total)
        masks = np.arange(start, stop, dtype=dtype)
        vals = _batch_values(g, masks)
        top = int(vals.max())
        if top > best_value:
            best_value = top
            best_mask = start + int(np.flatnonzero(vals == top)[0])
    return SolveResult(mask_to_set(best_mask), best_value, "exact")


def local_search_maximal(g: Graph, s0: Iterable[int], seed: int | None = None) -> SolveResult:
    """Hill-climb from ``s0`` by single-vertex flips until no flip improves.

    The terminal set is maximal: adding or deleting any one vertex does not
    increase the reception value.  With ``seed`` given, each scan visits
    vertices in a fresh seeded order; otherwise scans run by ascending id.
    """
    current = set_to_mask(check_vertex_set(g, s0))
    value = reception_value_of_mask(g, current)
    rng = np.random.default_rng(seed) if seed is not None else None
    improved = True
    while improved:
        improved = False
        order = rng.permutation(g.n) if rng is not None else range(g.n)
        for v in order:
            candidate = current ^ (1 << int(v))
            cand_value = reception_value_of_mask(g, candidate)
            if cand_value > value:
                current, value = candidate, cand_value
                improved = True
                break
    return SolveResult(mask_to_set(current), value, "local-search")


def _validate_profile(g: Graph, p: Sequence[float]) -> list[float]:
    if len(p) != g.n:
        raise ValueError(f"profile length {len(p)} does not match n = {g.n}")
    out = [float(x) for x in p]
    for v, x in enumerate(out):
        if not 0.0 <= x <= 1.0 or math.isnan(x):
            raise ValueError(f"probability {x!r} at vertex {v} outside [0, 1]")
    return out


def exclusion_products(values: Sequence[float]) -> list[float]:
    """``out[i] = prod(values[j] for j != i)`` via prefix/suffix products.

    No division, so zeros in ``values`` (deterministic broadcasters) are
    handled exactly.
    """
    k = len(values)
    out = [1.0] * k
    acc = 1.0
    for i in range(k):
        out[i] = acc
        acc *= values[i]
    acc = 1.0
    for i in range(k - 1, -1, -1):
        out[i] *= acc
        acc *= values[i]
    return out


def receive_probabilities(g: Graph, p: Sequence[float]) -> list[float]:
    """Per-vertex probability of a successful reception under independent broadcasting.

    Vertex ``v`` succeeds when it stays quiet and exactly one neighbor
    broadcasts: ``(1-p_v) * sum_u p_u * prod_{w in N(v), w != u} (1-p_w)``.
    Runs in O(sum of degrees).
    """
    probs = _validate_profile(g, p)
    out = [0.0] * g.n
    for v in range(g.n):
        nbrs = sorted(g.neighbors[v])
        if not nbrs:
            continue
        quiet = [1.0 - probs[u] for u in nbrs]
        excl = exclusion_products(quiet)
        out[v] = (1.0 - probs[v]) * sum(probs[u] * e for u, e in zip(nbrs, excl))
    return out


def expected_value(g: Graph, p: Sequence[float]) -> float:
    """Expected number of successful receptions when vertex ``i`` broadcasts with probability ``p[i]``."""
    return sum(receive_probabilities(g, p))


def derandomize(g: Graph, p: Sequence[float]) -> SolveResult:
    """Round a product distribution to a set via conditional expectations.

    Vertices are fixed in index order; each step keeps the 0/1 assignment
    with the larger conditional expectation (ties toward 0).  The returned
    integral set therefore satisfies
    ``reception_value(g, set) >= expected_value(g, p)``.
    """
    probs = _validate_profile(g, p)
    for v in range(g.n):
        probs[v] = 0.0
        e0 = expected_value(g, probs)
        probs[v] = 1.0
        e1 = expected_value(g, probs)
        probs[v] = 1.0 if e1 > e0 else 0.0
    chosen = frozenset(v for v, x in enumerate(probs) if x == 1.0)
    return SolveResult(chosen, reception_value(g, chosen), "derandomized")


def _sample_scales(n: int) -> list[float]:
    top = (n - 1).bit_length()  # ceil(log2 n) for n >= 1
    return [2.0 ** -i for i in range(top + 1)]


def _trial_mask(g: Graph, seed: int, scale_index: int, trial: int, prob: float) -> int:
    # Stream keyed by (seed, scale, trial): results are independent of
    # evaluation order, so parallel schedules cannot change the answer.
    rng = np.random.default_rng((seed, scale_index, trial))
    draws = rng.random(g.n)
    mask = 0
    for v in range(g.n):
        if draws[v] < prob:
            mask |= 1 << v
    return mask


def _lex_better(value: int, mask: int, best_value: int, best_mask: int) -> bool:
    return value > best_value or (value == best_value and mask < best_mask)


def approx_log(
    g: Graph,
    trials_per_scale: int = 32,
    seed: int = 0,
    *,
    workers: int = 1,
) -> SolveResult:
    """Best set over repeated product sampling at scales ``1, 1/2, ..., 2^-ceil(log2 n)``.

    Each (scale, trial) pair draws an independent set where every vertex
    joins with the scale's probability; the best set across all draws and
    the empty set is returned.  Repetition converts the per-scale
    constant-probability guarantee into a high-probability one.
    """
    if g.n < 1:
        raise ValueError("graph must have at least one vertex")
    if trials_per_scale < 1:
        raise ValueError("trials_per_scale must be at least 1")
    if seed < 0:
        raise ValueError("seed must be a nonnegative integer")
    scales = _sample_scales(g.n)
    jobs = [(si, t) for si in range(len(scales)) for t in range(trials_per_scale)]

    def run(job: tuple[int, int]) -> tuple[int, int, int, int]:
        si, t = job
        mask = _trial_mask(g, seed, si, t, scales[si])
        return si, t, mask, reception_value_of_mask(g, mask)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, jobs))
    else:
        outcomes = [run(job) for job in jobs]

    best_value, best_mask = 0, 0  # empty set is always a candidate
    per_scale = [0] * len(scales)
    for si, _t, mask, value in outcomes:
        per_scale[si] = max(per_scale[si], value)
        if _lex_better(value, mask, best_value, best_mask):
            best_value, best_mask = value, mask
    scales_tried = tuple((scales[si], per_scale[si]) for si in range(len(scales)))
    return SolveResult(mask_to_set(best_mask), best_value, "sampled", scales_tried)
