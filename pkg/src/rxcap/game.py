"""The broadcast game on a graph and its equilibrium machinery.

Every vertex independently chooses to broadcast (1) or stay quiet (0).
A quiet player earns 0.  A broadcaster earns one point per neighbor that
successfully receives (hears exactly one transmission while quiet) minus
one point per neighbor that does not (broadcasting itself, or hearing two
or more).  The social quantity of interest is not the utility sum but the
total number of successful receptions, i.e. the reception value of the
broadcaster set.

Pure profiles are 0/1 vectors; mixed profiles assign each vertex an
independent broadcast probability.  For mixed profiles the module computes
closed-form per-vertex and aggregate expectations, verifies equilibrium
candidates, and audits the inequality chain that pins the expected success
count of any equilibrium to the square root of the vertex count.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import ExhaustiveLimitError
from .graph import Graph, isolated_vertices, reception_value
from .solve import exact_opt, exclusion_products, _validate_profile

DEFAULT_PNE_EXHAUSTIVE_LIMIT = 24

StrategyProfile = tuple  # length-n tuple of 0/1 ints


def check_profile(g: Graph, s: Sequence[int]) -> tuple[int, ...]:
    if len(s) != g.n:
        raise ValueError(f"profile length {len(s)} does not match n = {g.n}")
    out = tuple(int(b) for b in s)
    if any(b not in (0, 1) for b in out):
        raise ValueError("profile entries must be 0 or 1")
    return out


def profile_to_string(s: Sequence[int]) -> str:
    """Serialize as a 0/1 string, index 0 leftmost."""
    return "".join(str(int(b)) for b in s)


def parse_profile(text: str) -> tuple[int, ...]:
    if any(c not in "01" for c in text):
        raise ValueError(f"profile string must contain only 0/1, got {text!r}")
    return tuple(int(c) for c in text)


def broadcasters(s: Sequence[int]) -> frozenset[int]:
    return frozenset(i for i, b in enumerate(s) if b)


def utility(g: Graph, s: Sequence[int], i: int) -> int:
    """Payoff of player ``i``: 0 when quiet, receivers-minus-failures when broadcasting."""
    profile = check_profile(g, s)
    if not 0 <= i < g.n:
        raise ValueError(f"player index {i} outside [0, {g.n})")
    if profile[i] == 0:
        return 0
    score = 0
    for j in g.neighbors[i]:
        if profile[j] == 1:
            score -= 1
        else:
            hears = sum(profile[w] for w in g.neighbors[j])
            score += 1 if hears == 1 else -1
    return score


def value(g: Graph, s: Sequence[int]) -> int:
    """Total successful receptions under the profile (the quantity OPT maximizes)."""
    return reception_value(g, broadcasters(check_profile(g, s)))


def flipped(s: Sequence[int], i: int) -> tuple[int, ...]:
    out = list(s)
    out[i] = 1 - out[i]
    return tuple(out)


def is_pure_nash(g: Graph, s: Sequence[int]) -> tuple[bool, int | None]:
    """Check the no-profitable-deviation condition; returns the smallest deviator otherwise.

    A player deviates only for a strict gain, so indifferent profiles count
    as equilibria.
    """
    profile = check_profile(g, s)
    for i in range(g.n):
        if utility(g, flipped(profile, i), i) > utility(g, profile, i):
            return False, i
    return True, None


def _stable_profile_ids(g: Graph, start: int, stop: int, mat: np.ndarray, deg: np.ndarray) -> np.ndarray:
    """Profile ids in [start, stop) that are pure equilibria, via batched linear algebra.

    For a broadcaster the deviation test reduces to "at least half my
    neighbors hear exactly one message while quiet"; for a quiet vertex to
    "at most half my neighbors are quiet and hear nothing".  Both counts
    come from one matrix product each; float32 keeps them exact (< 2^24).
    """
    ids = np.arange(start, stop, dtype=np.uint32)
    bits = np.arange(g.n, dtype=np.uint32)
    x = ((ids[:, None] >> bits) & 1).astype(np.float32)
    hears = x @ mat
    quiet = x == 0.0
    gain_now = ((hears == 1.0) & quiet).astype(np.float32) @ mat
    gain_flip = ((hears == 0.0) & quiet).astype(np.float32) @ mat
    stable = np.where(quiet, 2.0 * gain_flip <= deg, 2.0 * gain_now >= deg)
    return ids[stable.all(axis=1)]


def enumerate_pure_nash(
    g: Graph,
    *,
    max_exhaustive: int = DEFAULT_PNE_EXHAUSTIVE_LIMIT,
    chunk: int = 1 << 18,
    workers: int = 1,
) -> list[tuple[int, ...]]:
    """All pure equilibria, ascending by profile bitmask (bit ``i`` = player ``i``).

    Exhausts all ``2^n`` profiles and refuses above ``max_exhaustive``
    vertices (default 24 — a documented slow path at that size).  The
    profile space may be partitioned across ``workers`` threads; chunks
    are merged in numeric order so the result is schedule-independent.
    """
    if g.n > max_exhaustive:
        raise ExhaustiveLimitError(
            f"equilibrium enumeration over 2^{g.n} profiles exceeds the limit of "
            f"{max_exhaustive} vertices; pass a larger max_exhaustive to force it"
        )
    mat = g.adjacency_matrix()
    deg = mat.sum(axis=0)
    total = 1 << g.n
    starts = range(0, total, chunk)

    def run(start: int) -> np.ndarray:
        return _stable_profile_ids(g, start, min(start + chunk, total), mat, deg)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(start) for start in starts]
    found: list[tuple[int, ...]] = []
    for part in parts:
        for pid in part:
            pid = int(pid)
            found.append(tuple((pid >> i) & 1 for i in range(g.n)))
    return found


def best_response(
    g: Graph,
    s0: Sequence[int],
    max_rounds: int = 100,
    order: str = "round-robin",
    seed: int | None = None,
) -> tuple[tuple[int, ...], bool, int]:
    """Iterated best-response dynamics from ``s0``.

    Repeatedly flips the first strictly-profitable deviator in scan order
    (ascending ids, or a fresh seeded permutation per step for
    ``order="random"``).  Stops at an equilibrium (converged), on a repeated
    profile (cycle), or after ``max_rounds * n`` flips.  Returns
    ``(final profile, converged, number of flips)``.
    """
    profile = list(check_profile(g, s0))
    if order == "random":
        if seed is None:
            raise ValueError("random order requires a seed")
        rng = np.random.default_rng(seed)
    elif order == "round-robin":
        rng = None
    else:
        raise ValueError(f"order must be 'round-robin' or 'random', got {order!r}")
    seen = {tuple(profile)}
    flips = 0
    max_flips = max_rounds * max(g.n, 1)
    while True:
        scan = rng.permutation(g.n) if rng is not None else range(g.n)
        deviator = None
        for i in scan:
            i = int(i)
            if utility(g, flipped(profile, i), i) > utility(g, profile, i):
                deviator = i
                break
        if deviator is None:
            return tuple(profile), True, flips
        profile[deviator] = 1 - profile[deviator]
        flips += 1
        snapshot = tuple(profile)
        if snapshot in seen or flips >= max_flips:
            return snapshot, False, flips
        seen.add(snapshot)


# ---------------------------------------------------------------------------
# Mixed profiles

@dataclass(frozen=True)
class MixedStats:
    """Closed-form expectations for an independent-broadcast profile.

    Per vertex ``i`` (given that ``i`` broadcasts): ``success_if_broadcast``
    counts neighbors expected to hear only ``i``, ``failure_if_broadcast``
    the rest of the neighborhood; the two always sum to the degree.
    ``receive_prob`` is the unconditional probability that ``i`` itself
    successfully receives; ``idle_prob`` that ``i`` neither broadcasts nor
    hears anything; ``expected_utility`` is
    ``p_i * (success_if_broadcast - failure_if_broadcast)``.

    Aggregates: expected broadcasters, successes, collision failures, and
    idle vertices partition the vertex count exactly.  Collision failures
    are reported as the residual ``n - broadcasters - successes - idle``;
    ``collision_failures_formula`` recomputes them from the direct
    per-vertex expression as a cross-check (the two agree to float
    round-off, including at probabilities 0 and 1).
    """

    broadcast_probs: tuple[float, ...]
    success_if_broadcast: tuple[float, ...]
    failure_if_broadcast: tuple[float, ...]
    receive_prob: tuple[float, ...]
    idle_prob: tuple[float, ...]
    expected_utility: tuple[float, ...]
    expected_broadcasters: float
    expected_successes: float
    expected_collision_failures: float
    expected_idle: float
    collision_failures_formula: float

    @property
    def n(self) -> int:
        return len(self.broadcast_probs)

    def population_total(self) -> float:
        """Broadcasters + successes + failures (direct formula) + idle; equals n identically."""
        return (
            self.expected_broadcasters
            + self.expected_successes
            + self.collision_failures_formula
            + self.expected_idle
        )


def mixed_stats(g: Graph, p: Sequence[float]) -> MixedStats:
    """Evaluate all closed-form expectations in O(sum of degrees).

    Exclusion products are taken with prefix/suffix passes, never division,
    so vertices with probability exactly 1 are handled without 0/0.
    """
    probs = _validate_profile(g, p)
    quiet = [1.0 - x for x in probs]
    success = [0.0] * g.n
    receive = [0.0] * g.n
    idle = [0.0] * g.n
    for j in range(g.n):
        nbrs = sorted(g.neighbors[j])
        quiet_nbrs = [quiet[u] for u in nbrs]
        excl = exclusion_products(quiet_nbrs)
        all_quiet = math.prod(quiet_nbrs)
        idle[j] = quiet[j] * all_quiet
        # alpha = P(j hears only u) for each neighbor u of j
        heard_only = 0.0
        for u, e in zip(nbrs, excl):
            alpha = quiet[j] * e
            success[u] += alpha
            heard_only += probs[u] * e
        receive[j] = quiet[j] * heard_only
    failure = [g.degree(i) - success[i] for i in range(g.n)]
    util = [probs[i] * (success[i] - failure[i]) for i in range(g.n)]
    b_total = sum(probs)
    s_total = sum(receive)
    a_total = sum(idle)
    f_resid = g.n - b_total - s_total - a_total
    f_direct = sum(quiet[i] - idle[i] - receive[i] for i in range(g.n))
    if abs(f_resid - f_direct) > 1e-6 * max(1, g.n):
        raise RuntimeError(
            f"collision-failure cross-check diverged: residual {f_resid} vs formula {f_direct}"
        )
    return MixedStats(
        broadcast_probs=tuple(probs),
        success_if_broadcast=tuple(success),
        failure_if_broadcast=tuple(failure),
        receive_prob=tuple(receive),
        idle_prob=tuple(idle),
        expected_utility=tuple(util),
        expected_broadcasters=b_total,
        expected_successes=s_total,
        expected_collision_failures=f_resid,
        expected_idle=a_total,
        collision_failures_formula=f_direct,
    )


def is_mixed_nash(
    g: Graph, p: Sequence[float], tol: float = 1e-9
) -> tuple[bool, tuple[tuple[int, float], ...]]:
    """Verify a product distribution as an equilibrium candidate.

    Player ``i``'s broadcast payoff gain over staying quiet is
    ``success_if_broadcast - failure_if_broadcast``; optimality requires
    gain >= -tol at probability 1, <= tol at probability 0, and |gain| <= tol
    strictly inside.  Returns all violating vertices with their gains.
    """
    if tol < 0:
        raise ValueError("tol must be nonnegative")
    stats = mixed_stats(g, p)
    violations: list[tuple[int, float]] = []
    for i, prob in enumerate(stats.broadcast_probs):
        gain = stats.success_if_broadcast[i] - stats.failure_if_broadcast[i]
        if prob == 1.0:
            ok = gain >= -tol
        elif prob == 0.0:
            ok = gain <= tol
        else:
            ok = abs(gain) <= tol
        if not ok:
            violations.append((i, gain))
    return not violations, tuple(violations)


@dataclass(frozen=True)
class InequalityCheck:
    name: str
    lhs: float
    rhs: float
    satisfied: bool
    worst_vertex: int | None = None

    @property
    def slack(self) -> float:
        return self.rhs - self.lhs


@dataclass(frozen=True)
class EquilibriumAudit:
    """Result of auditing a mixed profile against the equilibrium inequality chain.

    The population identity (broadcasters + successes + failures + idle =
    n, with failures from the direct formula) is checked for every profile.
    The remaining inequalities are meaningful only at an equilibrium and
    are evaluated only when the profile verifies as one:

    * success_at_least_failure / success_at_least_half — per broadcaster;
    * broadcasters_at_most_twice_successes, failures_at_most_successes —
      aggregate comparisons to the expected success count S;
    * idle_bounded — idle <= 0.9 n + 2000 S^2;
    * population_bounded — n <= 40 S + 20000 S^2, the square-root cap on
      how far any equilibrium can fall below n.
    """

    stats: MixedStats
    population_residual: float
    population_identity_holds: bool
    is_equilibrium: bool
    equilibrium_violations: tuple[tuple[int, float], ...]
    inequality_checks: tuple[InequalityCheck, ...] | None

    def all_hold(self) -> bool:
        if not self.population_identity_holds:
            return False
        if self.inequality_checks is None:
            return True
        return all(c.satisfied for c in self.inequality_checks)


def equilibrium_audit(g: Graph, p: Sequence[float], tol: float = 1e-9) -> EquilibriumAudit:
    """Audit the inequality chain at a mixed profile.

    Requires a graph with no isolated vertices: an isolated vertex can
    contribute nothing to either the optimum or an equilibrium, so delete
    it and renumber before auditing.
    """
    isolated = isolated_vertices(g)
    if isolated:
        raise ValueError(
            f"graph has isolated vertices {list(isolated)}; delete them (they cannot "
            f"affect equilibria or the optimum) and renumber before auditing"
        )
    stats = mixed_stats(g, p)
    residual = stats.population_total() - g.n
    eq_ok, violations = is_mixed_nash(g, p, tol)
    checks: tuple[InequalityCheck, ...] | None = None
    if eq_ok:
        s_total = stats.expected_successes
        built: list[InequalityCheck] = []

        def per_vertex(name: str, lhs_of, rhs_of) -> InequalityCheck:
            worst: int | None = None
            worst_margin = math.inf
            for i, prob in enumerate(stats.broadcast_probs):
                if prob > 0.0:
                    margin = rhs_of(i) - lhs_of(i)
                    if margin < worst_margin:
                        worst_margin, worst = margin, i
            if worst is None:
                return InequalityCheck(name, 0.0, math.inf, True, None)
            return InequalityCheck(
                name, lhs_of(worst), rhs_of(worst), worst_margin >= -tol, worst
            )

        built.append(
            per_vertex(
                "success_at_least_failure",
                lambda i: stats.failure_if_broadcast[i],
                lambda i: stats.success_if_broadcast[i],
            )
        )
        built.append(
            per_vertex(
                "success_at_least_half",
                lambda i: 0.5,
                lambda i: stats.success_if_broadcast[i],
            )
        )

        def aggregate(name: str, lhs: float, rhs: float) -> InequalityCheck:
            return InequalityCheck(name, lhs, rhs, lhs <= rhs + tol)

        built.append(
            aggregate(
                "broadcasters_at_most_twice_successes",
                stats.expected_broadcasters,
                2.0 * s_total,
            )
        )
        built.append(
            aggregate(
                "failures_at_most_successes",
                stats.expected_collision_failures,
                s_total,
            )
        )
        built.append(
            aggregate(
                "idle_bounded",
                stats.expected_idle,
                0.9 * g.n + 2000.0 * s_total * s_total,
            )
        )
        built.append(
            aggregate(
                "population_bounded",
                float(g.n),
                40.0 * s_total + 20000.0 * s_total * s_total,
            )
        )
        checks = tuple(built)
    return EquilibriumAudit(
        stats=stats,
        population_residual=residual,
        population_identity_holds=abs(residual) <= tol,
        is_equilibrium=eq_ok,
        equilibrium_violations=violations,
        inequality_checks=checks,
    )


# ---------------------------------------------------------------------------
# Price of anarchy over the pure equilibria of one instance

@dataclass(frozen=True)
class PoAReport:
    """Optimum vs. the enumerated pure equilibria of one instance.

    Ratios are exact rationals; they are ``None`` when no pure equilibrium
    exists (the game need not admit one) or, flagged by ``poa_infinite``,
    when the worst equilibrium has value 0 while the optimum is positive.
    """

    opt_value: int
    opt_set: frozenset[int]
    pne_profiles: tuple[tuple[int, ...], ...]
    best_pne_value: int | None
    worst_pne_value: int | None
    poa_ratio: Fraction | None
    pos_ratio: Fraction | None
    poa_infinite: bool = False

    @property
    def has_pne(self) -> bool:
        return bool(self.pne_profiles)


def _ratio(opt: int, denom: int | None) -> tuple[Fraction | None, bool]:
    if denom is None:
        return None, False
    if denom == 0:
        return (Fraction(1), False) if opt == 0 else (None, True)
    return Fraction(opt, denom), False


def poa_report(
    g: Graph,
    *,
    max_exhaustive_opt: int = 26,
    max_exhaustive_pne: int = DEFAULT_PNE_EXHAUSTIVE_LIMIT,
    workers: int = 1,
) -> PoAReport:
    """Exact optimum, full pure-equilibrium list, and their value ratios."""
    opt = exact_opt(g, max_exhaustive=max_exhaustive_opt)
    pnes = enumerate_pure_nash(g, max_exhaustive=max_exhaustive_pne, workers=workers)
    if pnes:
        values = [value(g, s) for s in pnes]
        best, worst = max(values), min(values)
    else:
        best = worst = None
    poa, poa_inf = _ratio(opt.best_value, worst)
    pos, _ = _ratio(opt.best_value, best)
    return PoAReport(
        opt_value=opt.best_value,
        opt_set=opt.best_set,
        pne_profiles=tuple(pnes),
        best_pne_value=best,
        worst_pne_value=worst,
        poa_ratio=poa,
        pos_ratio=pos,
        poa_infinite=poa_inf,
    )


# ---------------------------------------------------------------------------
# Counterexample gadget: equilibria and maximal sets need not intersect

def bridged_stars_gadget(leaf_count: int = 10) -> tuple[Graph, dict]:
    """Two stars whose hubs are joined through a bridge vertex with a pendant.

    Layout: ``leaves1`` = 0..c-1 hang off ``hub1``, ``leaves2`` = c..2c-1
    hang off ``hub2``; ``bridge`` is adjacent to both hubs and to the
    ``pendant``.  With the default leaf count the two hubs broadcasting is
    the unique pure equilibrium (value 2c) yet is not maximal: adding the
    bridge raises the value to 2c+1 while giving the bridge negative
    utility, so the maximal sets and the equilibria are disjoint.
    """
    c = leaf_count
    if c < 1:
        raise ValueError("leaf_count must be at least 1")
    hub1, hub2, bridge, pendant = 2 * c, 2 * c + 1, 2 * c + 2, 2 * c + 3
    edges = [(leaf, hub1) for leaf in range(c)]
    edges += [(leaf, hub2) for leaf in range(c, 2 * c)]
    edges += [(hub1, bridge), (hub2, bridge), (bridge, pendant)]
    labels = {
        "hub1": hub1,
        "hub2": hub2,
        "bridge": bridge,
        "pendant": pendant,
        "leaves1": tuple(range(c)),
        "leaves2": tuple(range(c, 2 * c)),
    }
    return Graph(2 * c + 4, edges), labels
