"""Greedy and look-ahead independent-set runs, plus the exact optimum solver.

Each algorithm exists in two semantically identical forms: a policy that
plays through the enforcing harness (:func:`iset_lab.transcript.run_policy`),
and a direct runner that produces the same decisions and budget without
materializing revelations, which is what the large-n experiments use.
The test suite pins the two forms against each other on shared seeds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .errors import InfeasibleParamsError, InvariantBreach, LimitExceeded, UsageError
from .gnp import GnpSource, canonical_pair, iceil, ifloor, log_params
from .prf import GOLDEN, MASK64
from .transcript import RunResult, run_policy

_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB


def _greedy_prefix(source, rounds: int, cap: int | None):
    """First ``rounds`` greedy rounds: add vertex t iff the set is below
    ``cap`` and t has no edge to any member.  Returns (members,
    include_rounds) with 1-based rounds."""
    members: list[int] = []
    include_rounds: list[int] = []
    if isinstance(source, GnpSource):
        # inlined PRF: this loop dominates the large-n batteries
        base = source._base
        threshold = source._threshold
        members_pm: list[int] = []  # (u << 32) * GOLDEN, premultiplied per member
        for t in range(rounds):
            if cap is not None and len(members) >= cap:
                break
            tg = (base + t * GOLDEN) & MASK64
            hit = False
            for pm in members_pm:
                z = (pm + tg) & MASK64
                z = ((z ^ (z >> 30)) * _M1) & MASK64
                z = ((z ^ (z >> 27)) * _M2) & MASK64
                if (z ^ (z >> 31)) < threshold:
                    hit = True
                    break
            if not hit:
                members.append(t)
                members_pm.append(((t << 32) * GOLDEN) & MASK64)
                include_rounds.append(t + 1)
    else:
        for t in range(rounds):
            if cap is not None and len(members) >= cap:
                break
            if not any(source.edge_status(u, t) for u in members):
                members.append(t)
                include_rounds.append(t + 1)
    return members, include_rounds


def greedy_run(source) -> RunResult:
    """Classical greedy over vertices 0..n-1 with no future queries.

    Zero queried pairs means the budget is 0 on every input.  The final
    set is audited against the source before returning.
    """
    n = source.n
    members, include_rounds = _greedy_prefix(source, n, None)
    if not source.is_independent(members):
        raise InvariantBreach("greedy output failed the independence audit")
    return RunResult(
        final_set=tuple(members),
        budget=0,
        rounds=n,
        include_rounds=tuple(include_rounds),
    )


class GreedyAlgorithm:
    """Greedy as a harness policy and as a direct runner."""

    def choose_vertex(self, tr):
        return len(tr.inspected)

    def future_pairs(self, tr):
        return ()

    def include(self, tr):
        return not tr.has_revealed_neighbor_in_chosen(tr.current_vertex)

    def run(self, source) -> RunResult:
        return greedy_run(source)

    def prefix_sets(self, source, t: int):
        """(inspected, queried) after round t; greedy inspects 0..t-1."""
        return range(t), ()


@dataclass(frozen=True)
class LookaheadParams:
    """Phase lengths for the three-phase look-ahead run.

    ``greedy_target`` caps the phase-1 set, ``greedy_rounds`` is the
    number of phase-1 rounds, ``window_cap`` bounds the search window
    kept after phase 2, and ``search_cap`` bounds the brute-force set
    of phase 3.
    """

    eps: float
    mode: str
    greedy_target: int
    greedy_rounds: int
    window_cap: int
    search_cap: int


def lookahead_params(n: int, p: float, eps: float, mode: str = "practical") -> LookaheadParams:
    """Derive look-ahead phase lengths for an instance.

    ``paper-exact`` evaluates the asymptotic prescriptions verbatim and
    refuses (naming the failing inequality) when they do not fit n.
    ``practical`` keeps the same three-phase shape but balances the
    phase-1 target against the instance so the search window stays
    populated at reachable sizes.
    """
    params = log_params(n, p, eps if eps > 0 else 1.0)  # eps=0 allowed in practical target
    b = params.base
    log_b_n = math.log(n) / math.log(b)

    if mode == "paper-exact":
        target = ifloor((1.0 - eps) * log_b_n - 3.5 * math.log(log_b_n) / math.log(b))
        if target < 1:
            raise InfeasibleParamsError(
                f"paper-exact target {target} < 1 at n={n}, p={p}, eps={eps}: "
                f"(1-eps)*log_b(n) = {(1 - eps) * log_b_n:.3f} does not exceed "
                f"3.5*log_b(log_b(n)) = {3.5 * math.log(log_b_n) / math.log(b):.3f}",
                inequality="greedy_target >= 1",
            )
        rounds = target * iceil(n ** (1.0 - eps) * target)
        if rounds + 2 > n:
            raise InfeasibleParamsError(
                f"paper-exact rounds {rounds} need rounds + 2 <= n = {n}",
                inequality="greedy_rounds + 2 <= n",
            )
        window = ifloor(n**eps * log_b_n**3)
        window = min(window, n - rounds - 2)
    elif mode == "practical":
        # Largest target whose phase-1 budget 8*j*b**j fits in a quarter
        # of the rounds: keeps phase 1 near-certain to fill while leaving
        # the bulk of the vertex range for the search window.
        balance = 0
        j = 1
        while iceil(8.0 * j * b**j) <= n // 4:
            balance = j
            j += 1
        target = min(ifloor((1.0 - eps) * log_b_n), balance)
        if target < 1:
            raise InfeasibleParamsError(
                f"practical target {target} < 1 at n={n}, p={p}, eps={eps}",
                inequality="greedy_target >= 1",
            )
        window_want = ifloor(n**eps) * iceil(log_b_n)
        rounds = min(n - 2 - window_want, iceil(8.0 * target * b**target))
        if rounds < target or rounds + 2 > n:
            raise InfeasibleParamsError(
                f"practical rounds {rounds} do not fit n={n}",
                inequality="greedy_rounds + 2 <= n",
            )
        window = min(n - rounds - 2, window_want)
    else:
        raise UsageError(f"unknown mode {mode!r}, expected 'paper-exact' or 'practical'")

    if window < 1:
        raise InfeasibleParamsError(
            f"search window cap {window} < 1 at n={n}", inequality="window_cap >= 1"
        )
    search_cap = ifloor(2.0 * math.log(window) / math.log(b))
    return LookaheadParams(
        eps=eps,
        mode=mode,
        greedy_target=target,
        greedy_rounds=rounds,
        window_cap=window,
        search_cap=max(search_cap, 1),
    )


def _window_survivors(source, members, lo: int, hi: int) -> list[int]:
    """Vertices in [lo, hi) with no edge to any member, ascending."""
    if not members:
        return list(range(lo, hi))
    if isinstance(source, GnpSource) and hi - lo > 64:
        w = np.arange(lo, hi, dtype=np.uint64)
        blocked = np.zeros(hi - lo, dtype=bool)
        for u in members:
            us = np.full(hi - lo, u, dtype=np.uint64)
            blocked |= source.edge_status_batch(us, w)
        return [int(v) for v in w[~blocked]]
    return [v for v in range(lo, hi) if not any(source.edge_status(u, v) for u in members)]


def _pair_statuses(source, vertices) -> dict:
    """Statuses of every pair within ``vertices`` as a dict."""
    pairs = list(combinations(sorted(vertices), 2))
    if not pairs:
        return {}
    if isinstance(source, GnpSource) and len(pairs) > 256:
        us = np.array([a for a, _ in pairs], dtype=np.uint64)
        vs = np.array([b for _, b in pairs], dtype=np.uint64)
        statuses = source.edge_status_batch(us, vs)
        return {pair: bool(s) for pair, s in zip(pairs, statuses)}
    return {pair: source.edge_status(*pair) for pair in pairs}


def lookahead_run(source, params: LookaheadParams) -> RunResult:
    """Three-phase look-ahead run.

    Phase 1 runs capped greedy for ``greedy_rounds`` rounds.  Phase 2
    inspects the last vertex, queries the cross pairs between the phase-1
    set and the window W of remaining middle vertices, and keeps the
    lowest-indexed ``window_cap`` non-neighbors.  Phase 3 inspects the
    second-to-last vertex, queries all pairs inside the kept window and
    brute-forces a maximum independent set there (capped at
    ``search_cap``), whose vertices are then added in the final rounds.

    The budget is exactly |J|*|I| + C(|J|, 2) for phase-1 set I and
    brute-force set J, since those are precisely the queried pairs with
    both endpoints in the output.
    """
    n = source.n
    t_rounds = params.greedy_rounds
    if t_rounds + 2 > n:
        raise InfeasibleParamsError(
            f"params need greedy_rounds + 2 <= n, got {t_rounds} + 2 > {n}",
            inequality="greedy_rounds + 2 <= n",
        )
    members, include_rounds = _greedy_prefix(source, t_rounds, params.greedy_target)

    # phase 2: window W is the untouched middle range, excluding the two
    # vertices consumed by the search and brute-force rounds
    window = _window_survivors(source, members, t_rounds, n - 2)
    window = window[: params.window_cap]

    extras = {
        "greedy_size": len(members),
        "window_size": len(window),
        "search_size": 0,
        "degenerate": False,
        "greedy_set": tuple(members),
        "search_set": (),
    }
    if not window:
        extras["degenerate"] = True
        final = tuple(members)
        if not source.is_independent(final):
            raise InvariantBreach("look-ahead output failed the independence audit")
        return RunResult(
            final_set=final,
            budget=0,
            rounds=n,
            include_rounds=tuple(include_rounds),
            extras=extras,
        )

    # phase 3: brute-force a capped maximum independent set in the window
    statuses = _pair_statuses(source, window)
    found = mis_bruteforce(window, statuses, cap=params.search_cap)
    extras["search_size"] = len(found)
    extras["search_set"] = found

    include_rounds = list(include_rounds)
    include_rounds.extend(t_rounds + 3 + i for i in range(len(found)))
    final = tuple(sorted(set(members) | set(found)))
    budget = len(found) * len(members) + len(found) * (len(found) - 1) // 2
    if not source.is_independent(final):
        raise InvariantBreach("look-ahead output failed the independence audit")
    return RunResult(
        final_set=final,
        budget=budget,
        rounds=n,
        include_rounds=tuple(include_rounds),
        extras=extras,
    )


class LookaheadAlgorithm:
    """Look-ahead as a harness policy (single run per instance).

    The policy replays the same schedule the direct runner uses: greedy
    rounds on 0..T-1, vertex n-1 in the search round, vertex n-2 in the
    brute-force round, then the brute-force set followed by the rest of
    the window.
    """

    def __init__(self, params: LookaheadParams):
        self.params = params
        self._window: list[int] = []
        self._found: tuple[int, ...] = ()
        self._queue: list[int] = []

    def run(self, source) -> RunResult:
        return lookahead_run(source, self.params)

    def choose_vertex(self, tr):
        t = len(tr.inspected) + 1  # 1-based round being opened
        n = tr.source.n
        t_rounds = self.params.greedy_rounds
        if t <= t_rounds:
            return t - 1
        if t == t_rounds + 1:
            return n - 1
        if t == t_rounds + 2:
            return n - 2
        return self._queue[t - (t_rounds + 3)]

    def future_pairs(self, tr):
        t = len(tr.inspected)  # 1-based round now active
        n = tr.source.n
        t_rounds = self.params.greedy_rounds
        if t == t_rounds + 1:
            members = sorted(tr.chosen)
            return [(u, w) for u in members for w in range(t_rounds, n - 2)]
        if t == t_rounds + 2:
            members = sorted(tr.chosen)
            window = [
                w
                for w in range(t_rounds, n - 2)
                if not any(tr.revealed.get(canonical_pair(u, w)) for u in members)
            ]
            self._window = window[: self.params.window_cap]
            return list(combinations(self._window, 2))
        return ()

    def include(self, tr):
        t = len(tr.inspected)
        t_rounds = self.params.greedy_rounds
        if t <= t_rounds:
            if len(tr.chosen) >= self.params.greedy_target:
                return False
            return not tr.has_revealed_neighbor_in_chosen(tr.current_vertex)
        if t == t_rounds + 1:
            return False
        if t == t_rounds + 2:
            statuses = {
                pair: tr.revealed[pair] for pair in combinations(sorted(self._window), 2)
            }
            self._found = mis_bruteforce(self._window, statuses, cap=self.params.search_cap)
            rest = sorted(set(range(t_rounds, tr.source.n - 2)) - set(self._found))
            self._queue = list(self._found) + rest
            return False
        return tr.current_vertex in self._found


# -- exact maximum independent set -----------------------------------------


def _clique_cover_order(adj, cand: int):
    """Partition candidates into clique classes; an independent set takes
    at most one vertex per class.  Returns [(vertex, class_no), ...] in
    construction order; the class count is the bound."""
    order = []
    rest = cand
    classes = 0
    while rest:
        classes += 1
        v = (rest & -rest).bit_length() - 1
        cls = [v]
        rest &= ~(1 << v)
        pool = rest & adj[v]
        while pool:
            u = (pool & -pool).bit_length() - 1
            cls.append(u)
            rest &= ~(1 << u)
            pool &= adj[u] & rest
        for u in cls:
            order.append((u, classes))
    return order


def _max_iset_size(k: int, adj, compat, stop_at: int | None) -> int:
    """Branch-and-bound size of a maximum independent set on k vertices.

    ``stop_at`` short-circuits the search as soon as that size is reached.
    """
    full = (1 << k) - 1
    best = 0
    cand = full
    while cand:  # greedy seed for the initial lower bound
        v = (cand & -cand).bit_length() - 1
        best += 1
        cand &= compat[v]
    if stop_at is not None and best >= stop_at:
        return stop_at

    def expand(size: int, cand: int):
        nonlocal best
        for v, bound in reversed(_clique_cover_order(adj, cand)):
            if size + bound <= best:
                return
            if not (cand >> v) & 1:
                continue
            cand &= ~(1 << v)
            if size + 1 > best:
                best = size + 1
                if stop_at is not None and best >= stop_at:
                    return
            nxt = cand & compat[v]
            if nxt:
                expand(size + 1, nxt)
                if stop_at is not None and best >= stop_at:
                    return

    expand(0, full)
    return best if stop_at is None else min(best, stop_at)


def _lex_first_iset(k: int, adj, compat, target: int) -> list[int]:
    """Lexicographically smallest independent set of exactly ``target``
    vertices, by include-first ascending DFS with clique-cover pruning."""

    def cover_classes(cand: int) -> int:
        classes = 0
        rest = cand
        while rest:
            classes += 1
            v = (rest & -rest).bit_length() - 1
            rest &= ~(1 << v)
            pool = rest & adj[v]
            while pool:
                u = (pool & -pool).bit_length() - 1
                rest &= ~(1 << u)
                pool &= adj[u] & rest
        return classes

    def search(size: int, cand: int):
        if size == target:
            return []
        while cand:
            if cover_classes(cand) < target - size:
                return None
            v = (cand & -cand).bit_length() - 1
            sub = search(size + 1, cand & compat[v])
            if sub is not None:
                return [v] + sub
            cand &= ~(1 << v)
        return None

    found = search(0, (1 << k) - 1)
    if found is None:
        raise InvariantBreach("lex search failed to reproduce the proven optimum size")
    return found


def mis_bruteforce(vertices, adjacency, cap: int | None = None, limit: int = 400) -> tuple[int, ...]:
    """Exact maximum independent set over ``vertices``.

    ``adjacency`` supplies pair statuses: a dict keyed by canonical pairs,
    or any object with an ``edge_status(u, v)`` method, or a callable
    ``(u, v) -> bool``.  Every inner pair must be answerable; a missing
    dict entry is a usage error.  With ``cap`` the search stops once an
    independent set of that size is found and returns one of exactly
    min(cap, optimum) vertices.  The returned set is the lexicographically
    smallest optimal one, as a sorted tuple of the original labels.
    """
    verts = sorted(vertices)
    k = len(verts)
    if len(set(verts)) != k:
        raise UsageError("duplicate vertices in mis_bruteforce input")
    if k > limit:
        raise LimitExceeded(f"{k} vertices exceed the configured limit {limit}")
    if k == 0:
        return ()
    if cap is not None and cap <= 0:
        return ()

    if isinstance(adjacency, dict):
        def status(u, v):
            pair = canonical_pair(u, v)
            try:
                return adjacency[pair]
            except KeyError:
                raise UsageError(f"unknown pair status for {pair}") from None
    elif hasattr(adjacency, "edge_status"):
        status = adjacency.edge_status
    elif callable(adjacency):
        status = adjacency
    else:
        raise UsageError("adjacency must be a dict, an edge_status object, or a callable")

    adj = [0] * k
    for i in range(k):
        for j in range(i + 1, k):
            if status(verts[i], verts[j]):
                adj[i] |= 1 << j
                adj[j] |= 1 << i
    full = (1 << k) - 1
    compat = [full & ~adj[v] & ~(1 << v) for v in range(k)]

    size = _max_iset_size(k, adj, compat, stop_at=cap)
    found = _lex_first_iset(k, adj, compat, size)
    return tuple(verts[i] for i in sorted(found))
