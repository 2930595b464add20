"""Enforcing harness for the online revelation protocol.

A run proceeds in n strict rounds of select -> query -> decide.  Selecting
a vertex reveals its status against every previously inspected vertex;
future queries reveal arbitrary extra pairs and are charged to the
query set regardless of whether they were already revealed.  The decide
step may only add the current vertex when no revealed edge joins it to
the set built so far, and the final budget counts exactly the queried
pairs whose both endpoints ended up in the output set.

The harness materializes every revelation, so memory grows with the
square of the round count.  It is meant for auditing and for small and
medium instances; the direct runners in :mod:`iset_lab.algorithms`
reproduce its semantics at large n without the bookkeeping.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

from .errors import InvariantBreach, ProtocolViolation, UsageError
from .gnp import GnpSource, Pair, canonical_pair

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class RunResult:
    """Outcome of one complete online run.

    ``budget`` is the exact number of queried pairs inside the final set.
    ``include_rounds`` lists the 1-based rounds at which a vertex was
    added, which is the full size trajectory in compressed form.
    ``extras`` carries algorithm-specific trace fields (phase sizes,
    degenerate-run flags, ...).
    """

    final_set: tuple[int, ...]
    budget: int
    rounds: int
    include_rounds: tuple[int, ...] = ()
    digest: str | None = None
    extras: dict = field(default_factory=dict)

    @property
    def size(self) -> int:
        return len(self.final_set)

    def size_at(self, t: int) -> int:
        """|chosen set| after round t (0 <= t <= rounds)."""
        from bisect import bisect_right

        return bisect_right(self.include_rounds, t)


class Transcript:
    """Full record of an online run against a :class:`GnpSource`."""

    def __init__(self, source: GnpSource):
        self.source = source
        self.round = 0                      # completed rounds
        self.inspected: list[int] = []      # vertices in selection order
        self.queried: set[Pair] = set()     # union of all submitted query sets
        self.revealed: dict[Pair, bool] = {}
        self.chosen: set[int] = set()       # independent set under construction
        self.decisions: list[tuple[int, int, bool, bool]] = []  # (round, vertex, include, added)
        self.events: list[dict] = [
            {
                "type": "begin",
                "schema": SCHEMA_VERSION,
                "n": source.n,
                "p": source.p,
                "seed": source.seed,
                "stream": source.stream,
            }
        ]
        self._inspected_set: set[int] = set()
        self._current: int | None = None    # vertex of the active round
        self._finalized = False

    def _check_open(self):
        if self._finalized:
            raise ProtocolViolation("transcript is finalized")

    # -- protocol steps ------------------------------------------------

    def select_vertex(self, v: int) -> list[tuple[Pair, bool]]:
        """Open round ``round+1`` by inspecting ``v``.

        Reveals every so-far-unrevealed pair {v, u} with u previously
        inspected and returns just those newly revealed pairs.
        """
        self._check_open()
        if self._current is not None:
            raise ProtocolViolation("select_vertex called twice in one round")
        self.source.check_vertex(v)
        if v in self._inspected_set:
            raise ProtocolViolation(f"vertex {v} was already inspected")
        reveals = []
        for u in self.inspected:
            pair = canonical_pair(u, v)
            if pair not in self.revealed:
                status = self.source.edge_status(*pair)
                self.revealed[pair] = status
                reveals.append((pair, status))
        self.inspected.append(v)
        self._inspected_set.add(v)
        self._current = v
        self.events.append(
            {
                "type": "select",
                "round": self.round + 1,
                "vertex": v,
                "reveals": [[u, w, int(s)] for (u, w), s in reveals],
            }
        )
        return reveals

    def query_future(self, pairs) -> list[tuple[Pair, bool]]:
        """Submit a query set for the active round.

        Every submitted pair joins the cumulative query set, revealed or
        not; only newly revealed pairs are returned.  May be called more
        than once per round (the submissions union into one set).
        """
        self._check_open()
        if self._current is None:
            raise ProtocolViolation("query_future requires an active select_vertex")
        canon: list[Pair] = []
        for pair in pairs:
            u, v = pair
            self.source.check_vertex(u)
            self.source.check_vertex(v)
            canon.append(canonical_pair(u, v))
        reveals = []
        for pair in canon:
            self.queried.add(pair)
            if pair not in self.revealed:
                status = self.source.edge_status(*pair)
                self.revealed[pair] = status
                reveals.append((pair, status))
        self.events.append(
            {
                "type": "query",
                "round": self.round + 1,
                "pairs": [[u, w] for u, w in canon],
                "reveals": [[u, w, int(s)] for (u, w), s in reveals],
            }
        )
        return reveals

    def decide(self, include: bool) -> "Transcript":
        """Close the active round, adding the current vertex iff ``include``.

        Including a vertex with a revealed neighbor already in the set is
        a protocol violation: the partial output must stay independent.
        """
        self._check_open()
        if self._current is None:
            raise ProtocolViolation("decide requires an active select_vertex")
        v = self._current
        added = False
        if include:
            for u in self.chosen:
                if self.revealed.get(canonical_pair(u, v)):
                    raise ProtocolViolation(
                        f"cannot include vertex {v}: revealed edge to chosen vertex {u}"
                    )
            self.chosen.add(v)
            added = True
        self.round += 1
        self._current = None
        self.decisions.append((self.round, v, bool(include), added))
        self.events.append(
            {"type": "decide", "round": self.round, "include": bool(include), "added": added}
        )
        return self

    def finalize(self) -> RunResult:
        """Close the run after all n rounds; audits and reports the budget."""
        self._check_open()
        if self._current is not None:
            raise ProtocolViolation("finalize called with an unfinished round")
        if self.round != self.source.n:
            raise ProtocolViolation(
                f"finalize requires all {self.source.n} rounds, only {self.round} completed"
            )
        budget = self.budget_so_far()
        # audit against the full source, including pairs never revealed
        if not self.source.is_independent(self.chosen):
            raise InvariantBreach("final set is not independent in the underlying graph")
        final = tuple(sorted(self.chosen))
        self.events.append(
            {"type": "finalize", "final_set": list(final), "budget": budget, "rounds": self.round}
        )
        self._finalized = True
        include_rounds = tuple(r for r, _, _, added in self.decisions if added)
        return RunResult(
            final_set=final,
            budget=budget,
            rounds=self.round,
            include_rounds=include_rounds,
            digest=self.digest(),
        )

    # -- views and exports ----------------------------------------------

    @property
    def current_vertex(self) -> int | None:
        return self._current

    def has_revealed_neighbor_in_chosen(self, v: int) -> bool:
        return any(self.revealed.get(canonical_pair(u, v)) for u in self.chosen)

    def budget_so_far(self) -> int:
        """|queried pairs with both endpoints currently chosen|."""
        return sum(1 for u, v in self.queried if u in self.chosen and v in self.chosen)

    def queried_through(self, t: int) -> set[Pair]:
        """Union of the query sets submitted in rounds 1..t."""
        pairs: set[Pair] = set()
        for event in self.events:
            if event["type"] == "query" and event["round"] <= t:
                pairs.update(tuple(p) for p in event["pairs"])
        return pairs

    def expected_revealed_keys(self) -> set[Pair]:
        """(inspected choose 2) union queried: what ``revealed`` must equal."""
        keys = set(self.queried)
        for i, u in enumerate(self.inspected):
            for v in self.inspected[i + 1:]:
                keys.add(canonical_pair(u, v))
        return keys

    def to_jsonl(self) -> str:
        """One JSON event per line: begin/select/query/decide/finalize."""
        return "\n".join(json.dumps(e, separators=(",", ":")) for e in self.events) + "\n"

    def write_jsonl(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_jsonl())

    def digest(self) -> str:
        return hashlib.sha256(self.to_jsonl().encode()).hexdigest()


def begin_run(source: GnpSource) -> Transcript:
    """Start an online run: round 0, every set empty."""
    return Transcript(source)


def select_vertex(tr: Transcript, v: int):
    return tr.select_vertex(v)


def query_future(tr: Transcript, pairs):
    return tr.query_future(pairs)


def decide(tr: Transcript, include: bool) -> Transcript:
    return tr.decide(include)


def finalize(tr: Transcript) -> RunResult:
    return tr.finalize()


def run_policy(source: GnpSource, policy) -> tuple[RunResult, Transcript]:
    """Drive a policy through the enforcing harness for all n rounds.

    A policy supplies three callbacks, each receiving the live transcript:
    ``choose_vertex(tr)``, ``future_pairs(tr)`` (may return an empty
    iterable) and ``include(tr)``.
    """
    tr = begin_run(source)
    for _ in range(source.n):
        tr.select_vertex(policy.choose_vertex(tr))
        pairs = policy.future_pairs(tr)
        if pairs:
            tr.query_future(pairs)
        tr.decide(policy.include(tr))
    return tr.finalize(), tr


def replay_jsonl(lines, source: GnpSource | None = None) -> tuple[RunResult, Transcript]:
    """Re-execute an exported transcript and verify every recorded reveal.

    ``lines`` is an iterable of JSONL strings (or one big string).  When
    ``source`` is omitted it is rebuilt from the begin event.  Any
    mismatch between recorded and recomputed statuses, decisions or the
    final budget raises :class:`InvariantBreach`.
    """
    if isinstance(lines, str):
        lines = lines.strip().split("\n")
    events = [json.loads(line) for line in lines if line.strip()]
    if not events or events[0].get("type") != "begin":
        raise UsageError("transcript must start with a begin event")
    head = events[0]
    if head.get("schema") != SCHEMA_VERSION:
        raise UsageError(f"unsupported transcript schema {head.get('schema')}")
    if source is None:
        source = GnpSource(head["n"], head["p"], head["seed"], head["stream"])
    tr = begin_run(source)
    result = None
    for event in events[1:]:
        kind = event["type"]
        if kind == "select":
            reveals = tr.select_vertex(event["vertex"])
            recorded = [((u, w), bool(s)) for u, w, s in event["reveals"]]
            if reveals != recorded:
                raise InvariantBreach(f"select reveals diverge at round {event['round']}")
        elif kind == "query":
            reveals = tr.query_future([tuple(p) for p in event["pairs"]])
            recorded = [((u, w), bool(s)) for u, w, s in event["reveals"]]
            if reveals != recorded:
                raise InvariantBreach(f"query reveals diverge at round {event['round']}")
        elif kind == "decide":
            tr.decide(event["include"])
            if tr.decisions[-1][3] != event["added"]:
                raise InvariantBreach(f"decision diverges at round {event['round']}")
        elif kind == "finalize":
            result = tr.finalize()
            if list(result.final_set) != event["final_set"] or result.budget != event["budget"]:
                raise InvariantBreach("finalize diverges from the recorded run")
        else:
            raise UsageError(f"unknown event type {kind!r}")
    if result is None:
        raise UsageError("transcript has no finalize event")
    return result, tr
