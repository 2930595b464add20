"""Lazy, order-independent G(n,p) edge source and the shared log-scale parameters.

A :class:`GnpSource` never materializes a graph.  The status of a vertex
pair is a pure function of (seed, stream, canonical pair), so any worker
can query any pair at any time and all answers agree.  Distinct stream
labels on the same seed give independent resamples of the whole edge
family, which is what the correlated-copy constructions in
:mod:`iset_lab.ogp` rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, UsageError
from .prf import GOLDEN, MASK64, prf64_array, probability_threshold, stream_base

Pair = tuple[int, int]

# slack absorbing float noise before the explicit ceil/floor at use sites
_ROUND_SLACK = 1e-9


def canonical_pair(u: int, v: int) -> Pair:
    """Canonical vertex pair: endpoints sorted ascending, u != v required."""
    if u == v:
        raise UsageError(f"pair endpoints must differ, got ({u}, {v})")
    return (u, v) if u < v else (v, u)


def iceil(x: float) -> int:
    """Ceiling with a small slack so 9.0000000000001 still rounds to 9."""
    return math.ceil(x - _ROUND_SLACK)


def ifloor(x: float) -> int:
    """Floor with a small slack so 8.9999999999999 still rounds to 9."""
    return math.floor(x + _ROUND_SLACK)


def _pair_counter(u: int, v: int) -> int:
    # injective packing of a canonical pair into 64 bits (n < 2**32)
    return (u << 32) | v


@dataclass(frozen=True)
class GnpSource:
    """Seeded, stateless edge oracle for the binomial random graph G(n, p).

    Each canonical pair {u, v} is Present independently with probability
    ``p``: Present iff PRF64(seed, stream, pair) < floor(p * 2**64).  The
    strict inequality makes p = 0 exactly edge-free and p = 1 complete.
    """

    n: int
    p: float
    seed: int
    stream: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise UsageError(f"vertex count must be >= 1, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise DomainError(f"edge probability must lie in [0, 1], got {self.p}")
        object.__setattr__(self, "_base", stream_base(self.seed, self.stream))
        object.__setattr__(self, "_threshold", probability_threshold(self.p))

    def check_vertex(self, v: int) -> None:
        if not 0 <= v < self.n:
            raise UsageError(f"vertex index {v} out of range [0, {self.n})")

    def edge_status(self, u: int, v: int) -> bool:
        """True iff the pair {u, v} is an edge.  Order of u, v is irrelevant."""
        self.check_vertex(u)
        self.check_vertex(v)
        u, v = canonical_pair(u, v)
        z = (self._base + _pair_counter(u, v) * GOLDEN) & MASK64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        return (z ^ (z >> 31)) < self._threshold

    def edge_status_batch(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Vectorized ``edge_status`` over parallel index arrays."""
        us = np.asarray(us, dtype=np.uint64)
        vs = np.asarray(vs, dtype=np.uint64)
        if us.size and (int(us.max()) >= self.n or int(vs.max()) >= self.n):
            raise UsageError("vertex index out of range in batch query")
        if np.any(us == vs):
            raise UsageError("pair endpoints must differ in batch query")
        lo = np.minimum(us, vs)
        hi = np.maximum(us, vs)
        counters = (lo << np.uint64(32)) | hi
        return prf64_array(self._base, counters) < np.uint64(self._threshold)

    def with_stream(self, stream: int) -> "GnpSource":
        """Same seed, different stream: an independent resample of every pair."""
        return GnpSource(self.n, self.p, self.seed, stream)

    def is_independent(self, vertices) -> bool:
        """Audit helper: no edge among ``vertices`` (queries every inner pair)."""
        vs = sorted(vertices)
        for i, u in enumerate(vs):
            for v in vs[i + 1:]:
                if self.edge_status(u, v):
                    return False
        return True


def edge_status(source, pair: Pair) -> bool:
    """Functional form of :meth:`GnpSource.edge_status` on a canonical pair."""
    u, v = pair
    return source.edge_status(u, v)


@dataclass(frozen=True)
class LogParams:
    """Derived constants shared by the algorithm and tuple-counting labs.

    ``scale`` is log_base(n*p) with base = 1/(1-p): the size the plain
    greedy run reaches, and the unit in which every threshold below is
    expressed.  ``core_size`` = ceil(gamma * scale) is the critical
    partial-output size, ``budget_coeff * scale**2`` caps the future-query
    budget, ``tail_coeff`` drives the (np)^(-tail_coeff * scale) rarity
    bound, and ``copies`` is the number of coupled graph views.
    """

    n: int
    p: float
    eps: float
    base: float
    scale: float
    scale_ln: float
    gamma: float
    core_size: int
    budget_coeff: float
    tail_coeff: float
    copies: int


def log_params(n: int, p: float, eps: float) -> LogParams:
    """Compute :class:`LogParams` for an instance (n, p) at tolerance ``eps``.

    Requires 0 < p < 1, n*p > 1 and 0 < eps <= 1.  All logs are double
    precision; ``scale`` is stored unrounded and rounded only at use sites.
    """
    if not 0.0 < p < 1.0:
        raise DomainError(f"log_params needs 0 < p < 1, got p={p}")
    if n * p <= 1.0:
        raise DomainError(f"log_params needs n*p > 1, got n*p={n * p}")
    if not 0.0 < eps <= 1.0:
        raise DomainError(f"log_params needs 0 < eps <= 1, got eps={eps}")
    ln_b = -math.log1p(-p)
    scale_ln = math.log(n * p)
    scale = scale_ln / ln_b
    gamma = 1.0 - eps / 2.0
    return LogParams(
        n=n,
        p=p,
        eps=eps,
        base=1.0 / (1.0 - p),
        scale=scale,
        scale_ln=scale_ln,
        gamma=gamma,
        core_size=iceil(gamma * scale),
        budget_coeff=eps * eps / 8.0,
        tail_coeff=eps * eps / 64.0,
        copies=iceil(16.0 / (eps * eps)),
    )


# -log(1-p) <= 9p for p <= 1/2, which fixes the constant below
LOGB_BOUND_CONST = 1.0 / 9.0


def logb_lower_bound(n: int, p: float, d: float) -> float:
    """Closed-form lower bound on log_base(n*p) over the admissible p band.

    Returns ``LOGB_BOUND_CONST * log(d) / p``, valid whenever
    d/n <= p <= 1 - n**(-1/d) and d > 1.
    """
    if d <= 1.0:
        raise DomainError(f"need d > 1, got d={d}")
    if p < d / n:
        raise DomainError(f"p={p} violates the lower bound p >= d/n = {d / n}")
    upper = 1.0 - n ** (-1.0 / d)
    if p > upper:
        raise DomainError(f"p={p} violates the upper bound p <= 1 - n**(-1/d) = {upper}")
    return LOGB_BOUND_CONST * math.log(d) / p
