"""Weak separation oracle with a move-to-front vertex cache.

A weak separation query either produces a vertex improving on the current
point by more than phi/alpha (a *positive* answer, possibly served straight
from the cache without touching the exact LMO), or falls back to one exact
LMO call and certifies that no vertex improves by more than phi (a
*negative* answer whose vertex is the exact minimizer of <c, .>).
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .regions import Vertex
from .trace import Counters


class VertexCache:
    """Ordered vertex store: scan front-to-back, move hits to the front.

    Eviction drops the back entry once ``capacity`` is exceeded; capacity 0
    disables caching entirely (every query falls through to the exact LMO).
    """

    def __init__(self, capacity=512):
        if capacity < 0:
            raise ValueError("cache capacity must be >= 0")
        self.capacity = capacity
        self._entries = []          # list of Vertex, front first
        self._matrix = None         # stacked points, rebuilt lazily

    def __len__(self):
        return len(self._entries)

    @property
    def entries(self):
        return list(self._entries)

    def _points(self):
        if self._matrix is None and self._entries:
            self._matrix = np.stack([v.point for v in self._entries])
        return self._matrix

    def scan(self, c, cx, threshold) -> Optional[int]:
        """Index of the first entry y with cx - <c, y> > threshold, else None."""
        if not self._entries:
            return None
        scores = self._points() @ c
        hits = np.nonzero(cx - scores > threshold)[0]
        return int(hits[0]) if len(hits) else None

    def get(self, idx) -> Vertex:
        return self._entries[idx]

    def move_to_front(self, idx):
        if idx != 0:
            self._entries.insert(0, self._entries.pop(idx))
            self._matrix = None

    def insert(self, vertex: Vertex):
        if self.capacity == 0:
            return
        for i, v in enumerate(self._entries):
            if v.id == vertex.id:
                self.move_to_front(i)
                return
        self._entries.insert(0, vertex)
        if len(self._entries) > self.capacity:
            self._entries.pop()
        self._matrix = None


@dataclass(frozen=True)
class OracleResponse:
    """positive=True: vertex improves by more than phi/alpha.

    positive=False: vertex is the exact minimizer of <c, .> and ``gap`` =
    max_z <c, x - z> <= phi/alpha.
    """

    positive: bool
    vertex: Vertex
    gap: Optional[float] = None


def weak_separation(cache, region, c, x, phi, alpha, counters=None,
                    exact_hint=None) -> OracleResponse:
    """One weak separation query.

    Parameters
    ----------
    cache : VertexCache
    region : Region
    c : ndarray
        Linear objective (gradient) of the query.
    x : ndarray
        Current point; must lie in the region.
    phi : float
        Target improvement, > 0.
    alpha : float
        Relaxation factor >= 1; positives only need to beat phi/alpha.
    counters : Counters, optional
        Incrementing weak_sep_calls, cache_hits/misses and exact_lmo_calls.
    exact_hint : (Vertex, float), optional
        The exact minimizer of <c, .> and its gap max_z <c, x - z>, when the
        caller already holds them for this very (c, x) query (e.g. from the
        opening gap computation, or from a previous negative answer at the
        same iterate).  Serves the fallback without repeating the LMO call;
        the response is identical to what the fresh call would return.
    """
    if phi <= 0:
        raise ValueError("phi must be positive, got %r" % (phi,))
    if alpha < 1:
        raise ValueError("alpha must be >= 1, got %r" % (alpha,))
    if counters is None:
        counters = Counters()
    counters.weak_sep_calls += 1
    threshold = phi / alpha
    cx = float(c @ x)
    idx = cache.scan(c, cx, threshold)
    if idx is not None:
        counters.cache_hits += 1
        cache.move_to_front(idx)
        return OracleResponse(True, cache.get(0))
    counters.cache_misses += 1
    if exact_hint is not None:
        v, gap = exact_hint
    else:
        v = region.lmo(c)
        counters.exact_lmo_calls += 1
        gap = cx - float(c @ v.point)
    if gap > threshold:
        cache.insert(v)
        return OracleResponse(True, v)
    return OracleResponse(False, v, gap)


def initial_gap(region, grad, u1, cache=None, counters=None):
    """Exact starting gap max_u <grad, u1 - u>, seeding the cache with the minimizer."""
    if counters is None:
        counters = Counters()
    v = region.lmo(grad)
    counters.exact_lmo_calls += 1
    phi0 = float(grad @ (u1 - v.point))
    if cache is not None:
        cache.insert(v)
    return phi0, v
