"""Ring configurations for the facilitated exclusion process.

A configuration lives on the discrete torus with N sites, labeled 1..N in
text form and 0..N-1 internally.  Site values are 0 (empty) or 1 (occupied).
The dynamics conserve the particle number k, and for k > N/2 the set of
configurations in which every empty site has both neighbors occupied forms
the unique irreducible component.  This module provides classification of
configurations, exact counting of that component and of its cylinder sets,
enumeration at small N, and the single-jump adjacency graph.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterator, Sequence

import numpy as np

# Exhaustive enumeration is intended for desk-scale checks only; the count
# grows like 2^N so we refuse above this size unless told otherwise.
ENUMERATION_CAP = 24


class ClassLabel(Enum):
    """Dynamical class of a configuration.

    ERGODIC: every hole isolated and k > N/2; the irreducible component.
    BLOCKED: every particle isolated; no jump has positive rate, frozen.
    TRANSIENT_GOOD: k > N/2 but not yet ergodic; absorbed into ERGODIC.
    TRANSIENT_BAD: k <= N/2 and not blocked; eventually freezes.
    """

    ERGODIC = "ergodic"
    BLOCKED = "blocked"
    TRANSIENT_GOOD = "transient_good"
    TRANSIENT_BAD = "transient_bad"


def as_occupancy(config) -> np.ndarray:
    """Coerce a configuration to a uint8 occupancy array.

    Accepts an ExclusionConfig, a '0'/'1' string (site 1 first), or any
    0/1 sequence.  Always returns a fresh C-contiguous array.
    """
    if isinstance(config, ExclusionConfig):
        return config.occ.copy()
    if isinstance(config, str):
        if not config or any(c not in "01" for c in config):
            raise ValueError("configuration string must be nonempty over '0'/'1'")
        return np.frombuffer(config.encode("ascii"), dtype=np.uint8) - ord("0")
    arr = np.array(config, dtype=np.uint8, copy=True, order="C")
    if arr.ndim != 1 or arr.size == 0:
        raise ValueError("configuration must be a nonempty 1-d sequence")
    if np.any(arr > 1):
        raise ValueError("occupancies must be 0 or 1")
    return arr


@dataclass(frozen=True)
class ExclusionConfig:
    """Occupancy state on the ring, hashable via its text form."""

    occ: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "occ", as_occupancy(self.occ))
        self.occ.setflags(write=False)

    @classmethod
    def from_string(cls, text: str) -> "ExclusionConfig":
        return cls(as_occupancy(text))

    def to_string(self) -> str:
        return "".join("1" if v else "0" for v in self.occ)

    @property
    def n_sites(self) -> int:
        return int(self.occ.size)

    @property
    def n_particles(self) -> int:
        return int(self.occ.sum())

    def classify(self) -> ClassLabel:
        return classify(self.occ)

    def __eq__(self, other) -> bool:
        return isinstance(other, ExclusionConfig) and np.array_equal(self.occ, other.occ)

    def __hash__(self) -> int:
        return hash(self.to_string())


def _has_adjacent(occ: np.ndarray, value: int) -> bool:
    # Adjacency wraps around; a pair (x, x+1) with both sites equal to value.
    same = occ == value
    return bool(np.any(same & np.roll(same, -1)))


def classify(config) -> ClassLabel:
    """Classify a configuration into its dynamical class.

    Conventions at the degenerate densities: the empty configuration is
    BLOCKED, the full one ERGODIC.
    """
    occ = as_occupancy(config)
    n = occ.size
    k = int(occ.sum())
    if k == 0:
        return ClassLabel.BLOCKED
    if k == n:
        return ClassLabel.ERGODIC
    if not _has_adjacent(occ, 0) and 2 * k > n:
        return ClassLabel.ERGODIC
    if not _has_adjacent(occ, 1):
        return ClassLabel.BLOCKED
    return ClassLabel.TRANSIENT_GOOD if 2 * k > n else ClassLabel.TRANSIENT_BAD


def count_hole_isolated(n_sites: int, k: int) -> int:
    """Exact number of k-particle ring configurations with every hole isolated.

    Equals binom(k, m) + binom(k-1, m-1) with m = n_sites - k, which also
    factors as (N/k) * binom(k, N-k).  For k > N/2 this is the size of the
    irreducible component; for smaller k it counts the same geometric
    constraint (nonzero only when holes can still be pairwise nonadjacent).
    Exact integer arithmetic at any size.
    """
    if n_sites < 1:
        raise ValueError("n_sites must be >= 1")
    if not 0 <= k <= n_sites:
        raise ValueError("k must lie in [0, n_sites]")
    m = n_sites - k
    total = math.comb(k, m)
    if k >= 1 and m >= 1:
        total += math.comb(k - 1, m - 1)
    return total


def _log_comb(a: int, b: int) -> float:
    if b < 0 or b > a:
        return -math.inf
    return math.lgamma(a + 1) - math.lgamma(b + 1) - math.lgamma(a - b + 1)


def log_count_hole_isolated(n_sites: int, k: int) -> float:
    """Natural log of count_hole_isolated, computed without big integers.

    Convenience for ratio work at sizes where the exact integers are
    unwieldy; returns -inf when the count is zero.
    """
    if n_sites < 1 or not 0 <= k <= n_sites:
        raise ValueError("need n_sites >= 1 and 0 <= k <= n_sites")
    m = n_sites - k
    t1 = _log_comb(k, m)
    t2 = _log_comb(k - 1, m - 1) if k >= 1 else -math.inf
    if t1 == -math.inf and t2 == -math.inf:
        return -math.inf
    hi = max(t1, t2)
    return hi + math.log(math.exp(t1 - hi) + math.exp(t2 - hi))


def count_with_window(n_sites: int, k: int, sigma: Sequence[int]) -> int:
    """Exact number of ergodic k-particle configurations extending a window.

    The window sigma occupies sites 1..len(sigma).  Requires k > N/2 (the
    formula counts cylinder sets of the irreducible component).  Rejects a
    window holding two adjacent holes; returns 0 when an admissible window
    cannot be extended.  Closed form: binom(k - p + sigma_1 + sigma_l - 1,
    m - z) where p and z count particles and holes in the window, m = N - k.
    """
    if not 2 * k > n_sites:
        raise ValueError("window counting requires k > n_sites / 2")
    win = as_occupancy(sigma)
    ell = win.size
    if ell > n_sites:
        raise ValueError("window longer than the ring")
    if ell >= 2 and _has_adjacent_linear(win, 0):
        raise ValueError("window contains adjacent holes")
    p = int(win.sum())
    z = ell - p
    m = n_sites - k
    if p > k or z > m:
        return 0
    if ell == n_sites:
        # Full ring: the window must be the configuration itself, and the
        # wrap-around pair (N, 1) must not be two holes.
        return int(p == k and (win[0] + win[-1] >= 1))
    top = k - p + int(win[0]) + int(win[-1]) - 1
    low = m - z
    if low < 0 or low > top:
        return 0
    return math.comb(top, low)


def _has_adjacent_linear(arr: np.ndarray, value: int) -> bool:
    same = arr == value
    return bool(np.any(same[:-1] & same[1:]))


def _nonadjacent_zero_sets(n_sites: int, m: int) -> Iterator[tuple[int, ...]]:
    """Yield all m-subsets of ring positions 0..N-1 with no two adjacent."""
    if m == 0:
        yield ()
        return
    if 2 * m > n_sites:
        return

    out: list[int] = []

    def rec(start: int, left: int, limit: int):
        if left == 0:
            yield tuple(out)
            return
        # Leave room for the remaining left-1 zeros, each needing 2 sites.
        for pos in range(start, limit - 2 * (left - 1)):
            out.append(pos)
            yield from rec(pos + 2, left - 1, limit)
            out.pop()

    # Case split on position 0 to respect the wrap-around constraint.
    # Zero at position 0: neighbors N-1 and 1 excluded.
    out.append(0)
    yield from rec(2, m - 1, n_sites - 1)
    out.pop()
    # No zero at position 0: zeros within 1..N-1, position N-1 allowed.
    yield from rec(1, m, n_sites)


def enumerate_ergodic(n_sites: int, k: int | None = None, cap: int = ENUMERATION_CAP) -> Iterator[np.ndarray]:
    """Yield every ergodic configuration, optionally at fixed particle number.

    With k=None, runs over all k > N/2.  Refuses n_sites above the cap to
    keep accidental exponential blowups out of library code.
    """
    if n_sites > cap:
        raise ValueError(f"enumeration capped at n_sites <= {cap} (got {n_sites})")
    ks = range(n_sites // 2 + 1, n_sites + 1) if k is None else [k]
    for kk in ks:
        if not 2 * kk > n_sites:
            raise ValueError("enumerate_ergodic requires k > n_sites / 2")
        m = n_sites - kk
        for zeros in _nonadjacent_zero_sets(n_sites, m):
            occ = np.ones(n_sites, dtype=np.uint8)
            for z in zeros:
                occ[z] = 0
            yield occ


@dataclass
class CanonicalEnsemble:
    """Uniform measure on the irreducible component at fixed (N, k)."""

    n_sites: int
    k: int

    def __post_init__(self):
        if not 2 * self.k > self.n_sites:
            raise ValueError("canonical ensemble requires k > n_sites / 2")

    def count(self) -> int:
        return count_hole_isolated(self.n_sites, self.k)

    def configurations(self) -> Iterator[np.ndarray]:
        return enumerate_ergodic(self.n_sites, self.k)

    def prob(self, config) -> float:
        occ = as_occupancy(config)
        if occ.size != self.n_sites or int(occ.sum()) != self.k:
            return 0.0
        if classify(occ) is not ClassLabel.ERGODIC:
            return 0.0
        return 1.0 / self.count()

    def window_count(self, sigma) -> int:
        return count_with_window(self.n_sites, self.k, sigma)

    def window_prob(self, sigma) -> float:
        return self.window_count(sigma) / self.count()


def active_moves(occ: np.ndarray) -> list[tuple[int, int]]:
    """All (site, direction) jumps with positive rate, 0-based sites.

    A particle at x jumps to x+1 when x-1 is occupied and x+1 empty, and to
    x-1 when x+1 is occupied and x-1 empty.  Each active move has rate 1.
    """
    n = occ.size
    moves = []
    for x in range(n):
        if occ[x]:
            left, right = occ[(x - 1) % n], occ[(x + 1) % n]
            if left and not right:
                moves.append((x, +1))
            if right and not left:
                moves.append((x, -1))
    return moves


@lru_cache(maxsize=32)
def _adjacency_cached(n_sites: int, k: int) -> tuple[tuple[str, ...], tuple[tuple[int, ...], ...]]:
    configs = [tuple(int(v) for v in occ) for occ in enumerate_ergodic(n_sites, k)]
    index = {c: i for i, c in enumerate(configs)}
    neighbors: list[tuple[int, ...]] = []
    for c in configs:
        occ = np.array(c, dtype=np.uint8)
        out = set()
        for x, d in active_moves(occ):
            y = (x + d) % n_sites
            nxt = list(c)
            nxt[x], nxt[y] = 0, 1
            out.add(index[tuple(nxt)])
        neighbors.append(tuple(sorted(out)))
    strings = tuple("".join(str(v) for v in c) for c in configs)
    return strings, tuple(neighbors)


def adjacency_graph(n_sites: int, k: int) -> tuple[list[str], list[tuple[int, ...]]]:
    """Single-jump graph on the irreducible component.

    Returns (configuration strings, neighbor index lists).  Every allowed
    jump is reversible, so the graph is undirected; connectivity of the
    component can be checked by breadth-first search.
    """
    strings, neighbors = _adjacency_cached(n_sites, k)
    return list(strings), list(neighbors)


def is_connected(n_sites: int, k: int) -> bool:
    """Breadth-first connectivity of the single-jump graph."""
    strings, neighbors = adjacency_graph(n_sites, k)
    if not strings:
        return True
    seen = {0}
    queue = [0]
    while queue:
        cur = queue.pop()
        for nxt in neighbors[cur]:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return len(seen) == len(strings)
