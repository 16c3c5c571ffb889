"""Invariant measures for the facilitated exclusion process.

Three families, all tied to a density rho in (1/2, 1):

* translation-invariant grand-canonical weights for local windows, with two
  algebraically equivalent closed forms that are kept separate so they can
  cross-check each other;
* the canonical (uniform) measure on the irreducible component at fixed
  (N, k), with an exact sequential sampler;
* the ring version of the grand-canonical measure, a rotation average of
  window weights conditioned on the ergodic set.

Windows are 0/1 arrays; a window is admissible when it contains no two
adjacent holes (its boundary sites are unconstrained).  Degenerate
densities (rho = 1 point mass, rho <= 1/2 alternating mixture) are exposed
as separate constructors rather than special cases of the generic formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterator

import numpy as np

from .lattice import (
    ClassLabel,
    active_moves,
    as_occupancy,
    classify,
    count_hole_isolated,
    count_with_window,
)

WINDOW_ENUMERATION_CAP = 25  # box sizes above this are refused


@dataclass(frozen=True)
class GcmParams:
    """Constants of the product-form window weight at density rho.

    kappa * gamma equals rho and alpha * beta equals the stationary flux
    (2 rho - 1) / rho; both identities are useful invariants.
    """

    rho: float
    kappa: float = field(init=False)
    alpha: float = field(init=False)
    beta: float = field(init=False)
    gamma: float = field(init=False)

    def __post_init__(self):
        r = self.rho
        if not 0.5 < r < 1.0:
            raise ValueError("GcmParams requires 1/2 < rho < 1")
        object.__setattr__(self, "kappa", 2 * r - 1)
        object.__setattr__(self, "alpha", (2 * r - 1) ** 2 / (r * (1 - r)))
        object.__setattr__(self, "beta", (1 - r) / (2 * r - 1))
        object.__setattr__(self, "gamma", r / (2 * r - 1))


def window_is_admissible(sigma: np.ndarray) -> bool:
    """True when no two adjacent interior holes occur (boundaries free)."""
    if sigma.size < 2:
        return True
    empty = sigma == 0
    return not bool(np.any(empty[:-1] & empty[1:]))


def gcm_window_prob(rho: float, sigma, variant: str = "boundary") -> float:
    """Grand-canonical probability of a window at sites 1..len(sigma).

    variant="boundary" uses kappa * alpha^p * beta^l * gamma^(s1+sl);
    variant="density" uses the equivalent form written in terms of
    (1-rho)/rho and (2rho-1)/rho powers.  Both must agree to near machine
    precision; keeping them separate makes that an executable check.
    """
    win = as_occupancy(sigma)
    if not 0.5 < rho < 1.0:
        raise ValueError("gcm_window_prob requires 1/2 < rho < 1")
    if not window_is_admissible(win):
        return 0.0
    ell = win.size
    p = int(win.sum())
    ends = int(win[0]) + int(win[-1])
    if variant == "boundary":
        g = GcmParams(rho)
        return g.kappa * g.alpha**p * g.beta**ell * g.gamma**ends
    if variant == "density":
        hole_ratio = (1 - rho) / rho
        flux = (2 * rho - 1) / rho
        return (1 - rho) * hole_ratio ** (ell - 1 - p) * flux ** (2 * p - ell + 1 - ends)
    raise ValueError(f"unknown variant {variant!r}")


def degenerate_full_window_prob(sigma) -> float:
    """Window law at rho = 1: point mass on the fully occupied ring."""
    win = as_occupancy(sigma)
    return 1.0 if int(win.sum()) == win.size else 0.0


def degenerate_alternating_window_prob(sigma) -> float:
    """Window law at rho <= 1/2: even mixture of the two alternating states.

    One component occupies odd sites, the other even sites (site 1 is odd).
    """
    win = as_occupancy(sigma)
    idx = np.arange(1, win.size + 1)
    odd = (idx % 2).astype(np.uint8)
    hit = int(np.array_equal(win, odd)) + int(np.array_equal(win, 1 - odd))
    return 0.5 * hit


def enumerate_windows(ell: int) -> Iterator[np.ndarray]:
    """All admissible windows of a given length (no two adjacent holes)."""
    if ell < 1:
        raise ValueError("window length must be >= 1")
    if ell > WINDOW_ENUMERATION_CAP:
        raise ValueError(f"window enumeration capped at {WINDOW_ENUMERATION_CAP}")
    stack = [(1,), (0,)]
    while stack:
        prefix = stack.pop()
        if len(prefix) == ell:
            yield np.array(prefix, dtype=np.uint8)
            continue
        stack.append(prefix + (1,))
        if prefix[-1] == 1:
            stack.append(prefix + (0,))


def gcm_h_mean(rho: float) -> float:
    """Stationary mean of the local flux observable, max(0, (2 rho - 1) / rho).

    Valid on [0, 1]; identically zero at and below density 1/2.
    """
    if not 0.0 <= rho <= 1.0:
        raise ValueError("density must lie in [0, 1]")
    if rho <= 0.5:
        return 0.0
    return (2 * rho - 1) / rho


def two_point(rho: float, ell: int, method: str = "closed") -> float:
    """P(site 0 and site ell both occupied) under the grand-canonical law.

    method="closed" evaluates rho^2 + (2 rho - 1 - rho^2) (1 - 1/rho)^(l-1);
    method="window_sum" sums gcm_window_prob over all admissible windows of
    length ell + 1 with occupied endpoints (an independent, slower route).
    """
    if ell < 1:
        raise ValueError("separation must be >= 1")
    if method == "closed":
        p1 = 2 * rho - 1
        return rho**2 + (p1 - rho**2) * (1 - 1 / rho) ** (ell - 1)
    if method == "window_sum":
        total = 0.0
        for win in enumerate_windows(ell + 1):
            if win[0] == 1 and win[-1] == 1:
                total += gcm_window_prob(rho, win)
        return total
    raise ValueError(f"unknown method {method!r}")


def sample_gcm_window(rho: float, ell: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw windows of length ell from the grand-canonical law.

    The window marginal is a two-state Markov chain: the first site is
    Bernoulli(rho), an occupied site stays occupied with probability
    (2 rho - 1) / rho, and a hole is always followed by a particle.
    Returns a (size, ell) uint8 array.
    """
    if not 0.5 < rho < 1.0:
        raise ValueError("sample_gcm_window requires 1/2 < rho < 1")
    if ell < 1 or size < 1:
        raise ValueError("ell and size must be >= 1")
    out = np.empty((size, ell), dtype=np.uint8)
    stay = (2 * rho - 1) / rho
    out[:, 0] = rng.random(size) < rho
    for i in range(1, ell):
        prev = out[:, i - 1]
        out[:, i] = np.where(prev == 1, rng.random(size) < stay, 1)
    return out


@lru_cache(maxsize=8)
def _canonical_conditionals(n_sites: int, k: int) -> np.ndarray:
    """P(site i+1 occupied | prefix state) for the uniform component measure.

    Computed backward from exact big-integer completion counts.  The state
    after i sites is (particles placed, first bit, current bit); the table
    has shape (n_sites, k + 1, 2, 2), entry [i] deciding site i + 1
    (1-based), with [0] storing P(site 1 occupied) broadcast over states.
    """
    # cnt[p][f][c] = completions of an i-site prefix into a valid ring.
    nxt = [[[0, 0] for _ in range(2)] for _ in range(k + 1)]
    for p in range(k + 1):
        for f in range(2):
            for c in range(2):
                nxt[p][f][c] = int(p == k and f + c >= 1)
    table = np.zeros((n_sites, k + 1, 2, 2), dtype=np.float64)
    for i in range(n_sites - 1, 0, -1):
        cur = [[[0, 0] for _ in range(2)] for _ in range(k + 1)]
        for p in range(min(i, k) + 1):
            for f in range(2):
                for c in range(2):
                    w1 = nxt[p + 1][f][1] if p + 1 <= k else 0
                    w0 = nxt[p][f][0] if c == 1 else 0
                    tot = w1 + w0
                    cur[p][f][c] = tot
                    if tot:
                        table[i, p, f, c] = w1 / tot
        nxt = cur
    w1 = nxt[1][1][1] if k >= 1 else 0
    w0 = nxt[0][0][0]
    total = w1 + w0
    if total != count_hole_isolated(n_sites, k):
        raise AssertionError("completion count does not match the closed form")
    table[0, :, :, :] = w1 / total
    return table


def canonical_sample(n_sites: int, k: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Exact uniform samples from the irreducible component at (N, k).

    Sequential conditional sampling: each site is drawn from its exact
    conditional given the prefix, derived from cylinder counts, so no
    rejection is involved.  Requires k > N/2.  Returns (size, N) uint8.
    """
    if not 2 * k > n_sites:
        raise ValueError("canonical_sample requires k > n_sites / 2")
    if size < 1:
        raise ValueError("size must be >= 1")
    table = _canonical_conditionals(n_sites, k)
    out = np.empty((size, n_sites), dtype=np.uint8)
    first = (rng.random(size) < table[0, 0, 0, 0]).astype(np.uint8)
    out[:, 0] = first
    p = first.astype(np.intp)
    cur = first.astype(np.intp)
    f = first.astype(np.intp)
    for i in range(1, n_sites):
        prob = table[i, p, f, cur]
        bit = (rng.random(size) < prob).astype(np.uint8)
        out[:, i] = bit
        p = p + bit
        cur = bit.astype(np.intp)
    return out


def _nonadjacent_zero_sets_linear(length: int, m: int) -> Iterator[tuple[int, ...]]:
    """All m-subsets of 0..length-1 with no two adjacent (open boundary)."""
    out: list[int] = []

    def rec(start: int, left: int):
        if left == 0:
            yield tuple(out)
            return
        for pos in range(start, length - 2 * (left - 1)):
            out.append(pos)
            yield from rec(pos + 2, left - 1)
            out.pop()

    yield from rec(0, m)


@dataclass
class ConditionedWindow:
    """Grand-canonical law on a centered box conditioned on its particle count.

    The box has half-width ell (2 ell + 1 sites, centered at 0).  On the
    hyperplane with j particles the bulk factors cancel and only the
    boundary weight gamma^(sigma(-ell) + sigma(ell)) survives, normalized
    over all admissible box configurations with j particles.
    """

    rho: float
    ell: int
    j: int

    def __post_init__(self):
        self._length = 2 * self.ell + 1
        if self._length > WINDOW_ENUMERATION_CAP:
            raise ValueError(f"box enumeration capped at {WINDOW_ENUMERATION_CAP} sites")
        if not self.ell <= self.j <= self._length:
            raise ValueError("particle count incompatible with an admissible box")
        self._gamma = GcmParams(self.rho).gamma
        self._normalizer, self._occ_sums = self._enumerate()
        if self._normalizer <= 0:
            raise ValueError("empty hyperplane")

    def _enumerate(self) -> tuple[float, np.ndarray]:
        length, m, g = self._length, self._length - self.j, self._gamma
        total = 0.0
        occ = np.zeros(length, dtype=np.float64)
        for zeros in _nonadjacent_zero_sets_linear(length, m):
            ends = 2 - (0 in zeros) - (length - 1 in zeros)
            w = g**ends
            total += w
            occ += w
            for z in zeros:
                occ[z] -= w
        return total, occ

    @property
    def density(self) -> float:
        return self.j / self._length

    def prob(self, sigma) -> float:
        win = as_occupancy(sigma)
        if win.size != self._length:
            raise ValueError("configuration does not match the box size")
        if int(win.sum()) != self.j or not window_is_admissible(win):
            return 0.0
        ends = int(win[0]) + int(win[-1])
        return self._gamma**ends / self._normalizer

    def occupancy(self, x: int) -> float:
        """P(site x occupied), x counted from the box center."""
        if abs(x) > self.ell:
            raise ValueError("site outside the box")
        return self._occ_sums[x + self.ell] / self._normalizer

    def expect(self, f: Callable[[np.ndarray], float]) -> float:
        """Expectation of f(box configuration), by full enumeration."""
        length, m, g = self._length, self._length - self.j, self._gamma
        acc = 0.0
        for zeros in _nonadjacent_zero_sets_linear(length, m):
            win = np.ones(length, dtype=np.uint8)
            for z in zeros:
                win[z] = 0
            acc += g ** (int(win[0]) + int(win[-1])) * f(win)
        return acc / self._normalizer


def conditioned_window_prob(rho: float, ell: int, j: int, sigma) -> float:
    """Probability of a full box configuration under ConditionedWindow.

    Strict variant: a configuration off the hyperplane (wrong particle
    count or adjacent holes) is rejected rather than given mass zero.
    """
    win = as_occupancy(sigma)
    if int(win.sum()) != j:
        raise ValueError("configuration does not carry j particles")
    if not window_is_admissible(win):
        raise ValueError("configuration has adjacent holes")
    return ConditionedWindow(rho, ell, j).prob(win)


class PeriodicGcm:
    """Grand-canonical measure wrapped on the N-ring.

    The unnormalized weight of a ring configuration is the average over all
    N rotations of the window weight of the rotated string; the measure
    itself conditions that weight on the ergodic set.  Restricted to a fixed
    particle number it reduces to the uniform canonical measure.
    """

    def __init__(self, n_sites: int, rho: float):
        if n_sites < 3:
            raise ValueError("ring measure needs at least 3 sites")
        GcmParams(rho)  # validates the density range
        self.n_sites = n_sites
        self.rho = rho
        self._mass: float | None = None

    def unnormalized(self, eta) -> float:
        occ = as_occupancy(eta)
        if occ.size != self.n_sites:
            raise ValueError("configuration size mismatch")
        n = self.n_sites
        total = 0.0
        for x in range(n):
            total += gcm_window_prob(self.rho, np.roll(occ, -x))
        return total / n

    def ergodic_mass(self) -> float:
        """Exact total unnormalized weight of the ergodic set, by summation.

        On the ergodic set the rotation sum collapses: with k particles and
        m = N - k holes there are exactly k - m occupied bonds and 2 m mixed
        bonds, so each configuration at fixed k carries the same weight.
        """
        if self._mass is None:
            g = GcmParams(self.rho)
            n = self.n_sites
            total = 0.0
            for k in range(n // 2 + 1, n + 1):
                m = n - k
                per_config = (
                    g.kappa
                    * g.alpha**k
                    * g.beta**n
                    * ((k - m) * g.gamma**2 + 2 * m * g.gamma)
                    / n
                )
                total += count_hole_isolated(n, k) * per_config
            self._mass = total
        return self._mass

    def ergodic_mass_limit(self) -> float:
        """Large-N limit of the ergodic-set weight, rho (2 - rho)."""
        return self.rho * (2 - self.rho)

    def prob(self, eta) -> float:
        occ = as_occupancy(eta)
        if classify(occ) is not ClassLabel.ERGODIC:
            return 0.0
        return self.unnormalized(occ) / self.ergodic_mass()


def periodic_gcm_prob(rho: float, eta) -> float:
    """Probability of a ring configuration under the wrapped measure."""
    occ = as_occupancy(eta)
    return PeriodicGcm(occ.size, rho).prob(occ)


def ergodic_set_mass(rho: float, n_sites: int) -> float:
    """Unnormalized weight of the ergodic set at (rho, N), exact summation."""
    return PeriodicGcm(n_sites, rho).ergodic_mass()


def ergodic_set_mass_limit(rho: float) -> float:
    """Limit of ergodic_set_mass as N grows, rho (2 - rho) > 3/4."""
    if not 0.5 < rho < 1.0:
        raise ValueError("limit stated for 1/2 < rho < 1")
    return rho * (2 - rho)


@dataclass
class DegeneratePeriodicGcm:
    """Ring measure at rho <= 1/2: the alternating mixture.

    For even N, an even mixture of the two perfectly alternating states
    (both frozen).  For odd N, uniform over the N configurations with
    (N+1)/2 particles and all holes isolated.
    """

    n_sites: int

    def prob(self, eta) -> float:
        occ = as_occupancy(eta)
        n = self.n_sites
        if occ.size != n:
            raise ValueError("configuration size mismatch")
        if n % 2 == 0:
            idx = np.arange(1, n + 1)
            odd = (idx % 2).astype(np.uint8)
            hit = int(np.array_equal(occ, odd)) + int(np.array_equal(occ, 1 - odd))
            return 0.5 * hit
        k = (n + 1) // 2
        if int(occ.sum()) != k or classify(occ) is not ClassLabel.ERGODIC:
            return 0.0
        return 1.0 / count_hole_isolated(n, k)


@dataclass
class ProfileSampler:
    """Independent Bernoulli occupancies following a macroscopic profile.

    Site x (1-based) is occupied with probability rho0(x / N).  The profile
    must map into (1/2, 1] so the sampled configurations carry supercritical
    density; pass enforce_range=False for exploratory runs outside it.
    """

    profile: Callable[[float], float]
    n_sites: int
    enforce_range: bool = True

    def __post_init__(self):
        u = (np.arange(1, self.n_sites + 1)) / self.n_sites
        vals = np.array([float(self.profile(x)) for x in u])
        if self.enforce_range and (np.any(vals <= 0.5) or np.any(vals > 1.0)):
            raise ValueError("profile must map into (1/2, 1]; pass enforce_range=False to override")
        if np.any(vals < 0.0) or np.any(vals > 1.0):
            raise ValueError("profile must map into [0, 1]")
        self._site_probs = vals

    def sample(self, rng: np.random.Generator, size: int | None = None) -> np.ndarray:
        if size is None:
            return (rng.random(self.n_sites) < self._site_probs).astype(np.uint8)
        return (rng.random((size, self.n_sites)) < self._site_probs).astype(np.uint8)


def sample_profile(
    profile: Callable[[float], float],
    n_sites: int,
    rng: np.random.Generator,
    size: int | None = None,
    enforce_range: bool = True,
) -> np.ndarray:
    """Draw product-measure configurations along a density profile."""
    return ProfileSampler(profile, n_sites, enforce_range).sample(rng, size)


def canonical_window_prob(n_sites: int, k: int, sigma) -> float:
    """Window probability under the uniform component measure at (N, k)."""
    return count_with_window(n_sites, k, sigma) / count_hole_isolated(n_sites, k)


def balance_residuals(prob: Callable[[np.ndarray], float], n_sites: int) -> float:
    """Largest stationarity defect of a ring measure under the jump rates.

    Accumulates signed probability flow across every allowed jump of every
    configuration and returns the maximum absolute net flow into any state.
    Exhaustive over all 2^N states, so keep N small.
    """
    net = np.zeros(2**n_sites, dtype=np.float64)
    for code in range(2**n_sites):
        occ = np.array([(code >> i) & 1 for i in range(n_sites)], dtype=np.uint8)
        p_eta = prob(occ)
        if p_eta == 0.0:
            continue
        for x, d in active_moves(occ):
            y = (x + d) % n_sites
            target = (code & ~(1 << x)) | (1 << y)
            net[code] -= p_eta
            net[target] += p_eta
    return float(np.max(np.abs(net)))
