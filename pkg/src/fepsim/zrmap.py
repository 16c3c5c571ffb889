"""Exclusion/zero-range correspondence and the auxiliary segment processes.

The hole-count mapping sends a ring occupancy with k < n particles to
pile heights on a torus with one site per hole: pile i holds the
particles between hole i and hole i+1.  Constrained swaps on the ring
become single-particle pile moves, with the facilitation constraint
turning into "only piles of height >= 2 may emit".

The segment processes (stuck, free, and independent-walker variants,
all with absorbing endpoints) and their two couplings are used to bound
how long the dynamics takes to reach its recurrent component.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import kernels
from ._rand import UniformStream
from .dynamics import Frozen
from .lattice import ClassLabel, active_moves, as_occupancy, classify


@dataclass
class ZrConfig:
    """Pile heights, either on a torus or on a segment with sinks.

    On a torus every entry is a bulk site.  On a segment the first and
    last entries are the absorbing cells: particles there never move.
    """

    piles: np.ndarray
    torus: bool = True

    def __post_init__(self):
        self.piles = np.array(self.piles, dtype=np.int64, copy=True)
        if self.piles.ndim != 1 or self.piles.size == 0:
            raise ValueError("piles must be a nonempty 1-d array")
        if np.any(self.piles < 0):
            raise ValueError("pile heights must be nonnegative")
        if not self.torus and self.piles.size < 3:
            raise ValueError("a segment needs two end cells and an interior")

    @classmethod
    def from_string(cls, text: str, torus: bool = True) -> "ZrConfig":
        return cls(np.array([int(v) for v in text.split(",")], dtype=np.int64), torus=torus)

    def to_string(self) -> str:
        return ",".join(str(int(v)) for v in self.piles)

    @property
    def n_sites(self) -> int:
        return int(self.piles.size)

    @property
    def interior(self) -> np.ndarray:
        return self.piles if self.torus else self.piles[1:-1]

    @property
    def total_particles(self) -> int:
        return int(self.piles.sum())

    def copy(self) -> "ZrConfig":
        return ZrConfig(self.piles, torus=self.torus)


def segment_from_interior(interior) -> ZrConfig:
    """Wrap interior pile heights with empty absorbing end cells."""
    inner = np.asarray(interior, dtype=np.int64)
    piles = np.zeros(inner.size + 2, dtype=np.int64)
    piles[1:-1] = inner
    return ZrConfig(piles, torus=False)


def _hole_positions(occ: np.ndarray) -> np.ndarray:
    """Hole positions in label order: the first label goes to the hole
    at site 0 or, failing that, the nearest hole to its left (wrapping),
    and labels then advance rightward."""
    holes = np.flatnonzero(occ == 0)
    if holes.size == 0:
        raise ValueError("the full configuration has no zero-range image")
    if occ[0] == 0:
        return holes
    return np.roll(holes, 1)


def ex_to_zr(config) -> ZrConfig:
    """Map a ring occupancy (k < n) to pile heights, one site per hole."""
    occ = as_occupancy(config)
    n = occ.shape[0]
    holes = _hole_positions(occ)
    gaps = (np.roll(holes, -1) - holes - 1) % n
    return ZrConfig(gaps.astype(np.int64))


def zr_from_anchor(occ: np.ndarray, anchor: int) -> np.ndarray:
    """Pile heights when the hole at site `anchor` carries the first label."""
    occ = as_occupancy(occ)
    n = occ.shape[0]
    if occ[anchor]:
        raise ValueError("anchor must be a hole")
    holes = np.flatnonzero(occ == 0)
    start = int(np.flatnonzero(holes == anchor)[0])
    holes = np.roll(holes, -start)
    gaps = (np.roll(holes, -1) - holes - 1) % n
    return gaps.astype(np.int64)


def induced_pile_move(occ: np.ndarray, anchor: int, x: int, direction: int) -> tuple[int, int]:
    """Pile move induced by the ring jump (x, direction), holes labeled
    from `anchor`.  Returns 0-based (source pile, target pile).

    A rightward jump lands on the hole ahead, which slides back past the
    jumper: the jumper leaves the pile behind that hole and joins the
    pile after it.  Leftward is the mirror image.
    """
    occ = as_occupancy(occ)
    n = occ.shape[0]
    target = (x + direction) % n
    if occ[target] or not occ[x]:
        raise ValueError("not a particle-onto-hole move")
    holes = np.flatnonzero(occ == 0)
    start = int(np.flatnonzero(holes == anchor)[0])
    ordered = np.roll(holes, -start)
    i = int(np.flatnonzero(ordered == target)[0])
    K = holes.size
    if direction == 1:
        return (i - 1) % K, i
    return i, (i - 1) % K


def zr_step(zr: ZrConfig, rng: np.random.Generator) -> tuple[ZrConfig, float]:
    """One torus event: a uniformly chosen (pile >= 2, direction) fires.

    Mutates zr in place; returns (zr, dt).  Raises Frozen when every
    pile is at most 1.  On a single-site torus the move is a self-loop.
    """
    if not zr.torus:
        raise ValueError("zr_step drives the torus dynamics")
    piles = zr.piles
    active = np.flatnonzero(piles >= 2)
    if active.size == 0:
        raise Frozen
    n_act = 2 * active.size
    dt = rng.exponential(1.0 / n_act)
    j = min(int(rng.random() * n_act), n_act - 1)
    site = int(active[j >> 1])
    d = -1 if j & 1 else 1
    K = piles.size
    piles[site] -= 1
    piles[(site + d) % K] += 1
    return zr, dt


def classify_zr(zr: ZrConfig) -> ClassLabel:
    """Class of a torus pile configuration with K sites and k particles."""
    if not zr.torus:
        raise ValueError("classification applies to the torus dynamics")
    piles = zr.piles
    K = piles.size
    k = int(piles.sum())
    if np.all(piles <= 1):
        return ClassLabel.BLOCKED
    if k > K:
        if np.all(piles >= 1):
            return ClassLabel.ERGODIC
        return ClassLabel.TRANSIENT_GOOD
    return ClassLabel.TRANSIENT_BAD


def classification_commutes(config) -> bool:
    """Ring classification agrees with the pile classification of its image."""
    occ = as_occupancy(config)
    return classify(occ) is classify_zr(ex_to_zr(occ))


# ---------------------------------------------------------------------------
# Regularity statistics


@dataclass(frozen=True)
class RegularityStats:
    """Truncated-window statistics for one window start.

    The window covers the ell sites right of x; of its particles only
    the floor((1+delta) ell) left-most are kept.  The window passes when
    the kept count reaches that target and the kept particles are not
    skewed rightward: their position sum stays within (1 + delta/2)
    times the value for an even spread.
    """

    ell: int
    delta: float
    window: np.ndarray
    n_particles: int
    weighted_sum: int

    @property
    def n_target(self) -> int:
        return math.floor((1.0 + self.delta) * self.ell)

    @property
    def weight_bound(self) -> float:
        return (1.0 + self.delta / 2.0) * self.n_target * (self.ell + 1) / 2.0

    @property
    def passes(self) -> bool:
        return self.n_particles == self.n_target and self.weighted_sum <= self.weight_bound


def truncate_window(window: np.ndarray, n_keep: int) -> np.ndarray:
    """Keep the n_keep left-most particles of a pile window."""
    out = np.zeros_like(window)
    left = n_keep
    for y, v in enumerate(window):
        take = min(int(v), left)
        out[y] = take
        left -= take
        if left == 0:
            break
    return out


def window_stats(zr: ZrConfig, x: int, ell: int, delta: float) -> RegularityStats:
    """Statistics of the truncated window right of torus site x."""
    if not zr.torus:
        raise ValueError("windows are read off the torus configuration")
    piles = zr.piles
    K = piles.size
    if ell >= K:
        raise ValueError("window length must be below the torus size")
    idx = (np.arange(1, ell + 1) + x) % K
    window = piles[idx].astype(np.int64)
    n_target = math.floor((1.0 + delta) * ell)
    kept = truncate_window(window, n_target)
    z = int(np.sum(np.arange(1, ell + 1) * kept))
    return RegularityStats(
        ell=ell, delta=delta, window=kept, n_particles=int(kept.sum()), weighted_sum=z
    )


def in_a_set(segment: ZrConfig, delta: float) -> bool:
    """Membership of a segment configuration in the regular-start set:
    empty end cells, exactly floor((1+delta) ell) interior particles,
    position sum within the evenness bound."""
    if segment.torus:
        raise ValueError("the regular-start set lives on the segment")
    piles = segment.piles
    ell = piles.size - 2
    if piles[0] != 0 or piles[-1] != 0:
        return False
    n_target = math.floor((1.0 + delta) * ell)
    if int(piles[1:-1].sum()) != n_target:
        return False
    z = int(np.sum(np.arange(1, ell + 1) * piles[1:-1]))
    return z <= (1.0 + delta / 2.0) * n_target * (ell + 1) / 2.0


def is_regular(zr: ZrConfig, ell: int, delta: float) -> bool:
    """True when every one of the K cyclic windows passes the check.

    Vectorized over window starts: prefix sums give per-window particle
    counts, and a searchsorted locates each window's truncation cutoff.
    """
    if not zr.torus:
        raise ValueError("regularity is a property of the torus configuration")
    piles = zr.piles
    K = piles.size
    if ell >= K:
        raise ValueError("window length must be below the torus size")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    n_target = math.floor((1.0 + delta) * ell)
    bound = (1.0 + delta / 2.0) * n_target * (ell + 1) / 2.0

    d = np.concatenate([piles, piles[: ell + 1]])
    pref = np.concatenate([[0], np.cumsum(d)])  # pref[i] = sum of d[:i]
    wpref = np.concatenate([[0], np.cumsum(np.arange(d.size) * d)])

    starts = np.arange(K)
    counts = pref[starts + ell + 1] - pref[starts + 1]
    if np.any(counts < n_target):
        return False
    # cutoff position a*: first absolute index where the running count
    # from the window start reaches the target
    targets = pref[starts + 1] + n_target
    astar = np.searchsorted(pref, targets, side="left") - 1
    partial = targets - pref[astar]  # particles still needed at a*
    z_abs = (wpref[astar] - wpref[starts + 1]) + astar * partial
    z_rel = z_abs - starts * n_target
    return bool(np.all(z_rel <= bound))


# ---------------------------------------------------------------------------
# Auxiliary segment processes


class AuxProcessKind(Enum):
    SZR = "szr"  # only piles of height >= 2 emit
    FZR = "fzr"  # every occupied pile emits
    IRW = "irw"  # independent walkers


_AUX_MODE = {
    AuxProcessKind.SZR: kernels.MODE_SZR,
    AuxProcessKind.FZR: kernels.MODE_FZR,
    AuxProcessKind.IRW: kernels.MODE_IRW,
}


@dataclass(frozen=True)
class AuxResult:
    t_stop: float
    final: ZrConfig
    n_jumps: int


def simulate_aux(
    kind: AuxProcessKind,
    initial: ZrConfig,
    rng: np.random.Generator,
    *,
    delta: float | None = None,
    irw_rate: float | None = None,
) -> AuxResult:
    """Run a segment process to its stopping state.

    Stops when no further jump can occur: all interior piles <= 1 for
    the stuck variant, empty interior for the other two.  Walkers jump
    at rate 1/((1+delta) ell) per direction; pass delta or the rate
    directly.  Returns the stop time (time of the last jump), the final
    configuration, and the jump count.
    """
    if initial.torus:
        raise ValueError("auxiliary processes run on the segment")
    kind = AuxProcessKind(kind)
    rate = 0.0
    if kind is AuxProcessKind.IRW:
        ell = initial.piles.size - 2
        if (delta is None) == (irw_rate is None):
            raise ValueError("walkers need exactly one of delta or irw_rate")
        rate = irw_rate if irw_rate is not None else 1.0 / ((1.0 + delta) * ell)
    piles = initial.piles.copy()
    stream = UniformStream(rng)
    t, n_jumps, status = kernels.zr_segment_run(
        piles, 0.0, math.inf, stream, _AUX_MODE[kind], rate, 0
    )
    assert status == kernels.STATUS_STOPPED
    return AuxResult(t_stop=t, final=ZrConfig(piles, torus=False), n_jumps=n_jumps)


# ---------------------------------------------------------------------------
# Couplings


@dataclass
class CouplingLog:
    """Per-event log of a coupled run; one row per shared event."""

    t_first: np.ndarray
    t_second: np.ndarray
    invariant_ok: np.ndarray

    @property
    def n_events(self) -> int:
        return int(self.t_first.shape[0])

    def all_ok(self) -> bool:
        return bool(np.all(self.invariant_ok))

    def to_csv(self) -> str:
        lines = ["event_index,t_chi,t_zeta,invariant_ok"]
        for i in range(self.n_events):
            lines.append(
                f"{i},{float(self.t_first[i])!r},{float(self.t_second[i])!r},"
                f"{int(self.invariant_ok[i])}"
            )
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class TwoColorResult:
    t_chi: float
    t_zeta: float
    log: CouplingLog
    n_jumps_chi: int
    n_jumps_zeta: int
    chi_final: ZrConfig
    zeta_final: ZrConfig


def coupled_szr_fzr(initial: ZrConfig, rng: np.random.Generator) -> TwoColorResult:
    """Graphical coupling of the stuck and free segment processes.

    Both processes read the same clock rings (rate 1 per direction at
    each occupied free-process site) and Bernoulli direction marks.  The
    free process carries colors: one resident per initially occupied
    site is red, the surplus blue.  A ring where the stuck process has
    surplus moves one stuck-process surplus particle and one blue
    particle together; a blue arrival that ends up alone in the stuck
    process turns red.  Rings on red-only sites move a red and leave the
    stuck process untouched.  The stuck process therefore settles no
    later than the free one empties, and the blue count always equals
    the stuck process's surplus count (the logged invariant).
    """
    if initial.torus:
        raise ValueError("the coupling runs on the segment")
    piles = initial.piles
    if piles[0] != 0 or piles[-1] != 0:
        raise ValueError("end cells must start empty")
    size = piles.size
    chi = piles.copy()
    red = np.minimum(piles, 1)
    blue = piles - red
    red[0] = red[-1] = 0
    blue[0] = blue[-1] = 0

    t = 0.0
    t_chi = 0.0 if _szr_settled(chi) else math.nan
    n_chi = 0
    n_zeta = 0
    rows_t = []
    rows_ok = []

    while True:
        occ_sites = np.flatnonzero((red[1:-1] + blue[1:-1]) > 0) + 1
        if occ_sites.size == 0:
            break
        total = 2.0 * occ_sites.size
        t += rng.exponential(1.0 / total)
        y = int(occ_sites[min(int(rng.random() * occ_sites.size), occ_sites.size - 1)])
        d = 1 if rng.random() < 0.5 else -1
        z = y + d

        if blue[y] > 0:
            # surplus on both sides of the coupling moves together
            chi[y] -= 1
            chi[z] += 1
            n_chi += 1
            blue[y] -= 1
            if 0 < z < size - 1 and chi[z] == 1:
                red[z] += 1  # landed alone: stuck, so recolor
            else:
                blue[z] += 1
            n_zeta += 1
            if math.isnan(t_chi) and _szr_settled(chi):
                t_chi = t
        else:
            red[y] -= 1
            red[z] += 1
            n_zeta += 1

        ok = bool(np.all(np.maximum(chi[1:-1] - 1, 0) == blue[1:-1]))
        rows_t.append(t)
        rows_ok.append(ok)

    t_zeta = t if n_zeta else 0.0
    if math.isnan(t_chi):
        raise AssertionError("free process emptied before the stuck one settled")
    times = np.array(rows_t, dtype=np.float64)
    log = CouplingLog(
        t_first=times, t_second=times.copy(), invariant_ok=np.array(rows_ok, dtype=bool)
    )
    return TwoColorResult(
        t_chi=t_chi,
        t_zeta=t_zeta,
        log=log,
        n_jumps_chi=n_chi,
        n_jumps_zeta=n_zeta,
        chi_final=ZrConfig(chi, torus=False),
        zeta_final=ZrConfig(red + blue, torus=False),
    )


def _szr_settled(chi: np.ndarray) -> bool:
    return bool(np.all(chi[1:-1] <= 1))


@dataclass(frozen=True)
class StepCoupledResult:
    t_zeta: float
    t_upsilon: float
    log: CouplingLog
    n_steps: int


def coupled_fzr_irw(
    initial: ZrConfig, rng: np.random.Generator, delta: float
) -> StepCoupledResult:
    """Step-indexed coupling of the free process and independent walkers.

    Every particle owns one lazily drawn symmetric walk, consumed by
    both processes.  Step i of either process advances one particle by
    one trajectory step; the step's waiting times share a single
    exponential variate, scaled by each process's current total rate, so
    the free process's i-th update never happens after the walkers'.
    Both finish after the same total number of steps, giving the sure
    stop-time ordering.
    """
    if initial.torus:
        raise ValueError("the coupling runs on the segment")
    if not in_a_set(initial, delta):
        raise ValueError("initial configuration must lie in the regular-start set")
    piles = initial.piles
    size = piles.size
    ell = size - 2
    denom = (1.0 + delta) * ell

    # particle positions, shared trajectories, per-process progress
    pos0 = np.repeat(np.arange(size), piles)
    n_parts = pos0.size
    steps: list[list[int]] = [[] for _ in range(n_parts)]

    def next_step(p: int, j: int) -> int:
        walk = steps[p]
        while len(walk) <= j:
            walk.append(1 if rng.random() < 0.5 else -1)
        return walk[j]

    pos_z = pos0.copy()
    cnt_z = np.zeros(n_parts, dtype=np.int64)
    pos_u = pos0.copy()
    cnt_u = np.zeros(n_parts, dtype=np.int64)

    t_z = 0.0
    t_u = 0.0
    rows_tz, rows_tu, rows_ok = [], [], []

    while True:
        zeta_piles = np.bincount(pos_z, minlength=size)
        occ = np.flatnonzero(zeta_piles[1:-1] > 0) + 1
        live_u = np.flatnonzero((pos_u > 0) & (pos_u < size - 1))
        if occ.size == 0:
            # both processes consume one trajectory step per shared
            # index, so they exhaust the walks at the same step
            assert live_u.size == 0
            break
        rate_z = 2.0 * occ.size
        rate_u = 2.0 * live_u.size / denom
        e = rng.exponential(1.0)
        t_z += e / rate_z
        t_u += e / rate_u
        rows_tz.append(t_z)
        rows_tu.append(t_u)
        rows_ok.append(t_z <= t_u)

        # free process: uniform occupied site, uniform resident there
        y = int(occ[min(int(rng.random() * occ.size), occ.size - 1)])
        here = np.flatnonzero(pos_z == y)
        p = int(here[min(int(rng.random() * here.size), here.size - 1)])
        pos_z[p] += next_step(p, int(cnt_z[p]))
        cnt_z[p] += 1

        # walkers: uniform unabsorbed particle
        q = int(live_u[min(int(rng.random() * live_u.size), live_u.size - 1)])
        pos_u[q] += next_step(q, int(cnt_u[q]))
        cnt_u[q] += 1

    log = CouplingLog(
        t_first=np.array(rows_tz),
        t_second=np.array(rows_tu),
        invariant_ok=np.array(rows_ok, dtype=bool),
    )
    return StepCoupledResult(t_zeta=t_z, t_upsilon=t_u, log=log, n_steps=int(cnt_z.sum()))
