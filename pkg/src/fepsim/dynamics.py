"""Continuous-time simulation of the facilitated dynamics.

Event-driven (Gillespie) realization of the constrained-swap generator:
every active move carries rate 1, so the next event time is exponential
in the number of active moves and the executed move is uniform among
them.  Time is kept in microscopic units internally; the diffusive
factor n**2 enters only when converting to or from macroscopic time.

Site indices are 0-based throughout the Python API; file exports use
1-based site numbers to match the configuration-string convention.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._rand import UniformStream
from .lattice import ClassLabel, ExclusionConfig, active_moves, as_occupancy, classify


class Frozen(Exception):
    """No move is active: the configuration is absorbing."""


class _Sentinel:
    __slots__ = ("_name",)

    def __init__(self, name: str):
        self._name = name

    def __repr__(self) -> str:
        return self._name


#: Returned by hitting_time_ergodic when the horizon expires first.
NOT_REACHED = _Sentinel("NotReached")
#: Returned when the ergodic component is unreachable (k <= n/2).
NEVER_REACHABLE = _Sentinel("NeverReachable")

_STATUS_NAMES = {
    kernels.STATUS_TIME: "horizon",
    kernels.STATUS_FROZEN: "frozen",
    kernels.STATUS_HIT: "hit",
}


def jump_rate(config, x: int, direction: int) -> int:
    """Rate (0 or 1) for the particle at site x to hop to x + direction.

    The hop needs the mover present, the target empty, and the site
    behind the mover (opposite the jump direction) occupied.
    """
    if direction not in (1, -1):
        raise ValueError("direction must be +1 or -1")
    occ = as_occupancy(config)
    n = occ.shape[0]
    target = (x + direction) % n
    behind = (x - direction) % n
    return int(occ[x % n] and occ[behind] and not occ[target])


class RateTable:
    """Indexed set of active moves, maintained incrementally.

    A move is the pair (x, d) with d = +1 or -1, active exactly when
    jump_rate(occ, x, d) == 1.  Each active move has rate 1, so the
    total rate is the size of the set.  After a swap only the moves
    within distance 2 of the touched bond can change activity, and only
    those are re-evaluated.
    """

    __slots__ = ("n", "_list", "_pos")

    def __init__(self, occ: np.ndarray):
        occ = as_occupancy(occ)
        self.n = occ.shape[0]
        self._list: list[int] = []
        self._pos: dict[int, int] = {}
        for x, d in active_moves(occ):
            self._add(2 * x + (d < 0))

    def _add(self, code: int) -> None:
        if code not in self._pos:
            self._pos[code] = len(self._list)
            self._list.append(code)

    def _remove(self, code: int) -> None:
        slot = self._pos.pop(code, None)
        if slot is None:
            return
        last = self._list.pop()
        if slot < len(self._list):
            self._list[slot] = last
            self._pos[last] = slot

    @property
    def total_rate(self) -> float:
        return float(len(self._list))

    @property
    def n_active(self) -> int:
        return len(self._list)

    def moves(self) -> list[tuple[int, int]]:
        """Active moves as (site, direction), sorted for comparison."""
        out = [(c >> 1, -1 if c & 1 else 1) for c in self._list]
        out.sort()
        return out

    def move_at(self, idx: int) -> tuple[int, int]:
        code = self._list[idx]
        return code >> 1, -1 if code & 1 else 1

    def apply(self, occ: np.ndarray, x: int, direction: int) -> None:
        """Execute the swap on occ and refresh the affected moves."""
        n = self.n
        y = (x + direction) % n
        occ[x] = 0
        occ[y] = 1
        # Moves reading a changed site sit within two sites of the bond.
        lo = min(x, y) if abs(x - y) == 1 else n - 1  # wrap bond
        for off in range(-1, 3):
            s = (lo + off) % n
            for d in (1, -1):
                code = 2 * s + (d < 0)
                if jump_rate(occ, s, d):
                    self._add(code)
                else:
                    self._remove(code)


def step(occ: np.ndarray, table: RateTable, rng: np.random.Generator) -> tuple[np.ndarray, float]:
    """One event: draw an exponential holding time and a uniform move.

    Mutates occ and table in place; returns (occ, dt_micro).  Raises
    Frozen when no move is active.
    """
    n_act = table.n_active
    if n_act == 0:
        raise Frozen
    dt = rng.exponential(1.0 / n_act)
    idx = min(int(rng.random() * n_act), n_act - 1)
    x, d = table.move_at(idx)
    table.apply(occ, x, d)
    return occ, dt


@dataclass(frozen=True)
class CurrentField:
    """Instantaneous current per bond and the gradient observable.

    j[x] is the signed particle flow across the bond (x, x+1), positive
    when the active transition moves a particle rightward, so that the
    drift of eta(x) is j[x-1] - j[x].  hval[x] is the local function
    whose discrete gradient the current is: hval[x] = 1 iff site x is
    occupied with an occupied neighbour, and j[x] = hval[x] - hval[x+1].
    """

    j: np.ndarray
    hval: np.ndarray


def current_field(config) -> CurrentField:
    occ = as_occupancy(config).astype(np.int64)
    up1 = np.roll(occ, -1)  # occ[x+1]
    up2 = np.roll(occ, -2)  # occ[x+2]
    dn1 = np.roll(occ, 1)  # occ[x-1]
    c = dn1 * occ * (1 - up1) + up2 * up1 * (1 - occ)
    j = c * (occ - up1)
    hval = occ * np.maximum(dn1, up1)
    return CurrentField(j=j, hval=hval)


def generator_drift(config) -> np.ndarray:
    """Expected instantaneous drift of each occupation number.

    Sums rate * (eta'(x) - eta(x)) over the active moves; equals the
    discrete divergence of the current field.
    """
    occ = as_occupancy(config)
    n = occ.shape[0]
    drift = np.zeros(n, dtype=np.int64)
    for x, d in active_moves(occ):
        drift[x] -= 1
        drift[(x + d) % n] += 1
    return drift


@dataclass
class Trajectory:
    """A simulated path: initial state, event log, final state.

    Event times are microscopic and strictly increasing; time_scale is
    the diffusive factor n**2 relating them to macroscopic time.
    """

    initial: ExclusionConfig
    final: ExclusionConfig
    times: np.ndarray
    sites: np.ndarray
    dirs: np.ndarray
    t_end_micro: float
    time_scale: int
    status: str
    n_events: int
    seed: int | None = None
    events_recorded: bool = True

    @property
    def t_end_macro(self) -> float:
        return self.t_end_micro / self.time_scale

    def replay(self) -> ExclusionConfig:
        """Re-apply the event log to the initial state.

        Validates that every logged move was active when executed.
        """
        if not self.events_recorded:
            raise ValueError("trajectory was simulated with record=False")
        occ = as_occupancy(self.initial)
        n = occ.shape[0]
        for i in range(self.n_events):
            x = int(self.sites[i])
            d = int(self.dirs[i])
            if not jump_rate(occ, x, d):
                raise ValueError(f"event {i}: move ({x}, {d:+d}) not active")
            occ[x] = 0
            occ[(x + d) % n] = 1
        return ExclusionConfig(occ)

    def event_csv(self) -> str:
        """Event log as CSV text `t_micro,x,dir` with 1-based sites."""
        lines = ["t_micro,x,dir"]
        for i in range(self.n_events):
            lines.append(f"{float(self.times[i])!r},{int(self.sites[i]) + 1},{int(self.dirs[i]):+d}")
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "n_sites": self.initial.n_sites,
            "n_particles": self.initial.n_particles,
            "initial": self.initial.to_string(),
            "final": self.final.to_string(),
            "n_events": self.n_events,
            "events_recorded": self.events_recorded,
            "t_end_micro": self.t_end_micro,
            "t_end_macro": self.t_end_macro,
            "status": self.status,
            "seed": self.seed,
            "kernel": kernels.IMPLEMENTATION,
        }

    def summary_json(self) -> str:
        return json.dumps(self.summary(), indent=2) + "\n"


_RECORD_CHUNK = 1 << 14


def simulate(
    config,
    t_macro: float,
    rng: np.random.Generator,
    *,
    record: bool = True,
    stop_on_ergodic: bool = False,
    seed: int | None = None,
) -> Trajectory:
    """Run the dynamics for t_macro macroscopic time units.

    The microscopic horizon is t_macro * n**2.  A frozen configuration
    is held constant to the horizon.  With record=False only the final
    state and event count are kept.
    """
    if t_macro < 0:
        raise ValueError("t_macro must be nonnegative")
    occ = as_occupancy(config)
    initial = ExclusionConfig(occ)
    n = occ.shape[0]
    t_limit = t_macro * n * n
    stream = UniformStream(rng)

    if not record:
        t_end, n_ev, status = kernels.fep_run(
            occ, 0.0, t_limit, stream, None, stop_on_ergodic, 0, None, None, None
        )
        empty_f = np.empty(0, dtype=np.float64)
        empty_i = np.empty(0, dtype=np.int32)
        return Trajectory(
            initial=initial,
            final=ExclusionConfig(occ),
            times=empty_f,
            sites=empty_i,
            dirs=empty_i,
            t_end_micro=t_end,
            time_scale=n * n,
            status=_STATUS_NAMES[status],
            n_events=n_ev,
            seed=seed,
            events_recorded=False,
        )

    cap = _RECORD_CHUNK
    times = np.empty(cap, dtype=np.float64)
    sites = np.empty(cap, dtype=np.int32)
    dirs = np.empty(cap, dtype=np.int32)
    used = 0
    t = 0.0
    state = kernels.FepState(n)
    while True:
        t, n_ev, status = kernels.fep_run(
            occ, t, t_limit, stream, state, stop_on_ergodic, 0, times[used:], sites[used:], dirs[used:]
        )
        used += n_ev
        if status != kernels.STATUS_FULL:
            break
        cap *= 2
        times = np.concatenate([times, np.empty(cap - times.shape[0], dtype=np.float64)])
        sites = np.concatenate([sites, np.empty(cap - sites.shape[0], dtype=np.int32)])
        dirs = np.concatenate([dirs, np.empty(cap - dirs.shape[0], dtype=np.int32)])

    return Trajectory(
        initial=initial,
        final=ExclusionConfig(occ),
        times=times[:used].copy(),
        sites=sites[:used].copy(),
        dirs=dirs[:used].copy(),
        t_end_micro=t,
        time_scale=n * n,
        status=_STATUS_NAMES[status],
        n_events=used,
        seed=seed,
    )


def hitting_time_ergodic(config, rng: np.random.Generator, t_max_micro: float):
    """Microscopic first time the configuration classifies as Ergodic.

    Returns 0.0 if already ergodic, NEVER_REACHABLE when k <= n/2 (the
    ergodic slice is empty there), NOT_REACHED if the horizon expires,
    and otherwise the event time of the first ergodic state.
    """
    if t_max_micro <= 0:
        raise ValueError("t_max_micro must be positive")
    occ = as_occupancy(config)
    n = occ.shape[0]
    k = int(occ.sum())
    if 2 * k <= n:
        return NEVER_REACHABLE
    if classify(occ) is ClassLabel.ERGODIC:
        return 0.0
    stream = UniformStream(rng)
    t_end, _, status = kernels.fep_run(
        occ, 0.0, t_max_micro, stream, None, True, 0, None, None, None
    )
    if status == kernels.STATUS_HIT:
        return t_end
    return NOT_REACHED
