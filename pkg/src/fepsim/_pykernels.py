"""Pure-Python event loops (fallback when the compiled kernels are absent).

Mirrors _ckernels operation for operation, including the order in which
uniform variates are consumed, so both implementations produce identical
trajectories from the same generator state.  Roughly two orders of
magnitude slower than the compiled version; fine for tests and small runs.
"""

from __future__ import annotations

import math

import numpy as np

IMPLEMENTATION = "python"

STATUS_TIME = 0
STATUS_FROZEN = 1
STATUS_HIT = 2
STATUS_FULL = 3

STATUS_STOPPED = 1  # zr kernels: absorbing/frozen condition reached

MODE_SZR = 0
MODE_FZR = 1
MODE_IRW = 2


class FepState:
    """Active-move bookkeeping that survives across resumed calls.

    n_act < 0 marks the state stale, forcing a rebuild from the occupancy
    on the next call; n00 < 0 likewise for the adjacent-hole counter.
    Carrying the state over makes a chunked run reproduce a single long
    call exactly, whatever the chunk boundaries.
    """

    __slots__ = ("act_list", "act_pos", "n_act", "n00")

    def __init__(self, n_sites):
        self.act_list = np.zeros(2 * n_sites, dtype=np.int64)
        self.act_pos = np.full(2 * n_sites, -1, dtype=np.int64)
        self.n_act = -1
        self.n00 = -1

    def invalidate(self):
        """Force a rebuild; call after modifying the occupancy directly."""
        self.n_act = -1
        self.n00 = -1


def fep_run(
    occ,
    t0,
    t_limit,
    stream,
    state=None,
    stop_on_ergodic=False,
    max_events=0,
    ev_t=None,
    ev_x=None,
    ev_d=None,
):
    """Run the facilitated-exclusion event loop in place.

    occ is a uint8 occupancy array, modified in place.  Each event consumes
    two uniforms: one for the exponential holding time of the global clock
    (total rate = number of active moves), one to pick the move.  Returns
    (t_end, n_events, status).  With stop_on_ergodic the loop halts the
    moment no two adjacent holes remain.  Recording arrays, when given,
    bound the number of events per call (status FULL); passing the same
    FepState back in resumes the run exactly.
    """
    n = occ.shape[0]
    o = [int(v) for v in occ]
    record = ev_t is not None
    cap = len(ev_t) if record else (max_events if max_events > 0 else -1)
    if state is not None and state.act_list.shape[0] != 2 * n:
        raise ValueError("state was built for a different system size")

    def move_active(x, left_bit):
        if not o[x]:
            return False
        lo, hi = o[x - 1 if x else n - 1], o[x + 1 if x < n - 1 else 0]
        if left_bit:
            return bool(hi and not lo)
        return bool(lo and not hi)

    if state is None or state.n_act < 0:
        act_pos = [-1] * (2 * n)
        act_list = [0] * (2 * n)
        n_act = 0
        for x in range(n):
            for bit in (0, 1):
                if move_active(x, bit):
                    m = 2 * x + bit
                    act_pos[m] = n_act
                    act_list[n_act] = m
                    n_act += 1
        n00 = -1
    else:
        act_list = [int(v) for v in state.act_list]
        act_pos = [int(v) for v in state.act_pos]
        n_act = state.n_act
        n00 = state.n00
    if stop_on_ergodic and n00 < 0:
        n00 = 0
        for x in range(n):
            if not o[x] and not o[(x + 1) % n]:
                n00 += 1

    buf = stream.buf
    bi = stream.i
    blen = buf.shape[0]
    t = t0
    n_ev = 0
    status = STATUS_TIME

    while True:
        if stop_on_ergodic and n00 == 0:
            status = STATUS_HIT
            break
        if n_act == 0:
            t = t_limit
            status = STATUS_FROZEN
            break
        if cap >= 0 and n_ev >= cap:
            status = STATUS_FULL
            break
        if bi >= blen:
            buf = stream.refill()
            blen = buf.shape[0]
            bi = 0
        u1 = buf[bi]
        bi += 1
        if bi >= blen:
            buf = stream.refill()
            blen = buf.shape[0]
            bi = 0
        u2 = buf[bi]
        bi += 1

        dt = -math.log(1.0 - u1) / n_act
        if t + dt > t_limit:
            t = t_limit
            status = STATUS_TIME
            break
        t += dt

        idx = int(u2 * n_act)
        if idx >= n_act:
            idx = n_act - 1
        m = act_list[idx]
        x = m >> 1
        left = m & 1
        y = (x - 1) % n if left else (x + 1) % n

        # Bonds and moves touched by the swap form contiguous runs; walking
        # them in a fixed order keeps both kernel implementations in step.
        bond0 = (x - 2) % n if left else (x - 1) % n
        site0 = (x - 2) % n if left else (x - 1) % n
        n_bonds = 3 if n >= 3 else n
        n_sites_upd = 4 if n >= 4 else n

        if stop_on_ergodic:
            for i in range(n_bonds):
                b = (bond0 + i) % n
                if not o[b] and not o[(b + 1) % n]:
                    n00 -= 1
        o[x] = 0
        o[y] = 1
        if stop_on_ergodic:
            for i in range(n_bonds):
                b = (bond0 + i) % n
                if not o[b] and not o[(b + 1) % n]:
                    n00 += 1

        if record:
            ev_t[n_ev] = t
            ev_x[n_ev] = x
            ev_d[n_ev] = -1 if left else 1
        n_ev += 1

        for i in range(n_sites_upd):
            s = (site0 + i) % n
            for bit in (0, 1):
                m2 = 2 * s + bit
                want = move_active(s, bit)
                have = act_pos[m2] >= 0
                if want and not have:
                    act_pos[m2] = n_act
                    act_list[n_act] = m2
                    n_act += 1
                elif have and not want:
                    slot = act_pos[m2]
                    last = act_list[n_act - 1]
                    act_list[slot] = last
                    act_pos[last] = slot
                    n_act -= 1
                    act_pos[m2] = -1

    for x in range(n):
        occ[x] = o[x]
    stream.buf = buf
    stream.i = bi
    if state is not None:
        state.act_list[:] = act_list
        state.act_pos[:] = act_pos
        state.n_act = n_act
        state.n00 = n00 if (stop_on_ergodic or n_ev == 0) else -1
    return t, n_ev, status


def zr_segment_run(piles, t0, t_limit, stream, mode, irw_rate=0.0, max_events=0):
    """Event loop for a zero-range segment with absorbing endpoints.

    piles has length L + 2; interior sites are 1..L, sites 0 and L + 1 only
    accumulate.  Modes: MODE_SZR moves only piles of height >= 2, MODE_FZR
    moves any occupied pile, MODE_IRW moves each particle independently at
    rate irw_rate per direction.  All moving units jump left or right at
    equal rates (1 per direction per pile for SZR/FZR).  Stops when nothing
    can move anymore (status STOPPED, time of the last jump), at t_limit,
    or after max_events jumps (status FULL, resumable).
    Returns (t_end, n_jumps, status).
    """
    ln = piles.shape[0]
    L = ln - 2
    p = [int(v) for v in piles]
    cap = max_events if max_events > 0 else -1

    threshold = 2 if mode == MODE_SZR else 1
    act_pos = [-1] * ln
    act_list = [0] * ln
    n_act = 0
    n_parts = 0
    for y in range(1, L + 1):
        n_parts += p[y]
        if mode != MODE_IRW and p[y] >= threshold:
            act_pos[y] = n_act
            act_list[n_act] = y
            n_act += 1

    buf = stream.buf
    bi = stream.i
    blen = buf.shape[0]
    t = t0
    n_jumps = 0
    status = STATUS_TIME

    while True:
        if mode == MODE_IRW:
            if n_parts == 0:
                status = STATUS_STOPPED
                break
            total = 2.0 * n_parts * irw_rate
            n_choices = 2 * n_parts
        else:
            if n_act == 0:
                status = STATUS_STOPPED
                break
            total = 2.0 * n_act
            n_choices = 2 * n_act
        if cap >= 0 and n_jumps >= cap:
            status = STATUS_FULL
            break
        if bi >= blen:
            buf = stream.refill()
            blen = buf.shape[0]
            bi = 0
        u1 = buf[bi]
        bi += 1
        if bi >= blen:
            buf = stream.refill()
            blen = buf.shape[0]
            bi = 0
        u2 = buf[bi]
        bi += 1

        dt = -math.log(1.0 - u1) / total
        if t + dt > t_limit:
            t = t_limit
            status = STATUS_TIME
            break
        t += dt

        j = int(u2 * n_choices)
        if j >= n_choices:
            j = n_choices - 1
        pick = j >> 1
        step = -1 if (j & 1) else 1
        if mode == MODE_IRW:
            cum = 0
            y = 0
            for s in range(1, L + 1):
                cum += p[s]
                if pick < cum:
                    y = s
                    break
        else:
            y = act_list[pick]

        z = y + step
        p[y] -= 1
        p[z] += 1
        if z == 0 or z == L + 1:
            n_parts -= 1
        n_jumps += 1

        if mode != MODE_IRW:
            for s in (y, z):
                if 1 <= s <= L:
                    want = p[s] >= threshold
                    have = act_pos[s] >= 0
                    if want and not have:
                        act_pos[s] = n_act
                        act_list[n_act] = s
                        n_act += 1
                    elif have and not want:
                        i = act_pos[s]
                        last = act_list[n_act - 1]
                        act_list[i] = last
                        act_pos[last] = i
                        n_act -= 1
                        act_pos[s] = -1

    for y in range(ln):
        piles[y] = p[y]
    stream.buf = buf
    stream.i = bi
    return t, n_jumps, status
