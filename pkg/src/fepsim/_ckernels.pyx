# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled event loops for the facilitated-exclusion and zero-range models.

Mirrors _pykernels operation for operation (same uniform-variate
consumption, same tie-breaking), so the two implementations produce
identical trajectories from the same generator state.
"""

from libc.math cimport log

import numpy as np

IMPLEMENTATION = "cython"

STATUS_TIME = 0
STATUS_FROZEN = 1
STATUS_HIT = 2
STATUS_FULL = 3
STATUS_STOPPED = 1

MODE_SZR = 0
MODE_FZR = 1
MODE_IRW = 2


cdef inline bint _move_active(unsigned char* o, Py_ssize_t n, Py_ssize_t x, int left_bit) nogil:
    cdef unsigned char lo, hi
    if not o[x]:
        return 0
    lo = o[x - 1] if x else o[n - 1]
    hi = o[x + 1] if x < n - 1 else o[0]
    if left_bit:
        return hi and not lo
    return lo and not hi


def fep_run(
    unsigned char[::1] occ,
    double t0,
    double t_limit,
    object stream,
    object state=None,
    bint stop_on_ergodic=False,
    long max_events=0,
    double[::1] ev_t=None,
    int[::1] ev_x=None,
    int[::1] ev_d=None,
):
    """Compiled counterpart of _pykernels.fep_run; same contract."""
    cdef Py_ssize_t n = occ.shape[0]
    cdef unsigned char* o = &occ[0]
    cdef bint record = ev_t is not None
    cdef long cap = ev_t.shape[0] if record else (max_events if max_events > 0 else -1)
    if state is not None and state.act_list.shape[0] != 2 * n:
        raise ValueError("state was built for a different system size")

    cdef long[::1] act_pos
    cdef long[::1] act_list
    cdef Py_ssize_t n_act
    cdef long n00

    cdef Py_ssize_t x, y, s, b, i
    cdef int bit
    cdef long m, m2, slot, last

    if state is None:
        act_pos = np.full(2 * n, -1, dtype=np.int64)
        act_list = np.zeros(2 * n, dtype=np.int64)
    else:
        act_pos = state.act_pos
        act_list = state.act_list
    if state is None or state.n_act < 0:
        if state is not None:
            act_pos[:] = -1
        n_act = 0
        for x in range(n):
            for bit in range(2):
                if _move_active(o, n, x, bit):
                    m = 2 * x + bit
                    act_pos[m] = n_act
                    act_list[n_act] = m
                    n_act += 1
        n00 = -1
    else:
        n_act = state.n_act
        n00 = state.n00
    if stop_on_ergodic and n00 < 0:
        n00 = 0
        for x in range(n):
            if not o[x] and not o[(x + 1) % n]:
                n00 += 1

    cdef double[::1] buf = stream.buf
    cdef Py_ssize_t bi = stream.i
    cdef Py_ssize_t blen = buf.shape[0]
    cdef double t = t0
    cdef long n_ev = 0
    cdef int status = STATUS_TIME
    cdef double u1, u2, dt
    cdef Py_ssize_t idx, left, bond0, site0, n_bonds, n_sites_upd
    cdef bint want, have

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

        dt = -log(1.0 - u1) / n_act
        if t + dt > t_limit:
            t = t_limit
            status = STATUS_TIME
            break
        t += dt

        idx = <Py_ssize_t>(u2 * n_act)
        if idx >= n_act:
            idx = n_act - 1
        m = act_list[idx]
        x = m >> 1
        left = m & 1
        y = (x - 1 + n) % n if left else (x + 1) % n

        bond0 = (x - 2 + n) % n if left else (x - 1 + n) % n
        site0 = bond0
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
            ev_x[n_ev] = <int>x
            ev_d[n_ev] = -1 if left else 1
        n_ev += 1

        for i in range(n_sites_upd):
            s = (site0 + i) % n
            for bit in range(2):
                m2 = 2 * s + bit
                want = _move_active(o, n, s, bit)
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

    stream.buf = np.asarray(buf)
    stream.i = bi
    if state is not None:
        state.n_act = n_act
        state.n00 = n00 if (stop_on_ergodic or n_ev == 0) else -1
    return t, n_ev, status


def zr_segment_run(
    long[::1] piles,
    double t0,
    double t_limit,
    object stream,
    int mode,
    double irw_rate=0.0,
    long max_events=0,
):
    """Compiled counterpart of _pykernels.zr_segment_run; same contract."""
    cdef Py_ssize_t ln = piles.shape[0]
    cdef Py_ssize_t L = ln - 2
    cdef long* p = &piles[0]
    cdef long cap = max_events if max_events > 0 else -1

    cdef long threshold = 2 if mode == MODE_SZR else 1
    act_pos_arr = np.full(ln, -1, dtype=np.int64)
    act_list_arr = np.zeros(ln, dtype=np.int64)
    cdef long[::1] act_pos = act_pos_arr
    cdef long[::1] act_list = act_list_arr
    cdef Py_ssize_t n_act = 0
    cdef long n_parts = 0

    cdef Py_ssize_t y, s, z
    for y in range(1, L + 1):
        n_parts += p[y]
        if mode != MODE_IRW and p[y] >= threshold:
            act_pos[y] = n_act
            act_list[n_act] = y
            n_act += 1

    cdef double[::1] buf = stream.buf
    cdef Py_ssize_t bi = stream.i
    cdef Py_ssize_t blen = buf.shape[0]
    cdef double t = t0
    cdef long n_jumps = 0
    cdef int status = STATUS_TIME
    cdef double u1, u2, dt, total
    cdef long n_choices, j, pick, cum
    cdef int step
    cdef long slot, last
    cdef bint want, have

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

        dt = -log(1.0 - u1) / total
        if t + dt > t_limit:
            t = t_limit
            status = STATUS_TIME
            break
        t += dt

        j = <long>(u2 * n_choices)
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
                        slot = act_pos[s]
                        last = act_list[n_act - 1]
                        act_list[slot] = last
                        act_pos[last] = slot
                        n_act -= 1
                        act_pos[s] = -1

    stream.buf = np.asarray(buf)
    stream.i = bi
    return t, n_jumps, status
