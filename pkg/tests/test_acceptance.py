"""Acceptance gate: thirteen validation criteria, one test per criterion.

Each test prints a single [PASS]/[FAIL] line (visible under pytest -s)
and asserts the same condition, so the -v listing doubles as the report.
Statistical criteria run with pinned seeds; tolerances are stated inline.
"""

import math
import time
from fractions import Fraction
from itertools import combinations, product

import numpy as np

import oracles
from fepsim import measures
from fepsim.dynamics import current_field, generator_drift
from fepsim.estimators import ensembles_gap, hydro_compare, transience_scan
from fepsim.lattice import (
    CanonicalEnsemble,
    count_hole_isolated,
    count_with_window,
    enumerate_ergodic,
    is_connected,
)
from fepsim.pde import DensityProfile, coarsen, fde_step, max_stable_dt, solve_fde
from fepsim.zrmap import coupled_fzr_irw, coupled_szr_fzr, in_a_set, segment_from_interior

MASTER_SEED = 20260815


def _report(num: int, name: str, ok: bool, detail: str = "") -> None:
    tag = "PASS" if ok else "FAIL"
    print(f"[{tag}] criterion {num:02d} {name}: {detail}")
    assert ok, f"criterion {num:02d} {name}: {detail}"


def _sinusoid(u):
    return 0.75 + 0.15 * math.sin(2.0 * math.pi * u)


def _a_set_start(ell, delta, rng):
    n_target = math.floor((1 + delta) * ell)
    while True:
        interior = rng.multinomial(n_target, np.full(ell, 1.0 / ell))
        seg = segment_from_interior(interior)
        if in_a_set(seg, delta):
            return seg


def test_criterion_01_counting_identity():
    """Hole-isolated counts match the closed form for every N <= 14."""
    t0 = time.perf_counter()
    ok = True
    for n in range(2, 15):
        for k in range(1, n):
            m = n - k
            brute = 0
            for holes in combinations(range(n), m):
                hs = set(holes)
                if all((h + 1) % n not in hs for h in holes):
                    brute += 1
            if count_hole_isolated(n, k) != brute:
                ok = False
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 10.0
    _report(1, "counting-identity", ok, f"N<=14 all k, exact, {elapsed:.1f}s")


def test_criterion_02_window_counting():
    t0 = time.perf_counter()
    ok = True
    for n in range(4, 13):
        for k in range(n // 2 + 1, n):
            component = list(enumerate_ergodic(n, k))
            for ell in range(1, 5):
                for sigma in measures.enumerate_windows(ell):
                    direct = sum(
                        1 for eta in component if np.array_equal(eta[:ell], sigma)
                    )
                    if count_with_window(n, k, sigma) != direct:
                        ok = False
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30.0
    _report(2, "window-counting", ok, f"N<=12, windows to length 4, exact, {elapsed:.1f}s")


def test_criterion_03_irreducibility():
    t0 = time.perf_counter()
    ok = all(
        is_connected(n, k) for n in range(3, 13) for k in range(n // 2 + 1, n + 1)
    )
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30.0
    _report(3, "irreducibility", ok, f"N<=12 supercritical, connected, {elapsed:.1f}s")


def test_criterion_04_gradient_identities():
    ok = True
    for n in range(2, 9):
        for bits in product((0, 1), repeat=n):
            occ = np.array(bits, dtype=np.uint8)
            cf = current_field(occ)
            if not np.array_equal(cf.j, cf.hval - np.roll(cf.hval, -1)):
                ok = False
            if not np.array_equal(generator_drift(occ), np.roll(cf.j, 1) - cf.j):
                ok = False
    _report(4, "gradient-identities", ok, "exhaustive 2^N, N<=8, exact")


def test_criterion_05_measure_formulas():
    rhos = [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]
    worst_var = 0.0
    for rho in rhos:
        for ell in range(1, 9):
            for sigma in measures.enumerate_windows(ell):
                a = measures.gcm_window_prob(rho, sigma, variant="boundary")
                b = measures.gcm_window_prob(rho, sigma, variant="density")
                if a > 0:
                    worst_var = max(worst_var, abs(a - b) / a)

    worst_kol = 0.0
    for rho in (0.55, 0.75, 0.95):
        for ell in range(1, 8):
            for sigma in measures.enumerate_windows(ell):
                base = measures.gcm_window_prob(rho, sigma)
                ext = sum(
                    measures.gcm_window_prob(rho, np.append(sigma, b)) for b in (0, 1)
                )
                if base > 0:
                    worst_kol = max(worst_kol, abs(base - ext) / base)

    worst_chain = 0.0
    for num, den in ((11, 20), (3, 4), (19, 20)):
        rho_f = Fraction(num, den)
        rho = num / den
        for ell in range(1, 9):
            for sigma in measures.enumerate_windows(ell):
                chain = float(oracles.chain_window_prob(rho_f, tuple(int(v) for v in sigma)))
                closed = measures.gcm_window_prob(rho, sigma)
                if chain > 0:
                    worst_chain = max(worst_chain, abs(chain - closed) / chain)

    ok = worst_var <= 1e-13 and worst_kol <= 1e-13 and worst_chain <= 1e-13
    _report(
        5,
        "measure-formulas",
        ok,
        f"variant {worst_var:.1e}, marginal {worst_kol:.1e}, chain {worst_chain:.1e}"
        " (all <= 1e-13)",
    )


def test_criterion_06_two_point_function():
    t0 = time.perf_counter()
    exact_ok = all(
        measures.two_point(rho, 1) == 2 * rho - 1 for rho in (0.55, 0.75, 0.9, 1.0)
    )
    p2 = measures.two_point(0.75, 2, method="window_sum")
    sum_ok = abs(p2 - 7.0 / 12.0) < 1e-14

    rng = np.random.default_rng(MASTER_SEED)
    wins = measures.sample_gcm_window(0.75, 11, 10**6, rng)
    worst_z = 0.0
    for ell in range(1, 11):
        prod = (wins[:, 0] * wins[:, ell]).astype(np.float64)
        se = prod.std(ddof=1) / math.sqrt(prod.size)
        z = abs(float(prod.mean()) - measures.two_point(0.75, ell)) / se
        worst_z = max(worst_z, z)
    elapsed = time.perf_counter() - t0
    ok = exact_ok and sum_ok and worst_z < 3.0 and elapsed < 60.0
    _report(
        6,
        "two-point-function",
        ok,
        f"P_1 exact, |P_2 - 7/12| < 1e-14, MC max z={worst_z:.2f} (<3), {elapsed:.1f}s",
    )


def test_criterion_07_ergodic_set_mass():
    """Mass of the recurrent component under the periodic measure tends to
    rho (2 - rho); the error decays monotonically within each parity of N
    (even sizes carry the slower boundary term, odd sizes converge faster)."""
    target = 0.75 * (2.0 - 0.75)
    errs = {n: abs(measures.PeriodicGcm(n, 0.75).ergodic_mass() - target) for n in range(8, 21)}
    even = [errs[n] for n in range(8, 21, 2)]
    odd = [errs[n] for n in range(9, 21, 2)]
    ok = (
        errs[20] < 1e-4
        and all(b < a for a, b in zip(even, even[1:]))
        and all(b < a for a, b in zip(odd, odd[1:]))
    )
    _report(
        7,
        "ergodic-set-mass",
        ok,
        f"err(20)={errs[20]:.2e} (<1e-4), per-parity decay over N in 8..20",
    )


def test_criterion_08_stationarity():
    worst = 0.0
    for n in range(3, 11):
        for rho in (0.6, 0.75, 0.9):
            pg = measures.PeriodicGcm(n, rho)
            worst = max(worst, measures.balance_residuals(pg.prob, n))
        for k in range(n // 2 + 1, n + 1):
            ens = CanonicalEnsemble(n, k)
            worst = max(worst, measures.balance_residuals(ens.prob, n))
    ok = worst <= 1e-12
    _report(8, "stationarity", ok, f"max balance residual {worst:.2e} (<=1e-12), N<=10")


def test_criterion_09_equivalence_of_ensembles():
    gaps = []
    for ell in (4, 6, 8, 10, 12):
        j = round(0.75 * (2 * ell + 1))
        gaps.append(ensembles_gap(ell, j))
    decreasing = all(b < a for a, b in zip(gaps, gaps[1:]))
    ok = decreasing and gaps[-1] < 0.05
    detail = ", ".join(f"{g:.4f}" for g in gaps)
    _report(9, "equivalence-of-ensembles", ok, f"gaps [{detail}] decreasing, final <0.05")


def test_criterion_10_coupling_inequalities():
    rng = np.random.default_rng(MASTER_SEED)
    runs = 1000
    ordered_two = ordered_step = inv_two = inv_step = 0
    for _ in range(runs):
        out = coupled_szr_fzr(_a_set_start(16, 0.5, rng), rng)
        ordered_two += out.t_chi <= out.t_zeta
        inv_two += out.log.all_ok()
    for _ in range(runs):
        out = coupled_fzr_irw(_a_set_start(16, 0.5, rng), rng, 0.5)
        ordered_step += out.t_zeta <= out.t_upsilon
        inv_step += out.log.all_ok()
    ok = ordered_two == ordered_step == inv_two == inv_step == runs
    _report(
        10,
        "coupling-inequalities",
        ok,
        f"T_chi<=T_zeta {ordered_two}/{runs}, T_zeta<=T_upsilon {ordered_step}/{runs},"
        f" invariants {inv_two}/{runs} and {inv_step}/{runs}",
    )


def test_criterion_11_transience_scaling():
    t0 = time.perf_counter()
    sizes = [512, 1024, 2048, 4096]
    rep = transience_scan(sizes, _sinusoid, 32, MASTER_SEED)
    medians = [rep.median_tau(n) for n in sizes]
    fracs = [rep.regular_fraction[n] for n in sizes]
    elapsed = time.perf_counter() - t0
    decreasing = all(b < a for a, b in zip(medians, medians[1:]))
    ok = (
        decreasing
        and medians[-1] < 0.01
        and all(b >= a for a, b in zip(fracs, fracs[1:]))
        and elapsed < 600.0
    )
    med = ", ".join(f"{m:.2e}" for m in medians)
    _report(
        11,
        "transience-scaling",
        ok,
        f"medians [{med}] decreasing, last <0.01, regular fraction {fracs}, {elapsed:.0f}s",
    )


def test_criterion_12_hydrodynamic_limit():
    """Replica-averaged block profiles track the solved equation at t=0.05;
    the distance shrinks from N=512 to N=2048 with the same macroscopic
    settings (averaging windows scaled as N/32, the same block fraction)."""
    t0 = time.perf_counter()
    d2048 = hydro_compare(2048, _sinusoid, 0.05, 8, 64, 512, MASTER_SEED).l1_distance
    d512 = hydro_compare(512, _sinusoid, 0.05, 8, 16, 512, MASTER_SEED).l1_distance
    elapsed = time.perf_counter() - t0
    ok = d2048 <= 0.03 and d2048 < d512 and elapsed < 900.0
    _report(
        12,
        "hydrodynamic-limit",
        ok,
        f"L1(2048)={d2048:.4f} (<=0.03), L1(512)={d512:.4f}, {elapsed:.0f}s",
    )


def test_criterion_13_pde_solver():
    const = DensityProfile(np.full(32, 0.8))
    fixed_ok = np.array_equal(fde_step(const, max_stable_dt(const)).cells, const.cells)

    prof = DensityProfile.from_function(_sinusoid, 16)
    m0 = prof.mass
    lo, hi = prof.cells.min(), prof.cells.max()
    monotone_ok = True
    p = prof
    dt = max_stable_dt(prof)
    for _ in range(10**6):
        p = fde_step(p, dt)
        cmin, cmax = p.cells.min(), p.cells.max()
        if cmin < lo or cmax > hi:
            monotone_ok = False
        lo, hi = cmin, cmax
    mass_drift = abs(p.mass - m0)

    sols = {m: solve_fde(DensityProfile.from_function(_sinusoid, m), 0.01) for m in (64, 128, 256)}
    for m, sol in sols.items():
        if sol.cells.min() < 0.6 or sol.cells.max() > 0.9:
            monotone_ok = False
    e1 = float(np.abs(coarsen(sols[128], 2).cells - sols[64].cells).mean())
    e2 = float(np.abs(coarsen(sols[256], 2).cells - sols[128].cells).mean())
    order = math.log2(e1 / e2)

    ok = fixed_ok and mass_drift <= 1e-9 and 1.8 <= order <= 2.2 and monotone_ok
    _report(
        13,
        "pde-solver",
        ok,
        f"fixed point exact, mass drift {mass_drift:.1e} (<=1e-9 over 1e6 steps),"
        f" order {order:.3f} in [1.8,2.2], max principle exact",
    )
