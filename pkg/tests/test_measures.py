"""Closed-form measures: pinned values, rational shadows, samplers."""

import math
from fractions import Fraction
from itertools import product

import numpy as np
import pytest
from scipy import stats

import oracles
from fepsim import lattice, measures
from fepsim.lattice import ClassLabel

RHO_GRID = [0.55, 0.6, 0.65, 0.7, 0.75, 0.8, 0.85, 0.9, 0.95]


def test_gcm_params_identities():
    for rho in RHO_GRID:
        g = measures.GcmParams(rho)
        assert math.isclose(g.kappa * g.gamma, rho, rel_tol=1e-14)
        assert math.isclose(g.alpha * g.beta, (2 * rho - 1) / rho, rel_tol=1e-14)
        assert min(g.kappa, g.alpha, g.beta, g.gamma) > 0


def test_gcm_window_prob_pinned():
    assert measures.gcm_window_prob(0.75, [1]) == pytest.approx(0.75, abs=1e-15)
    assert measures.gcm_window_prob(0.75, [1, 1]) == pytest.approx(0.5, abs=1e-15)
    assert measures.gcm_window_prob(0.75, [0, 0]) == 0.0
    assert measures.gcm_window_prob(0.75, [1, 0, 1]) == pytest.approx(0.25, abs=1e-15)


def test_gcm_window_prob_rejects_density():
    for rho in (0.5, 1.0, 0.2):
        with pytest.raises(ValueError):
            measures.gcm_window_prob(rho, [1])


def test_gcm_window_prob_rational_shadow():
    # float formula against exact Fraction arithmetic
    rho = Fraction(3, 4)
    for ell in range(1, 7):
        for bits in product((0, 1), repeat=ell):
            sigma = np.array(bits, dtype=np.uint8)
            exact = oracles.brute_window_weight(rho, sigma)
            got = measures.gcm_window_prob(0.75, sigma)
            assert math.isclose(got, float(exact), rel_tol=1e-13, abs_tol=1e-15)


def test_gcm_variants_agree():
    for rho in RHO_GRID:
        for ell in range(1, 7):
            for sigma in measures.enumerate_windows(ell):
                a = measures.gcm_window_prob(rho, sigma, variant="boundary")
                b = measures.gcm_window_prob(rho, sigma, variant="density")
                assert math.isclose(a, b, rel_tol=1e-13)


def test_gcm_kolmogorov_marginals():
    # appending the last site's two values must marginalize exactly
    for rho in (0.6, 0.75, 0.9):
        for ell in range(1, 7):
            for sigma in measures.enumerate_windows(ell):
                base = measures.gcm_window_prob(rho, sigma)
                ext0 = measures.gcm_window_prob(rho, np.append(sigma, 0))
                ext1 = measures.gcm_window_prob(rho, np.append(sigma, 1))
                assert math.isclose(base, ext0 + ext1, rel_tol=1e-13)


def test_chain_product_equals_window_formula():
    rho = Fraction(3, 4)
    for ell in range(1, 9):
        for sigma in measures.enumerate_windows(ell):
            chain = oracles.chain_window_prob(rho, sigma)
            exact = oracles.brute_window_weight(rho, sigma)
            assert chain == exact


def test_window_probs_sum_to_one():
    for rho in (0.6, 0.75, 0.9):
        for ell in range(1, 8):
            total = sum(measures.gcm_window_prob(rho, s) for s in measures.enumerate_windows(ell))
            assert math.isclose(total, 1.0, rel_tol=1e-13)


def test_two_point_pinned():
    assert measures.two_point(0.75, 1) == pytest.approx(0.5, abs=1e-15)
    assert measures.two_point(0.75, 2) == pytest.approx(7 / 12, abs=1e-15)


def test_two_point_limit_monotone():
    vals = [abs(measures.two_point(0.75, ell) - 0.5625) for ell in range(1, 30)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[-1] < 1e-12


def test_two_point_matches_window_sum():
    for rho in (0.6, 0.75, 0.9):
        for ell in range(1, 7):
            direct = measures.two_point(rho, ell, method="window_sum")
            closed = measures.two_point(rho, ell)
            assert math.isclose(direct, closed, rel_tol=1e-12)


def test_gcm_h_mean_pinned():
    assert measures.gcm_h_mean(0.75) == pytest.approx(2 / 3, abs=1e-15)
    assert measures.gcm_h_mean(0.5) == 0.0
    assert measures.gcm_h_mean(1.0) == 1.0
    assert measures.gcm_h_mean(0.3) == 0.0


def test_gcm_h_mean_is_window_expectation():
    # h on a 3-site window with the origin in the middle
    for rho in RHO_GRID:
        total = 0.0
        for sigma in measures.enumerate_windows(3):
            a, b, c = int(sigma[0]), int(sigma[1]), int(sigma[2])
            total += (a * b + b * c - a * b * c) * measures.gcm_window_prob(rho, sigma)
        assert math.isclose(total, measures.gcm_h_mean(rho), rel_tol=1e-14)


def test_sample_gcm_window_no_adjacent_holes():
    rng = np.random.default_rng(5)
    wins = measures.sample_gcm_window(0.6, 12, 4000, rng)
    assert not np.any((wins[:, :-1] == 0) & (wins[:, 1:] == 0))


def test_sample_gcm_window_density():
    rng = np.random.default_rng(11)
    wins = measures.sample_gcm_window(0.75, 6, 100_000, rng)
    se = math.sqrt(0.75 * 0.25 / wins.size)
    assert abs(float(wins.mean()) - 0.75) < 3 * se


def test_sample_gcm_window_matches_exact_marginals():
    rng = np.random.default_rng(3)
    ell = 4
    wins = measures.sample_gcm_window(0.7, ell, 60_000, rng)
    strings = {}
    for sigma in measures.enumerate_windows(ell):
        strings["".join(map(str, sigma))] = measures.gcm_window_prob(0.7, sigma)
    seen = ["".join(map(str, row)) for row in wins]
    for text, p in strings.items():
        freq = seen.count(text) / len(seen)
        se = math.sqrt(p * (1 - p) / len(seen))
        assert abs(freq - p) < 4 * se + 1e-9, text


def test_canonical_sample_uniform_chi_square():
    rng = np.random.default_rng(17)
    draws = measures.canonical_sample(5, 3, 20_000, rng)
    labels = ["".join(map(str, row)) for row in draws]
    support = {
        "".join(map(str, c)): 0 for c in lattice.enumerate_ergodic(5, 3)
    }
    for s in labels:
        assert s in support
        support[s] += 1
    counts = np.array(list(support.values()))
    _, p_value = stats.chisquare(counts)
    assert p_value > 1e-3


def test_canonical_sample_support():
    rng = np.random.default_rng(2)
    assert np.all(measures.canonical_sample(4, 4, 3, rng) == 1)
    draws = measures.canonical_sample(11, 7, 200, rng)
    for row in draws:
        assert lattice.classify(row) is ClassLabel.ERGODIC
        assert int(row.sum()) == 7


def test_canonical_sample_rejects_subcritical():
    rng = np.random.default_rng(0)
    with pytest.raises(ValueError):
        measures.canonical_sample(8, 4, 1, rng)


def test_conditioned_window_pinned():
    # half-width 1, 2 particles in 3 sites: weights gamma, gamma, gamma^2
    assert measures.conditioned_window_prob(0.75, 1, 2, [1, 0, 1]) == pytest.approx(3 / 7)
    assert measures.conditioned_window_prob(0.75, 1, 2, [0, 1, 1]) == pytest.approx(2 / 7)
    assert measures.conditioned_window_prob(0.75, 1, 3, [1, 1, 1]) == pytest.approx(1.0)


def test_conditioned_window_boundary_only_dependence():
    # same boundary pair -> same probability, for any density
    for rho in (0.6, 0.9):
        win = measures.ConditionedWindow(rho, 2, 4)
        by_boundary = {}
        total = 0.0
        for bits in product((0, 1), repeat=5):
            sigma = np.array(bits, dtype=np.uint8)
            p = win.prob(sigma)
            total += p
            if p > 0:
                key = (bits[0], bits[-1])
                by_boundary.setdefault(key, set()).add(round(p, 15))
        assert math.isclose(total, 1.0, rel_tol=1e-12)
        for key, vals in by_boundary.items():
            assert len(vals) == 1, key


def test_conditioned_window_rejects_bad_sigma():
    with pytest.raises(ValueError):
        measures.conditioned_window_prob(0.75, 1, 2, [1, 1, 1])  # wrong count
    with pytest.raises(ValueError):
        measures.conditioned_window_prob(0.75, 2, 3, [1, 0, 0, 1, 1])  # adjacent holes


def test_periodic_gcm_zero_off_support():
    pg = measures.PeriodicGcm(6, 0.75)
    assert pg.prob([1, 1, 1, 0, 0, 1]) == 0.0
    assert pg.prob([1, 0, 1, 0, 1, 0]) == 0.0


def test_periodic_gcm_conditional_uniformity():
    pg = measures.PeriodicGcm(8, 0.75)
    probs = [pg.prob(c) for c in lattice.enumerate_ergodic(8, 5)]
    assert max(probs) - min(probs) < 1e-12 * max(probs)


def test_periodic_gcm_translation_invariant():
    rng = np.random.default_rng(9)
    for n in (6, 9, 10):
        pg = measures.PeriodicGcm(n, 0.8)
        for row in measures.canonical_sample(n, n // 2 + 1, 5, rng):
            base = pg.prob(row)
            for x in range(1, n):
                assert math.isclose(pg.prob(np.roll(row, x)), base, rel_tol=1e-13)


def test_periodic_gcm_total_mass():
    for n in (6, 8, 10):
        pg = measures.PeriodicGcm(n, 0.75)
        total = 0.0
        for k in range(n // 2 + 1, n + 1):
            total += sum(pg.prob(c) for c in lattice.enumerate_ergodic(n, k))
        assert math.isclose(total, 1.0, rel_tol=1e-12)


def test_ergodic_set_mass_limit():
    assert measures.ergodic_set_mass_limit(0.75) == pytest.approx(0.9375)
    errors = [abs(measures.ergodic_set_mass(0.75, n) - 0.9375) for n in range(8, 21)]
    assert errors[-1] < 1e-4
    assert errors[-1] < errors[0]


def test_sample_profile_full_and_mean():
    rng = np.random.default_rng(1)
    assert np.all(measures.sample_profile(lambda u: 1.0, 64, rng) == 1)
    occ = measures.sample_profile(lambda u: 0.75, 10_000, rng)
    se = math.sqrt(0.75 * 0.25 / 10_000)
    assert abs(float(occ.mean()) - 0.75) < 3 * se


def test_sample_profile_range_enforced():
    rng = np.random.default_rng(1)
    with pytest.raises(ValueError):
        measures.sample_profile(lambda u: 0.4, 16, rng)
    out = measures.sample_profile(lambda u: 0.4, 16, rng, enforce_range=False)
    assert out.shape == (16,)


def test_canonical_window_prob_is_count_ratio():
    # probability equals the exact rational count ratio
    for n in range(4, 11):
        for k in range(n // 2 + 1, n):
            for ell in (1, 2, 3):
                for sigma in measures.enumerate_windows(ell):
                    num = lattice.count_with_window(n, k, sigma)
                    den = lattice.count_hole_isolated(n, k)
                    got = measures.canonical_window_prob(n, k, sigma)
                    assert math.isclose(got, num / den, rel_tol=1e-15)


def test_degenerate_constructors():
    assert measures.degenerate_full_window_prob([1, 1, 1]) == 1.0
    assert measures.degenerate_full_window_prob([1, 0, 1]) == 0.0
    assert measures.degenerate_alternating_window_prob([1, 0, 1]) == 0.5
    assert measures.degenerate_alternating_window_prob([0, 1, 0]) == 0.5
    assert measures.degenerate_alternating_window_prob([1, 1, 0]) == 0.0
