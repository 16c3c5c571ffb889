"""Statistical observables linking simulations, exact measures, and the PDE.

Everything here reduces raw configurations or ensembles of runs to the
quantities the scaling theory speaks about: paired test functions, block
density profiles, the local-average replacement defect, finite-window
ensemble gaps, transience-time scans, and the empirical-versus-PDE
profile distance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import measures, pde, zrmap
from ._rand import replica_rng
from .dynamics import (
    NEVER_REACHABLE,
    NOT_REACHED,
    current_field,
    hitting_time_ergodic,
    simulate,
)
from .lattice import as_occupancy


def empirical_pairing(config, phi: Callable[[float], float]) -> float:
    """Pair a test function with the empirical measure: (1/N) sum phi(x/N) eta(x)."""
    occ = as_occupancy(config)
    n = occ.shape[0]
    u = np.arange(1, n + 1) / n
    vals = np.array([float(phi(x)) for x in u])
    return float(vals @ occ / n)


@dataclass(frozen=True)
class EmpiricalProfile:
    """Centered moving-average density, one value per lattice site."""

    ell: int
    values: np.ndarray
    t_macro: float = 0.0

    @property
    def n_sites(self) -> int:
        return int(self.values.size)

    def coarse_cells(self, n_cells: int) -> np.ndarray:
        """Average the site values over n_cells equal arcs."""
        n = self.n_sites
        if n_cells < 1 or n % n_cells:
            raise ValueError("cell count must divide the lattice size")
        return self.values.reshape(n_cells, n // n_cells).mean(axis=1)


def block_profile(config, ell: int, t_macro: float = 0.0) -> EmpiricalProfile:
    """Moving average of the occupancy over centered windows of 2 ell + 1 sites."""
    occ = as_occupancy(config)
    n = occ.shape[0]
    width = 2 * ell + 1
    if ell < 0 or width > n:
        raise ValueError("window must fit in the lattice")
    ext = np.concatenate([occ[n - ell :], occ, occ[:ell]]) if ell else occ
    cum = np.concatenate([[0], np.cumsum(ext, dtype=np.int64)])
    vals = (cum[width:] - cum[:-width]) / width
    return EmpiricalProfile(ell=ell, values=vals, t_macro=t_macro)


# ---------------------------------------------------------------------------
# Replacement defect


@dataclass(frozen=True)
class ReplacementStat:
    """Defect of replacing the averaged flux observable by its local-density
    stationary value over a centered window of half-width k."""

    k: int
    value: float


def replacement_value(config, k: int) -> ReplacementStat:
    occ = as_occupancy(config)
    n = occ.shape[0]
    if 2 * k + 1 > n:
        raise ValueError("window must fit in the lattice")
    hval = current_field(occ).hval
    idx = np.arange(-k, k + 1) % n
    h_avg = float(hval[idx].mean())
    rho_k = float(occ[idx].mean())
    return ReplacementStat(k=k, value=h_avg - measures.gcm_h_mean(rho_k))


@dataclass(frozen=True)
class ScanPoint:
    k: int
    mean_abs: float
    stderr: float
    replicas: int


def replacement_scan(
    sampler: Callable[[np.random.Generator], np.ndarray],
    ks: list[int],
    replicas: int,
    rng: np.random.Generator,
) -> list[ScanPoint]:
    """Monte Carlo E|defect| per window size, with standard errors.

    The sampler draws one configuration per call; all window sizes are
    evaluated on the same draws so the scan is comparable across k.
    """
    vals = np.empty((replicas, len(ks)))
    for r in range(replicas):
        occ = sampler(rng)
        for i, k in enumerate(ks):
            vals[r, i] = abs(replacement_value(occ, k).value)
    out = []
    for i, k in enumerate(ks):
        col = vals[:, i]
        out.append(
            ScanPoint(
                k=k,
                mean_abs=float(col.mean()),
                stderr=float(col.std(ddof=1) / math.sqrt(replicas)),
                replicas=replicas,
            )
        )
    return out


# ---------------------------------------------------------------------------
# Equivalence of ensembles


def ensembles_gap(
    ell: int,
    j: int,
    f: Callable[[np.ndarray], float] | None = None,
    f_half_width: int = 0,
    rho: float | None = None,
    margin: float = 0.25,
) -> float:
    """Worst-case gap between the count-conditioned box law and the
    grand-canonical law at the box density.

    Compares E[f shifted to x] under the conditioned measure on the box
    of half-width ell with j particles against the unconditioned
    expectation at density j/(2 ell + 1), maximized over centers x at
    relative depth margin inside the box.  Exact enumeration throughout.
    """
    if f is None:
        f = lambda win: float(win[len(win) // 2])
    width = 2 * f_half_width + 1
    length = 2 * ell + 1
    if not ell <= j <= length:
        raise ValueError("particle count incompatible with an admissible box")
    x_max = math.floor((1.0 - margin) * ell)
    if x_max + f_half_width > ell:
        raise ValueError("shifted windows must stay inside the box")
    rho_l = j / length

    if j == length:
        # both laws are point masses on the fully occupied window
        return 0.0

    gcm = 0.0
    for sigma in measures.enumerate_windows(width):
        p = measures.gcm_window_prob(rho_l, sigma)
        if p:
            gcm += p * float(f(sigma))

    cond = measures.ConditionedWindow(rho=rho if rho is not None else rho_l, ell=ell, j=j)
    gap = 0.0
    for x in range(-x_max, x_max + 1):
        lo = x + ell - f_half_width
        val = cond.expect(lambda win: float(f(win[lo : lo + width])))
        gap = max(gap, abs(val - gcm))
    return gap


# ---------------------------------------------------------------------------
# Transience scan


@dataclass(frozen=True)
class TransienceReport:
    """Hitting times of the recurrent component from profile-sampled starts."""

    n_values: list[int]
    tau_macro: dict[int, np.ndarray]  # nan marks replicas that hit the horizon
    regular_flags: dict[int, np.ndarray]
    n_unreached: dict[int, int]
    delta: float
    ell_used: dict[int, int]

    @property
    def regular_fraction(self) -> dict[int, float]:
        return {n: float(self.regular_flags[n].mean()) for n in self.n_values}

    def median_tau(self, n_sites: int) -> float:
        return float(np.nanmedian(self.tau_macro[n_sites]))

    def summary(self) -> dict:
        frac = self.regular_fraction
        return {
            "n_values": list(self.n_values),
            "median_tau_macro": {str(n): self.median_tau(n) for n in self.n_values},
            "regular_fraction": {str(n): frac[n] for n in self.n_values},
            "n_unreached": {str(n): self.n_unreached[n] for n in self.n_values},
            "delta": self.delta,
            "ell_used": {str(n): self.ell_used[n] for n in self.n_values},
        }

    def replica_csv(self, n_sites: int) -> str:
        lines = ["replica,tau_macro,regular"]
        for r, tau in enumerate(self.tau_macro[n_sites]):
            t = "" if math.isnan(tau) else repr(float(tau))
            lines.append(f"{r},{t},{int(self.regular_flags[n_sites][r])}")
        return "\n".join(lines) + "\n"


def default_regularity_window(n_sites: int) -> int:
    """Window length for the start-regularity check: a fixed fraction of
    the lattice, well below the hole count at the densities of interest
    yet long enough for window counts to concentrate."""
    return max(2, n_sites // 16)


def transience_replica(
    n_sites: int,
    rho0: Callable[[float], float],
    t_max_macro: float,
    delta: float,
    ell: int,
    master_seed: int,
    replica_key: int,
) -> tuple[float, bool]:
    """One replica of the transience scan: (macroscopic hitting time or
    nan if the horizon was reached, start-regularity flag)."""
    rng = replica_rng(master_seed, replica_key)
    occ = measures.sample_profile(rho0, n_sites, rng)
    holes = n_sites - int(occ.sum())
    regular = holes > ell and zrmap.is_regular(zrmap.ex_to_zr(occ), ell, delta)
    tau = hitting_time_ergodic(occ, rng, t_max_macro * n_sites * n_sites)
    if tau is NOT_REACHED or tau is NEVER_REACHABLE:
        return math.nan, regular
    return float(tau) / (n_sites * n_sites), regular


def transience_scan(
    n_list: list[int],
    rho0: Callable[[float], float],
    replicas: int,
    master_seed: int,
    *,
    delta: float = 0.1,
    ell_for: Callable[[int], int] = default_regularity_window,
    t_max_macro: float = 10.0,
) -> TransienceReport:
    """Hitting-time and start-regularity statistics across lattice sizes.

    Each replica draws a fresh product-measure start along rho0, records
    the macroscopic time to reach the recurrent component (nan if the
    horizon t_max_macro is hit first), and checks delta-regularity of the
    pile image over windows of length ell_for(N).
    """
    taus: dict[int, np.ndarray] = {}
    regs: dict[int, np.ndarray] = {}
    unreached: dict[int, int] = {}
    ells: dict[int, int] = {}
    for i_n, n in enumerate(n_list):
        ell = ell_for(n)
        ells[n] = ell
        t_arr = np.full(replicas, np.nan)
        flags = np.zeros(replicas, dtype=bool)
        n_un = 0
        for r in range(replicas):
            tau, regular = transience_replica(
                n, rho0, t_max_macro, delta, ell, master_seed, i_n * replicas + r
            )
            flags[r] = regular
            if math.isnan(tau):
                n_un += 1
            else:
                t_arr[r] = tau
        taus[n] = t_arr
        regs[n] = flags
        unreached[n] = n_un
    return TransienceReport(
        n_values=list(n_list),
        tau_macro=taus,
        regular_flags=regs,
        n_unreached=unreached,
        delta=delta,
        ell_used=ells,
    )


# ---------------------------------------------------------------------------
# Hydrodynamic comparison


@dataclass(frozen=True)
class HydroComparison:
    """Replica-averaged empirical profile against the PDE solution."""

    l1_distance: float
    emp_cells: np.ndarray
    pde_cells: np.ndarray
    t_macro: float
    n_sites: int
    replicas: int
    ell: int

    @property
    def n_cells(self) -> int:
        return int(self.emp_cells.size)

    def to_csv(self) -> str:
        lines = ["u,rho_emp,rho_pde"]
        u = pde.cell_centers(self.n_cells)
        for i in range(self.n_cells):
            lines.append(
                f"{float(u[i])!r},{float(self.emp_cells[i])!r},{float(self.pde_cells[i])!r}"
            )
        return "\n".join(lines) + "\n"

    def summary(self) -> dict:
        return {
            "l1_distance": self.l1_distance,
            "t_macro": self.t_macro,
            "n_sites": self.n_sites,
            "replicas": self.replicas,
            "ell": self.ell,
            "n_cells": self.n_cells,
        }


def hydro_replica_profile(
    n_sites: int,
    rho0: Callable[[float], float],
    t_macro: float,
    ell: int,
    master_seed: int,
    replica: int,
) -> np.ndarray:
    """Block-profile values of one replica run at macroscopic time t_macro."""
    rng = replica_rng(master_seed, replica)
    occ = measures.sample_profile(rho0, n_sites, rng)
    if t_macro > 0.0:
        occ = simulate(occ, t_macro, rng, record=False).final.occ
    return block_profile(occ, ell, t_macro=t_macro).values


def hydro_reduce(
    site_profiles: list[np.ndarray],
    rho0: Callable[[float], float],
    t_macro: float,
    n_cells: int,
    ell: int,
) -> HydroComparison:
    """Average per-replica site profiles, project onto the PDE grid, and
    compare against the solved equation."""
    n_sites = int(site_profiles[0].size)
    acc = np.zeros(n_sites)
    for vals in site_profiles:
        acc += vals
    emp_sites = EmpiricalProfile(ell=ell, values=acc / len(site_profiles), t_macro=t_macro)
    emp_cells = emp_sites.coarse_cells(n_cells)
    sol = pde.solve_fde(pde.DensityProfile.from_function(rho0, n_cells), t_macro)
    l1 = float(np.abs(emp_cells - sol.cells).mean())
    return HydroComparison(
        l1_distance=l1,
        emp_cells=emp_cells,
        pde_cells=sol.cells.copy(),
        t_macro=t_macro,
        n_sites=n_sites,
        replicas=len(site_profiles),
        ell=ell,
    )


def hydro_compare(
    n_sites: int,
    rho0: Callable[[float], float],
    t_macro: float,
    replicas: int,
    ell: int,
    n_cells: int,
    master_seed: int,
) -> HydroComparison:
    """L1 distance between the replica-averaged block profile at time
    t_macro and the PDE solution on n_cells grid cells.

    Block profiles are averaged across replicas at site resolution, then
    projected conservatively onto the PDE grid (the lattice size must be
    a multiple of the cell count).
    """
    if n_sites % n_cells:
        raise ValueError("cell count must divide the lattice size")
    if t_macro < 0.0:
        raise ValueError("time must be nonnegative")
    profiles = [
        hydro_replica_profile(n_sites, rho0, t_macro, ell, master_seed, r)
        for r in range(replicas)
    ]
    return hydro_reduce(profiles, rho0, t_macro, n_cells, ell)
