"""Experiment orchestration: config validation, seeding, outputs, manifests.

A run is described by a single JSON document.  Validation happens before
any work starts and reports every problem at once, naming the offending
field.  Outputs are written atomically under one directory together with
a manifest recording the config hash, tool version, per-replica seed
derivations, and a digest of every file, so a run can be audited and
reproduced bit for bit (timestamps are omitted in deterministic mode).
"""

from __future__ import annotations

import hashlib
import json
import math
import os
import tempfile
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from itertools import combinations, product

import numpy as np

from . import __version__, estimators, kernels, lattice, measures, pde
from .dynamics import current_field, generator_drift, simulate

KINDS = ("simulate", "pde", "hydro-compare", "transience", "measure-table", "verify")

_COMMON_FIELDS = {"kind", "master_seed", "out_dir", "threads", "deterministic"}
_KIND_FIELDS = {
    "simulate": {"n_sites", "profile", "rho", "t_end", "replicas", "record_events"},
    "pde": {"grid_cells", "profile", "t_end"},
    "hydro-compare": {"n_sites", "profile", "t_end", "replicas", "block_ell", "grid_cells"},
    "transience": {"n_list", "profile", "replicas", "delta", "ell", "t_end"},
    "measure-table": {"rho", "ell", "n_sites", "k", "mc_samples"},
    "verify": set(),
}


class ConfigError(ValueError):
    """Carries the full list of validation problems."""

    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


# ---------------------------------------------------------------------------
# Density profiles


class Profile:
    """Picklable macroscopic density profile built from a plain spec."""

    def __init__(self, spec: dict):
        self.spec = dict(spec)
        kind = spec["type"]
        if kind == "constant":
            self._lo = self._hi = float(spec["value"])
        elif kind == "sinusoid":
            base, amp = float(spec["base"]), float(spec["amp"])
            self._lo, self._hi = base - amp, base + amp
        else:
            self._pts = np.array(spec["points"], dtype=np.float64)
            self._lo = float(self._pts[:, 1].min())
            self._hi = float(self._pts[:, 1].max())

    @property
    def range(self) -> tuple[float, float]:
        return self._lo, self._hi

    def __call__(self, u: float) -> float:
        spec = self.spec
        if spec["type"] == "constant":
            return float(spec["value"])
        if spec["type"] == "sinusoid":
            return float(spec["base"]) + float(spec["amp"]) * math.sin(2 * math.pi * u)
        us, rs = self._pts[:, 0], self._pts[:, 1]
        u = u % 1.0
        i = int(np.searchsorted(us, u, side="right") - 1)
        if i < 0:
            u0, r0 = us[-1] - 1.0, rs[-1]
        else:
            u0, r0 = us[i], rs[i]
        if i + 1 < us.size:
            u1, r1 = us[i + 1], rs[i + 1]
        else:
            u1, r1 = us[0] + 1.0, rs[0]
        w = 0.0 if u1 == u0 else (u - u0) / (u1 - u0)
        return float(r0 + w * (r1 - r0))


def _validate_profile(spec, problems: list[str]) -> Profile | None:
    if not isinstance(spec, dict) or "type" not in spec:
        problems.append("profile: must be an object with a 'type' field")
        return None
    kind = spec["type"]
    if kind == "constant":
        if not isinstance(spec.get("value"), (int, float)):
            problems.append("profile.value: required number for a constant profile")
            return None
        extra = set(spec) - {"type", "value"}
    elif kind == "sinusoid":
        if not isinstance(spec.get("base"), (int, float)) or not isinstance(
            spec.get("amp"), (int, float)
        ):
            problems.append("profile.base/profile.amp: required numbers for a sinusoid")
            return None
        if spec["amp"] < 0:
            problems.append("profile.amp: must be nonnegative")
            return None
        extra = set(spec) - {"type", "base", "amp"}
    elif kind == "piecewise":
        pts = spec.get("points")
        ok = (
            isinstance(pts, list)
            and len(pts) >= 1
            and all(
                isinstance(p, (list, tuple))
                and len(p) == 2
                and all(isinstance(v, (int, float)) for v in p)
                for p in pts
            )
        )
        if not ok:
            problems.append("profile.points: required list of [u, rho] pairs")
            return None
        us = [p[0] for p in pts]
        if any(not 0.0 <= u < 1.0 for u in us) or any(b <= a for a, b in zip(us, us[1:])):
            problems.append("profile.points: u values must be strictly increasing in [0, 1)")
            return None
        extra = set(spec) - {"type", "points"}
    else:
        problems.append(f"profile.type: unknown type {kind!r}")
        return None
    if extra:
        problems.append(f"profile: unknown fields {sorted(extra)}")
        return None
    prof = Profile(spec)
    lo, hi = prof.range
    if lo <= 0.0 or hi > 1.0:
        problems.append("profile: values must lie in (0, 1]")
        return None
    return prof


# ---------------------------------------------------------------------------
# Config


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated, normalized experiment description."""

    kind: str
    master_seed: int
    out_dir: str
    threads: int
    deterministic: bool
    n_sites: int | None = None
    n_list: tuple[int, ...] | None = None
    profile: dict | None = None
    rho: float | None = None
    t_end: float | None = None
    replicas: int | None = None
    block_ell: int | None = None
    grid_cells: int | None = None
    delta: float | None = None
    ell: int | None = None
    k: int | None = None
    record_events: bool = False
    mc_samples: int | None = None

    def profile_fn(self) -> Profile:
        return Profile(self.profile)

    def science_document(self) -> dict:
        """The fields that determine the outputs (not where/how they run)."""
        doc = {k: v for k, v in asdict(self).items() if v is not None}
        for key in ("out_dir", "threads", "deterministic"):
            doc.pop(key, None)
        return doc

    def config_hash(self) -> str:
        blob = json.dumps(self.science_document(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _require_int(doc, name, problems, *, minimum=None, maximum=None) -> int | None:
    v = doc.get(name)
    if not isinstance(v, int) or isinstance(v, bool):
        problems.append(f"{name}: required integer")
        return None
    if minimum is not None and v < minimum:
        problems.append(f"{name}: must be >= {minimum}")
        return None
    if maximum is not None and v > maximum:
        problems.append(f"{name}: must be <= {maximum}")
        return None
    return v


def _require_number(doc, name, problems, *, positive=False, nonnegative=False) -> float | None:
    v = doc.get(name)
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        problems.append(f"{name}: required number")
        return None
    if positive and v <= 0:
        problems.append(f"{name}: must be positive")
        return None
    if nonnegative and v < 0:
        problems.append(f"{name}: must be nonnegative")
        return None
    return float(v)


def validate_config(document: dict) -> ExperimentConfig:
    """Parse and validate a config document; raises ConfigError listing
    every problem found, each prefixed by the offending field."""
    problems: list[str] = []
    if not isinstance(document, dict):
        raise ConfigError(["config: must be a JSON object"])
    kind = document.get("kind")
    if kind not in KINDS:
        raise ConfigError([f"kind: required, one of {', '.join(KINDS)}"])

    allowed = _COMMON_FIELDS | _KIND_FIELDS[kind]
    unknown = set(document) - allowed
    for name in sorted(unknown):
        problems.append(f"{name}: unknown field for kind {kind!r}")

    out: dict = {
        "kind": kind,
        "master_seed": 0,
        "out_dir": "runs",
        "threads": 1,
        "deterministic": False,
    }
    if "master_seed" in document:
        out["master_seed"] = _require_int(document, "master_seed", problems, minimum=0)
    if "out_dir" in document:
        if not isinstance(document["out_dir"], str) or not document["out_dir"]:
            problems.append("out_dir: must be a nonempty string")
        else:
            out["out_dir"] = document["out_dir"]
    if "threads" in document:
        out["threads"] = _require_int(document, "threads", problems, minimum=1)
    if "deterministic" in document:
        if not isinstance(document["deterministic"], bool):
            problems.append("deterministic: must be a boolean")
        else:
            out["deterministic"] = document["deterministic"]

    profile: Profile | None = None
    if "profile" in document:
        profile = _validate_profile(document["profile"], problems)
        if profile is not None:
            out["profile"] = dict(document["profile"])

    if kind == "simulate":
        out["n_sites"] = _require_int(document, "n_sites", problems, minimum=2)
        if ("profile" in document) == ("rho" in document):
            problems.append("profile/rho: simulate needs exactly one of the two")
        elif "rho" in document:
            rho = _require_number(document, "rho", problems)
            if rho is not None and not 0.0 < rho <= 1.0:
                problems.append("rho: must lie in (0, 1]")
            else:
                out["rho"] = rho
        out["t_end"] = _require_number(document, "t_end", problems, positive=True)
        out["replicas"] = (
            _require_int(document, "replicas", problems, minimum=1)
            if "replicas" in document
            else 1
        )
        if "record_events" in document:
            if not isinstance(document["record_events"], bool):
                problems.append("record_events: must be a boolean")
            else:
                out["record_events"] = document["record_events"]

    elif kind == "pde":
        out["grid_cells"] = _require_int(document, "grid_cells", problems, minimum=2)
        if profile is None and "profile" not in document:
            problems.append("profile: required for pde")
        out["t_end"] = _require_number(document, "t_end", problems, nonnegative=True)
        if profile is not None and profile.range[0] <= 0.5:
            problems.append("profile: the equation is solved only above density 1/2")

    elif kind == "hydro-compare":
        out["n_sites"] = _require_int(document, "n_sites", problems, minimum=2)
        if profile is None and "profile" not in document:
            problems.append("profile: required for hydro-compare")
        out["t_end"] = _require_number(document, "t_end", problems, positive=True)
        out["replicas"] = _require_int(document, "replicas", problems, minimum=1)
        out["block_ell"] = _require_int(document, "block_ell", problems, minimum=1)
        out["grid_cells"] = _require_int(document, "grid_cells", problems, minimum=2)
        if profile is not None and profile.range[0] <= 0.5:
            problems.append(
                "profile: hydro-compare requires a profile strictly above density 1/2"
            )
        if (
            out["n_sites"] is not None
            and out["grid_cells"] is not None
            and out["n_sites"] % out["grid_cells"]
        ):
            problems.append("grid_cells: must divide n_sites")
        if (
            out["n_sites"] is not None
            and out["block_ell"] is not None
            and 2 * out["block_ell"] + 1 > out["n_sites"]
        ):
            problems.append("block_ell: averaging window must fit in the lattice")

    elif kind == "transience":
        nl = document.get("n_list")
        if (
            not isinstance(nl, list)
            or not nl
            or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 4 for v in nl)
            or any(b <= a for a, b in zip(nl, nl[1:]))
        ):
            problems.append("n_list: required strictly increasing list of integers >= 4")
        else:
            out["n_list"] = tuple(nl)
        if profile is None and "profile" not in document:
            problems.append("profile: required for transience")
        if profile is not None and (profile.range[0] <= 0.5 or profile.range == (1.0, 1.0)):
            problems.append(
                "profile: transience requires a profile above 1/2 and not identically 1"
            )
        out["replicas"] = _require_int(document, "replicas", problems, minimum=1)
        if "delta" in document:
            d = _require_number(document, "delta", problems)
            if d is not None and not 0.0 < d < 1.0:
                problems.append("delta: must lie in (0, 1)")
            else:
                out["delta"] = d
        else:
            out["delta"] = 0.1
        if "ell" in document:
            out["ell"] = _require_int(document, "ell", problems, minimum=2)
        out["t_end"] = (
            _require_number(document, "t_end", problems, positive=True)
            if "t_end" in document
            else 10.0
        )

    elif kind == "measure-table":
        rho = _require_number(document, "rho", problems)
        if rho is not None and not 0.5 < rho < 1.0:
            problems.append("rho: must lie in (1/2, 1)")
        else:
            out["rho"] = rho
        out["ell"] = _require_int(document, "ell", problems, minimum=1, maximum=12)
        out["n_sites"] = _require_int(document, "n_sites", problems, minimum=2, maximum=20)
        out["k"] = _require_int(document, "k", problems, minimum=1)
        if out["n_sites"] is not None and out["k"] is not None:
            if not out["n_sites"] / 2 < out["k"] <= out["n_sites"]:
                problems.append("k: must lie in (n_sites / 2, n_sites]")
        out["mc_samples"] = (
            _require_int(document, "mc_samples", problems, minimum=100)
            if "mc_samples" in document
            else 100_000
        )

    if problems:
        raise ConfigError(problems)
    return ExperimentConfig(**out)


# ---------------------------------------------------------------------------
# Atomic output writing


def _write_atomic(path: str, data: bytes) -> None:
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(data)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _dump_json(obj) -> bytes:
    return (json.dumps(obj, sort_keys=True, indent=2) + "\n").encode()


@dataclass
class RunManifest:
    """Audit record of one run: config identity, seeds, and output digests."""

    kind: str
    version: str
    config: dict
    config_hash: str
    master_seed: int
    replica_seeds: list[dict]
    kernel: str
    outputs: list[dict] = field(default_factory=list)
    started_at: str | None = None
    finished_at: str | None = None
    failures: list[str] = field(default_factory=list)

    def to_json(self) -> bytes:
        return _dump_json(asdict(self))


class _OutputSink:
    def __init__(self, out_dir: str):
        self.out_dir = out_dir
        self.records: list[dict] = []
        os.makedirs(out_dir, exist_ok=True)

    def write(self, name: str, data: bytes) -> None:
        path = os.path.join(self.out_dir, name)
        _write_atomic(path, data)
        self.records.append(
            {
                "path": name,
                "bytes": len(data),
                "sha256": hashlib.sha256(data).hexdigest(),
            }
        )


def _seed_records(master_seed: int, replica_keys: list[int]) -> list[dict]:
    out = []
    for key in replica_keys:
        ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(key,))
        words = [int(w) for w in ss.generate_state(4)]
        out.append({"replica": key, "state": words})
    return out


# ---------------------------------------------------------------------------
# Replica workers (top-level so they survive pickling)


def _simulate_worker(args: tuple) -> dict:
    n_sites, profile_spec, rho, t_end, record, master_seed, replica = args
    from ._rand import replica_rng

    rng = replica_rng(master_seed, replica)
    if profile_spec is not None:
        prof = Profile(profile_spec)
        occ = measures.sample_profile(prof, n_sites, rng, enforce_range=False)
    else:
        occ = (rng.random(n_sites) < rho).astype(np.uint8)
    traj = simulate(occ, t_end, rng, record=record, seed=replica)
    out = {
        "summary": traj.summary(),
        "final": lattice.ExclusionConfig(traj.final.occ).to_string(),
        "events": traj.event_csv() if record else None,
    }
    return out


def _hydro_worker(args: tuple) -> np.ndarray:
    n_sites, profile_spec, t_macro, ell, master_seed, replica = args
    return estimators.hydro_replica_profile(
        n_sites, Profile(profile_spec), t_macro, ell, master_seed, replica
    )


def _transience_worker(args: tuple) -> tuple[float, bool]:
    n_sites, profile_spec, t_max, delta, ell, master_seed, key = args
    return estimators.transience_replica(
        n_sites, Profile(profile_spec), t_max, delta, ell, master_seed, key
    )


def _replica_map(worker, arg_list: list[tuple], threads: int) -> list:
    """Order-preserving map over replica work items."""
    if threads <= 1 or len(arg_list) <= 1:
        return [worker(a) for a in arg_list]
    with ProcessPoolExecutor(max_workers=min(threads, len(arg_list))) as pool:
        return list(pool.map(worker, arg_list))


# ---------------------------------------------------------------------------
# Experiment dispatch


def _run_simulate(cfg: ExperimentConfig, sink: _OutputSink) -> None:
    args = [
        (cfg.n_sites, cfg.profile, cfg.rho, cfg.t_end, cfg.record_events, cfg.master_seed, r)
        for r in range(cfg.replicas)
    ]
    results = _replica_map(_simulate_worker, args, cfg.threads)
    for r, res in enumerate(results):
        sink.write(f"summary_{r}.json", _dump_json(res["summary"]))
        sink.write(f"final_{r}.txt", (res["final"] + "\n").encode())
        if res["events"] is not None:
            sink.write(f"events_{r}.csv", res["events"].encode())


def _run_pde(cfg: ExperimentConfig, sink: _OutputSink) -> None:
    prof = pde.DensityProfile.from_function(cfg.profile_fn(), cfg.grid_cells)
    sol = pde.solve_fde(prof, cfg.t_end)
    sink.write("profile_final.csv", sol.to_csv().encode())
    sink.write(
        "summary.json",
        _dump_json(
            {
                "t_end": cfg.t_end,
                "n_cells": sol.n_cells,
                "mass": sol.mass,
                "min": float(sol.cells.min()),
                "max": float(sol.cells.max()),
            }
        ),
    )


def _run_hydro(cfg: ExperimentConfig, sink: _OutputSink) -> None:
    args = [
        (cfg.n_sites, cfg.profile, cfg.t_end, cfg.block_ell, cfg.master_seed, r)
        for r in range(cfg.replicas)
    ]
    profiles = _replica_map(_hydro_worker, args, cfg.threads)
    hc = estimators.hydro_reduce(
        profiles, cfg.profile_fn(), cfg.t_end, cfg.grid_cells, cfg.block_ell
    )
    sink.write("profile_compare.csv", hc.to_csv().encode())
    sink.write("summary.json", _dump_json(hc.summary()))


def _run_transience(cfg: ExperimentConfig, sink: _OutputSink) -> None:
    n_list = list(cfg.n_list)
    reps = cfg.replicas
    taus: dict[int, np.ndarray] = {}
    regs: dict[int, np.ndarray] = {}
    unreached: dict[int, int] = {}
    ells: dict[int, int] = {}
    for i_n, n in enumerate(n_list):
        ell = cfg.ell if cfg.ell is not None else estimators.default_regularity_window(n)
        ells[n] = ell
        args = [
            (n, cfg.profile, cfg.t_end, cfg.delta, ell, cfg.master_seed, i_n * reps + r)
            for r in range(reps)
        ]
        results = _replica_map(_transience_worker, args, cfg.threads)
        t_arr = np.array([t for t, _ in results])
        regs[n] = np.array([reg for _, reg in results], dtype=bool)
        taus[n] = t_arr
        unreached[n] = int(np.isnan(t_arr).sum())
    report = estimators.TransienceReport(
        n_values=n_list,
        tau_macro=taus,
        regular_flags=regs,
        n_unreached=unreached,
        delta=cfg.delta,
        ell_used=ells,
    )
    for n in n_list:
        sink.write(f"transience_{n}.csv", report.replica_csv(n).encode())
    sink.write("summary.json", _dump_json(report.summary()))


def _run_measure_table(cfg: ExperimentConfig, sink: _OutputSink) -> None:
    rng = np.random.default_rng(
        np.random.SeedSequence(entropy=cfg.master_seed, spawn_key=(0,))
    )
    lines = ["rho,l,P_l_closed,P_l_mc,stderr"]
    for ell in range(1, cfg.ell + 1):
        closed = measures.two_point(cfg.rho, ell)
        wins = measures.sample_gcm_window(cfg.rho, ell + 1, cfg.mc_samples, rng)
        prod = wins[:, 0] * wins[:, -1]
        mc = float(prod.mean())
        err = float(prod.std(ddof=1) / math.sqrt(cfg.mc_samples))
        lines.append(f"{cfg.rho!r},{ell},{closed!r},{mc!r},{err!r}")
    sink.write("two_point.csv", ("\n".join(lines) + "\n").encode())

    lines = ["N,k,sigma,prob"]
    for sigma in measures.enumerate_windows(cfg.ell):
        p = measures.canonical_window_prob(cfg.n_sites, cfg.k, sigma)
        text = "".join(str(int(v)) for v in sigma)
        lines.append(f"{cfg.n_sites},{cfg.k},{text},{p!r}")
    sink.write("canonical_windows.csv", ("\n".join(lines) + "\n").encode())


def verify_checks() -> list[dict]:
    """Fast exact-identity suite: counting, windows, connectivity,
    gradient/conservation, measure formula agreement, stationarity."""
    checks: list[dict] = []

    def add(name: str, ok: bool, detail: str) -> None:
        checks.append({"name": name, "pass": bool(ok), "detail": detail})

    ok = True
    for n in range(3, 13):
        for k in range(1, n):
            brute = 0
            for holes in combinations(range(n), n - k):
                hs = set(holes)
                if all((h + 1) % n not in hs for h in holes):
                    brute += 1
            if lattice.count_hole_isolated(n, k) != brute:
                ok = False
    add("counting-closed-form", ok, "N<=12, brute-force hole placement")

    ok = True
    for n in range(4, 11):
        for k in range(n // 2 + 1, n):
            for ell in range(1, 4):
                for sigma in measures.enumerate_windows(ell):
                    direct = sum(
                        1
                        for eta in lattice.enumerate_ergodic(n, k)
                        if np.array_equal(eta[:ell], sigma)
                    )
                    if lattice.count_with_window(n, k, sigma) != direct:
                        ok = False
    add("window-counting", ok, "N<=10, windows up to length 3")

    ok = all(
        lattice.is_connected(n, k)
        for n in range(3, 11)
        for k in range(n // 2 + 1, n + 1)
    )
    add("component-connectivity", ok, "N<=10, every supercritical count")

    ok = True
    for n in range(2, 9):
        for bits in product((0, 1), repeat=n):
            occ = np.array(bits, dtype=np.uint8)
            cf = current_field(occ)
            if not np.array_equal(cf.j, cf.hval - np.roll(cf.hval, -1)):
                ok = False
            if not np.array_equal(generator_drift(occ), np.roll(cf.j, 1) - cf.j):
                ok = False
    add("gradient-conservation", ok, "exhaustive over all configurations, N<=8")

    worst_rel = 0.0
    for rho in (0.55, 0.65, 0.75, 0.85, 0.95):
        for ell in range(1, 7):
            for sigma in measures.enumerate_windows(ell):
                a = measures.gcm_window_prob(rho, sigma, variant="boundary")
                b = measures.gcm_window_prob(rho, sigma, variant="density")
                if a > 0:
                    worst_rel = max(worst_rel, abs(a - b) / a)
    add("measure-formula-agreement", worst_rel <= 1e-13, f"max relative gap {worst_rel:.2e}")

    worst = 0.0
    for n in range(4, 9):
        pg = measures.PeriodicGcm(n, 0.75)
        worst = max(worst, measures.balance_residuals(pg.prob, n))
        for k in range(n // 2 + 1, n + 1):
            ens = lattice.CanonicalEnsemble(n, k)
            worst = max(worst, measures.balance_residuals(ens.prob, n))
    add("stationarity-balance", worst <= 1e-12, f"max residual {worst:.2e}")

    return checks


def _run_verify(cfg: ExperimentConfig, sink: _OutputSink) -> list[str]:
    checks = verify_checks()
    sink.write("verify.json", _dump_json({"checks": checks}))
    return [c["name"] for c in checks if not c["pass"]]


def run(cfg: ExperimentConfig) -> RunManifest:
    """Execute a validated config; returns the manifest (also written to
    out_dir/manifest.json)."""
    started = None if cfg.deterministic else time.strftime("%Y-%m-%dT%H:%M:%S%z")
    sink = _OutputSink(cfg.out_dir)

    replica_keys: list[int] = []
    if cfg.kind in ("simulate", "hydro-compare"):
        replica_keys = list(range(cfg.replicas))
    elif cfg.kind == "transience":
        replica_keys = list(range(len(cfg.n_list) * cfg.replicas))

    failures: list[str] = []
    if cfg.kind == "simulate":
        _run_simulate(cfg, sink)
    elif cfg.kind == "pde":
        _run_pde(cfg, sink)
    elif cfg.kind == "hydro-compare":
        _run_hydro(cfg, sink)
    elif cfg.kind == "transience":
        _run_transience(cfg, sink)
    elif cfg.kind == "measure-table":
        _run_measure_table(cfg, sink)
    elif cfg.kind == "verify":
        failures = _run_verify(cfg, sink)

    manifest = RunManifest(
        kind=cfg.kind,
        version=__version__,
        config=cfg.science_document(),
        config_hash=cfg.config_hash(),
        master_seed=cfg.master_seed,
        replica_seeds=_seed_records(cfg.master_seed, replica_keys),
        kernel=kernels.IMPLEMENTATION,
        outputs=sink.records,
        started_at=started,
        finished_at=None if cfg.deterministic else time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        failures=failures,
    )
    _write_atomic(os.path.join(cfg.out_dir, "manifest.json"), manifest.to_json())
    return manifest
