"""Seeded perturbation experiments around a base instance.

Every experiment draws each sample from its own PCG64 stream keyed by
(seed, experiment salt, sample index), so reports are byte-identical for
identical parameters and independent of worker count.  TCP_LAB_THREADS > 1
runs per-sample solves in a thread pool; the default is serial.

Row records share one stable column set:

    sample_id, pert_norm_tensor, pert_norm_vec, n_points, max_norm, excess, flags

with None where a column does not apply to the experiment kind.  The excess
column uses the +inf sentinel (serialized as the string "inf") when a sample's
solution set escapes every finite comparison.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import TcpInstance
from .properties import VERDICT_HOLDS, check_copositive, check_r0, int_dual_cone_member
from .solver import (
    STATUS_UNBOUNDED,
    SolverConfig,
    brute_force_oracle,
    hausdorff_excess,
    homogeneous_solve,
    solve,
)
from .tensors import Tensor, as_vector, frobenius, pair_norm

ROW_COLUMNS = ("sample_id", "pert_norm_tensor", "pert_norm_vec", "n_points", "max_norm", "excess", "flags")

# per-experiment stream salts
_SALT_BOUNDEDNESS = 10
_SALT_OPENNESS = 11
_SALT_GENERICITY = 12
_SALT_USC = 13
_SALT_HOELDER = 14
_SALT_STABILITY = 15

# a usc sample is a violation witness when its excess stays this far above
# the perturbation scale: the map jumped instead of shrinking with the radius
USC_VIOLATION_FLOOR = 0.1
USC_VIOLATION_FACTOR = 100.0


def _worker_count() -> int:
    try:
        w = int(os.environ.get("TCP_LAB_THREADS", "1"))
    except ValueError:
        return 1
    return max(1, min(w, 32))


def _map_samples(fn, ids):
    w = _worker_count()
    if w <= 1:
        return [fn(i) for i in ids]
    with ThreadPoolExecutor(max_workers=w) as pool:
        return list(pool.map(fn, ids))


def _json_safe(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


@dataclass(eq=False)
class ExperimentReport:
    kind: str
    params: dict
    rows: list[dict] = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "params": {k: _json_safe(v) for k, v in self.params.items()},
            "rows": [{k: _json_safe(v) for k, v in row.items()} for row in self.rows],
            "summary": {k: _json_safe(v) for k, v in self.summary.items()},
        }

    def json_bytes(self) -> bytes:
        return json.dumps(self.to_json(), sort_keys=True).encode()

    def write_json(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.json_bytes())

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(ROW_COLUMNS)
            for row in self.rows:
                out = []
                for col in ROW_COLUMNS:
                    v = row.get(col)
                    if v is None:
                        out.append("")
                    elif isinstance(v, float):
                        out.append(repr(v))
                    else:
                        out.append(str(v))
                writer.writerow(out)


def _row(sample_id, pt=None, pv=None, n_points=None, max_norm=None, excess=None, flags=()):
    return {
        "sample_id": int(sample_id),
        "pert_norm_tensor": pt,
        "pert_norm_vec": pv,
        "n_points": n_points,
        "max_norm": max_norm,
        "excess": excess,
        "flags": "|".join(flags),
    }


# ---------------------------------------------------------------------------
# ball and sphere sampling


def _tensor_direction(m: int, n: int, rng) -> Tensor:
    g = rng.standard_normal(size=(n,) * m)
    return Tensor(g / float(np.sqrt(np.sum(g**2))))


def tensor_ball(m: int, n: int, radius: float, rng) -> Tensor:
    """Uniform draw from the Frobenius ball of the given radius."""
    d = _tensor_direction(m, n, rng)
    rho = radius * rng.uniform() ** (1.0 / n**m)
    return Tensor(rho * d.array)


def vec_ball(n: int, radius: float, rng) -> np.ndarray:
    g = rng.standard_normal(n)
    g /= float(np.linalg.norm(g))
    return radius * rng.uniform() ** (1.0 / n) * g


def vec_sphere(n: int, radius: float, rng) -> np.ndarray:
    g = rng.standard_normal(n)
    return radius * g / float(np.linalg.norm(g))


def pair_ball(m: int, n: int, radius: float, rng) -> tuple[Tensor, np.ndarray]:
    """Joint draw with pair_norm exactly uniform in the radius ball."""
    D = n**m + n
    g = rng.standard_normal(D)
    g /= float(np.linalg.norm(g))
    rho = radius * rng.uniform() ** (1.0 / D)
    return Tensor((rho * g[: n**m]).reshape((n,) * m)), rho * g[n**m :]


def _max_point_norm(sol) -> float | None:
    if not sol.points:
        return None
    return float(max(np.linalg.norm(p.x) for p in sol.points))


def _sol_flags(sol) -> list[str]:
    flags = [sol.status]
    if sol.posdim_suspect:
        flags.append("posdim")
    return flags


# ---------------------------------------------------------------------------
# experiments


def local_boundedness_probe(
    A: Tensor, a, eps: float, delta: float, samples: int, cfg: SolverConfig
) -> ExperimentReport:
    """Empirical S(eps, delta): solve perturbed instances inside the given balls.

    Meaningful when A is R0 (the solution map is then locally bounded); a
    non-R0 base marks the whole report vacuous but still runs, since watching
    unbounded flags appear is the point of the negative control.
    """
    a = as_vector(a, A.dim)
    if eps < 0 or delta < 0 or samples < 0:
        raise ValueError("eps, delta and samples must be nonnegative")
    base_r0 = check_r0(A, cfg)
    vacuous = base_r0.verdict != VERDICT_HOLDS

    def one(s: int) -> dict:
        rng = np.random.default_rng([cfg.seed, _SALT_BOUNDEDNESS, s])
        dT = tensor_ball(A.order, A.dim, eps, rng)
        db = vec_ball(A.dim, delta, rng)
        sol = solve(TcpInstance(A + dT, a + db), cfg)
        return _row(
            s,
            pt=frobenius(dT),
            pv=float(np.linalg.norm(db)),
            n_points=len(sol.points),
            max_norm=_max_point_norm(sol),
            flags=_sol_flags(sol),
        )

    rows = _map_samples(one, range(samples))
    norms = [r["max_norm"] for r in rows if r["max_norm"] is not None]
    summary = {
        "vacuous": vacuous,
        "base_r0": base_r0.verdict,
        "samples": samples,
        "unbounded_flags": sum(STATUS_UNBOUNDED in r["flags"] for r in rows),
        "empty_count": sum(r["n_points"] == 0 for r in rows),
        "empirical_bound": max(norms) if norms else None,
    }
    return ExperimentReport(
        "local-boundedness",
        {"eps": eps, "delta": delta, "samples": samples, "seed": cfg.seed, "a": a.tolist()},
        rows,
        summary,
    )


def r0_openness_probe(A: Tensor, radii, samples_per_radius: int, cfg: SolverConfig) -> ExperimentReport:
    """Fraction of R0 survivors under sphere perturbations of each radius.

    R0 is an open property, so fractions should hold at 1.0 up to some
    radius; the largest all-pass radius, halved, is the suggested eps for
    downstream probes.
    """
    radii = [float(r) for r in radii]
    if not radii or any(r <= 0 for r in radii):
        raise ValueError("radii must be a nonempty list of positive numbers")
    base_r0 = check_r0(A, cfg)
    vacuous = base_r0.verdict != VERDICT_HOLDS

    jobs = [(i, r, j) for i, r in enumerate(radii) for j in range(samples_per_radius)]

    def one(job) -> dict:
        i, r, j = job
        sid = i * samples_per_radius + j
        rng = np.random.default_rng([cfg.seed, _SALT_OPENNESS, sid])
        B = A + Tensor(r * _tensor_direction(A.order, A.dim, rng).array)
        rep = check_r0(B, cfg)
        return _row(sid, pt=r, flags=[f"radius={r:.12g}", rep.verdict])

    rows = _map_samples(one, jobs)
    fractions = {}
    for i, r in enumerate(radii):
        sub = rows[i * samples_per_radius : (i + 1) * samples_per_radius]
        ok = sum(VERDICT_HOLDS in q["flags"] for q in sub)
        fractions[f"{r:.12g}"] = ok / len(sub) if sub else None
    all_pass = [r for r in radii if fractions[f"{r:.12g}"] == 1.0]
    largest = max(all_pass) if all_pass else None
    summary = {
        "vacuous": vacuous,
        "fractions": fractions,
        "largest_all_pass": largest,
        "suggested_eps": largest / 2 if largest is not None else None,
    }
    return ExperimentReport(
        "r0-openness",
        {"radii": radii, "samples_per_radius": samples_per_radius, "seed": cfg.seed},
        rows,
        summary,
    )


def genericity_sample(m: int, n: int, samples: int, cfg: SolverConfig) -> ExperimentReport:
    """Fraction of Gaussian tensors classified R0, with a Wilson 95% CI."""
    if samples < 0:
        raise ValueError("samples must be nonnegative")

    def one(s: int) -> dict:
        rng_seed = [cfg.seed, _SALT_GENERICITY, s]
        A = Tensor(np.random.default_rng(rng_seed).standard_normal(size=(n,) * m))
        rep = check_r0(A, cfg)
        return _row(s, flags=[rep.verdict])

    rows = _map_samples(one, range(samples))
    hits = sum(VERDICT_HOLDS in r["flags"] for r in rows)
    if samples == 0:
        fraction = ci = None
    else:
        fraction = hits / samples
        z = 1.959963984540054
        denom = 1 + z**2 / samples
        center = (fraction + z**2 / (2 * samples)) / denom
        half = z * math.sqrt(fraction * (1 - fraction) / samples + z**2 / (4 * samples**2)) / denom
        ci = [center - half, center + half]
    summary = {"samples": samples, "r0_count": hits, "fraction": fraction, "ci95": ci}
    return ExperimentReport(
        "genericity", {"m": m, "n": n, "samples": samples, "seed": cfg.seed}, rows, summary
    )


def _reference_points(inst: TcpInstance, sol, cfg: SolverConfig) -> list[np.ndarray]:
    """Comparison set for excess computations against a solved base.

    Isolated points suffice for a finite base; a posdim-flagged base is
    densified with verified grid-oracle cluster members so the excess is not
    measured against an arbitrary sample of a continuum.
    """
    pts = [p.x for p in sol.points]
    if sol.posdim_suspect:
        oracle = brute_force_oracle(inst, cfg.start_box_radius, 0.01, cfg.tol)
        for cluster in oracle.clusters:
            if cluster.verified:
                pts.extend(cluster.members)
    return pts


def usc_probe(inst: TcpInstance, radius: float, samples: int, cfg: SolverConfig) -> ExperimentReport:
    """Excess of perturbed solution sets over the base set, binned by shells.

    Upper semicontinuity shows as max excess shrinking with the perturbation
    radius.  A sample whose excess stays orders of magnitude above its own
    perturbation norm is flagged usc-violation; samples whose solution set is
    certified unbounded carry the +inf sentinel.
    """
    if radius <= 0 or samples < 0:
        raise ValueError("radius must be positive and samples nonnegative")
    base = solve(inst, cfg)
    if not (base.points or base.rays or base.posdim_suspect):
        raise ValueError("usc probe needs a nonempty base solution set")
    reference = _reference_points(inst, base, cfg)
    n_shells = 5

    def one(s: int) -> dict:
        rng = np.random.default_rng([cfg.seed, _SALT_USC, s])
        dT, db = pair_ball(inst.m, inst.n, radius, rng)
        rho = pair_norm(dT, db)
        sol = solve(TcpInstance(inst.tensor + dT, inst.a + db), cfg)
        flags = _sol_flags(sol)
        shell = min(n_shells, int(math.ceil(rho / (radius / n_shells))))
        flags.append(f"shell={shell}")
        if sol.status == STATUS_UNBOUNDED:
            excess = math.inf
        elif not sol.points:
            excess = 0.0
        else:
            excess = hausdorff_excess([p.x for p in sol.points], reference)
        if excess > max(USC_VIOLATION_FLOOR, USC_VIOLATION_FACTOR * rho):
            flags.append("usc-violation")
        return _row(
            s,
            pt=frobenius(dT),
            pv=float(np.linalg.norm(db)),
            n_points=len(sol.points),
            max_norm=_max_point_norm(sol),
            excess=excess,
            flags=flags,
        )

    rows = _map_samples(one, range(samples))
    shell_max: list[float | None] = []
    for k in range(1, n_shells + 1):
        vals = [r["excess"] for r in rows if f"shell={k}" in r["flags"]]
        shell_max.append(max(vals) if vals else None)
    summary = {
        "samples": samples,
        "reference_size": len(reference),
        "max_excess_by_shell": shell_max,
        "violation_count": sum("usc-violation" in r["flags"] for r in rows),
        "sentinel_count": sum(isinstance(r["excess"], float) and math.isinf(r["excess"]) for r in rows),
    }
    return ExperimentReport(
        "usc", {"radius": radius, "samples": samples, "seed": cfg.seed}, rows, summary
    )


def _fit_loglog(xs: list[float], es: list[float]) -> dict:
    """Least-squares fit log e = log gamma + c log x over positive pairs."""
    pairs = [(x, e) for x, e in zip(xs, es) if x > 0 and e > 1e-12 and math.isfinite(e)]
    if not pairs:
        return {"gamma": 0.0, "c": 0.0, "log_residual": 0.0, "exact_stability": True, "fit_points": 0}
    if len(pairs) == 1:
        x, e = pairs[0]
        return {"gamma": e, "c": 0.0, "log_residual": 0.0, "exact_stability": False,
                "fit_points": 1, "degenerate_fit": True}
    lx = np.log([p[0] for p in pairs])
    le = np.log([p[1] for p in pairs])
    c, intercept = np.polyfit(lx, le, 1)
    resid = float(np.sqrt(np.mean((c * lx + intercept - le) ** 2)))
    return {
        "gamma": float(np.exp(intercept)),
        "c": float(c),
        "log_residual": resid,
        "exact_stability": False,
        "fit_points": len(pairs),
    }


def hoelder_fit(A: Tensor, a, radii, samples_per_radius: int, cfg: SolverConfig) -> ExperimentReport:
    """Fit a local upper-Hoelder law excess <= gamma * r^c around (A, a).

    Right-hand sides are drawn on spheres of each radius; for each radius the
    max excess over samples enters a log-log least-squares fit.  Radii
    spanning under 1.5 decades, or fewer than 4 radii, set low_confidence.
    """
    a = as_vector(a, A.dim)
    radii = sorted(float(r) for r in radii)
    if not radii or radii[0] <= 0:
        raise ValueError("radii must be a nonempty list of positive numbers")
    hom = homogeneous_solve(A, cfg)  # the tensor is fixed across the sweep
    base = solve(TcpInstance(A, a), cfg, hom=hom)
    if not base.points or base.posdim_suspect:
        raise ValueError("hoelder fit needs a nonempty finite base solution set")
    reference = [p.x for p in base.points]

    jobs = [(i, r, j) for i, r in enumerate(radii) for j in range(samples_per_radius)]

    def one(job) -> dict:
        i, r, j = job
        sid = i * samples_per_radius + j
        rng = np.random.default_rng([cfg.seed, _SALT_HOELDER, sid])
        b = a + vec_sphere(A.dim, r, rng)
        sol = solve(TcpInstance(A, b), cfg, hom=hom)
        if sol.status == STATUS_UNBOUNDED:
            excess = math.inf
        else:
            excess = hausdorff_excess([p.x for p in sol.points], reference)
        return _row(
            sid,
            pv=r,
            n_points=len(sol.points),
            max_norm=_max_point_norm(sol),
            excess=excess,
            flags=_sol_flags(sol),
        )

    rows = _map_samples(one, jobs)
    e_by_radius = {}
    for i, r in enumerate(radii):
        sub = rows[i * samples_per_radius : (i + 1) * samples_per_radius]
        vals = [q["excess"] for q in sub]
        e_by_radius[f"{r:.12g}"] = max(vals) if vals else None
    fit = _fit_loglog(radii, [e_by_radius[f"{r:.12g}"] or 0.0 for r in radii])
    span = math.log10(radii[-1] / radii[0]) if len(radii) > 1 else 0.0
    summary = dict(fit)
    summary.update(
        {
            "e_by_radius": e_by_radius,
            "span_decades": span,
            "low_confidence": span < 1.5 or len(radii) < 4,
        }
    )
    return ExperimentReport(
        "hoelder",
        {"radii": radii, "samples_per_radius": samples_per_radius, "seed": cfg.seed, "a": a.tolist()},
        rows,
        summary,
    )


def stability_inclusion_check(
    A: Tensor, a, eps: float, samples: int, cfg: SolverConfig
) -> ExperimentReport:
    """Nonemptiness, boundedness and Hoelder-type inclusion under copositive drift.

    Precondition: a lies in the interior of the dual of the homogeneous
    solution cone (tested against the sampled rays; vacuous report if not).
    Each sample draws a copositive-verified tensor B within eps (rejection
    sampling capped at 20x the requested count) and a shifted b within eps,
    then checks that Sol(B, a) and Sol(B, b) are nonempty without unbounded
    flags and fits excess against ||B - A|| + ||b - a||.
    """
    a = as_vector(a, A.dim)
    if eps <= 0 or samples < 0:
        raise ValueError("eps must be positive and samples nonnegative")
    hom = homogeneous_solve(A, cfg)
    member = int_dual_cone_member([r.direction for r in hom.rays], a, cfg.tol)
    params = {"eps": eps, "samples": samples, "seed": cfg.seed, "a": a.tolist()}
    if not member:
        return ExperimentReport(
            "stability",
            params,
            [],
            {"vacuous": True, "reason": "a is not interior to the dual of the solution cone"},
        )
    base = solve(TcpInstance(A, a), cfg, hom=hom)
    reference = [p.x for p in base.points]

    budget = 20 * samples
    attempts = 0
    rows: list[dict] = []
    pert_sizes: list[float] = []
    excesses: list[float] = []
    violations = 0
    for s in range(samples):
        rng = np.random.default_rng([cfg.seed, _SALT_STABILITY, s])
        B = None
        rejected = 0
        while attempts < budget:
            attempts += 1
            cand = A + tensor_ball(A.order, A.dim, eps, rng)
            if check_copositive(cand, cfg).verdict == VERDICT_HOLDS:
                B = cand
                break
            rejected += 1
        if B is None:
            break
        b = a + vec_ball(A.dim, eps, rng)
        sol_a = solve(TcpInstance(B, a), cfg)
        sol_b = solve(TcpInstance(B, b), cfg)
        flags = []
        bad = False
        for tag, sol in (("a", sol_a), ("b", sol_b)):
            nonempty = bool(sol.points or sol.posdim_suspect)
            if not nonempty:
                flags.append(f"empty-{tag}")
                bad = True
            if sol.status == STATUS_UNBOUNDED:
                flags.append(f"unbounded-{tag}")
                bad = True
        if rejected:
            flags.append(f"rejected={rejected}")
        violations += bad
        excess = hausdorff_excess([p.x for p in sol_b.points], reference) if reference else math.inf
        size = frobenius(B - A) + float(np.linalg.norm(b - a))
        pert_sizes.append(size)
        excesses.append(excess)
        rows.append(
            _row(
                s,
                pt=frobenius(B - A),
                pv=float(np.linalg.norm(b - a)),
                n_points=len(sol_b.points),
                max_norm=_max_point_norm(sol_b),
                excess=excess,
                flags=flags or ["ok"],
            )
        )

    fit = _fit_loglog(pert_sizes, excesses)
    summary = dict(fit)
    summary.update(
        {
            "vacuous": False,
            "violations": violations,
            "collected": len(rows),
            "attempts": attempts,
            "inconclusive": len(rows) < samples,
        }
    )
    return ExperimentReport("stability", params, rows, summary)
