"""Acceptance gate: one test per release criterion, run in file order.

Each test asserts its criterion at the stated tolerance and prints a PASS
line with the measured numbers (visible with -s, or on failure).  The point
counts observed by criteria 1-5 feed the cardinality check in criterion 6.
"""

import json
import math
import time

import numpy as np
import pytest

from tcplab import (
    KktPoint,
    SolverConfig,
    TcpInstance,
    Tensor,
    brute_force_oracle,
    builtin_example,
    chi_bound,
    contract,
    face_of,
    form,
    genericity_sample,
    golden_suite,
    hausdorff_excess,
    hoelder_fit,
    homogeneous_solve,
    kkt_residual,
    local_boundedness_probe,
    max_residual,
    non_r0_witness,
    r0_openness_probe,
    random_gaussian,
    scale,
    solve,
    stability_inclusion_check,
)

CHI_32 = 118098
_POINT_COUNTS: list[int] = []


def _note(count: int) -> None:
    _POINT_COUNTS.append(int(count))


def _golden_point_count(detail: str) -> int:
    seg = detail.split("points=[", 1)[1].split("]", 1)[0]
    return seg.count("(")


def test_criterion_1_golden_closed_form_suite():
    t0 = time.perf_counter()
    rows, ok = golden_suite(SolverConfig())
    dt = time.perf_counter() - t0
    for row in rows:
        assert row["pass"], f"{row['name']}: {row['detail']}"
        _note(_golden_point_count(row["detail"]))
    assert ok
    assert dt < 10.0
    print(f"PASS criterion-1 golden suite {len(rows)}/{len(rows)} rows in {dt:.2f}s")


def test_criterion_2_oracle_equivalence_on_random_instances():
    t0 = time.perf_counter()
    cfg = SolverConfig()
    compared = skipped = 0
    worst = 0.0
    for i in range(50):
        A = random_gaussian(3, 2, [40, i])
        a = np.random.default_rng([41, i]).standard_normal(2)
        inst = TcpInstance(A, a)
        sol = solve(inst, cfg)
        _note(len(sol.points))
        if sol.posdim_suspect:
            skipped += 1
            continue
        orc = brute_force_oracle(inst, box_radius=5.0, grid_step=0.01, tol=cfg.tol)
        # the oracle observes [0, 5]^n only, so compare inside the box
        S = [p.x for p in sol.points if float(np.max(p.x)) <= 5.0]
        R = [np.asarray(r) for r in orc.representatives]
        d = max(hausdorff_excess(S, R), hausdorff_excess(R, S))
        assert d <= 1e-3, f"instance {i}: two-sided excess {d:.3e}"
        worst = max(worst, d)
        compared += 1
    dt = time.perf_counter() - t0
    assert dt < 300.0
    assert compared + skipped == 50
    assert compared >= 45  # posdim draws are measure-zero; a pile-up is a bug
    print(
        f"PASS criterion-2 oracle agreement on {compared}/50 instances"
        f" (skipped {skipped} posdim), worst excess {worst:.2e}, {dt:.1f}s"
    )


def test_criterion_3_r0_classification_with_certificates():
    from tcplab import check_r0

    cfg = SolverConfig()
    for name in ("ex1", "gus"):
        assert check_r0(builtin_example(name).tensor, cfg).holds, name

    failures = []
    cases = [("zero", Tensor.zeros(3, 2))]
    for alpha in ((), (1,), (2,)):
        for seed in (0, 1):
            cases.append((f"alpha={alpha} seed={seed}", non_r0_witness(3, 2, alpha, seed)))
    for label, W in cases:
        report = check_r0(W, cfg)
        if report.verdict != "fails":
            failures.append(label)
            continue
        ray = np.array(report.certificate["ray"])
        res = max_residual(TcpInstance(W, np.zeros(2)), ray)
        assert res <= 1e-6, f"{label}: certificate residual {res:.2e}"
    assert not failures, failures
    print(f"PASS criterion-3 r0 classification on {2 + len(cases)} tensors")


def test_criterion_4_gaussian_tensors_are_almost_surely_r0():
    cfg = SolverConfig()
    fr_cubic = genericity_sample(3, 2, 200, cfg).summary["fraction"]
    fr_matrix = genericity_sample(2, 2, 200, cfg).summary["fraction"]
    assert fr_cubic >= 0.99
    assert fr_matrix >= 0.99
    print(f"PASS criterion-4 r0 fractions m=3: {fr_cubic:.3f}, m=2: {fr_matrix:.3f}")


def test_criterion_5_openness_radius_keeps_perturbed_norms_bounded():
    A = builtin_example("ex1").tensor
    openness = r0_openness_probe(A, (0.5, 0.2, 0.1, 0.05), 25, SolverConfig())
    eps = openness.summary["suggested_eps"]
    assert eps is not None and eps > 0.0
    bounds = []
    for seed in (0, 1):
        report = local_boundedness_probe(A, (1.0, 1.0), eps, eps, 100, SolverConfig(seed=seed))
        assert not report.summary["vacuous"]
        assert report.summary["unbounded_flags"] == 0
        for row in report.rows:
            _note(row["n_points"])
        b = report.summary["empirical_bound"]
        assert b is not None and math.isfinite(b)
        bounds.append(b)
    spread = abs(bounds[0] - bounds[1]) / max(bounds)
    assert spread <= 0.10, f"max-norm spread {spread:.3f} across seeds"
    print(
        f"PASS criterion-5 eps={eps} bounds={bounds[0]:.4f}/{bounds[1]:.4f}"
        f" spread={spread:.3%}"
    )


def test_criterion_6_component_bound_holds_everywhere():
    assert chi_bound(3, 2) == CHI_32
    if not _POINT_COUNTS:
        # standalone invocation: gather counts from a fresh sweep
        cfg = SolverConfig()
        for i in range(10):
            inst = TcpInstance(random_gaussian(3, 2, [40, i]), np.random.default_rng([41, i]).standard_normal(2))
            _note(len(solve(inst, cfg).points))
    worst = max(_POINT_COUNTS)
    assert worst <= CHI_32
    print(f"PASS criterion-6 chi(3,2)={CHI_32}, max observed points {worst} over {len(_POINT_COUNTS)} solves")


def test_criterion_7_hoelder_fit_recovers_lipschitz_rate():
    t0 = time.perf_counter()
    report = hoelder_fit(
        builtin_example("gus").tensor,
        (-1.0, -1.0),
        (0.2, 0.1, 0.05, 0.02, 0.01),
        30,
        SolverConfig(),
    )
    dt = time.perf_counter() - t0
    c = report.summary["c"]
    resid = report.summary["log_residual"]
    assert 0.85 <= c <= 1.15, f"fitted exponent {c}"
    assert resid < 0.1, f"fit residual {resid}"
    assert dt < 60.0
    print(f"PASS criterion-7 c={c:.4f} residual={resid:.4f} in {dt:.1f}s")


def test_criterion_8_stability_inclusion_under_copositive_drift():
    report = stability_inclusion_check(
        builtin_example("gus").tensor, (1.0, 1.0), 0.05, 50, SolverConfig()
    )
    s = report.summary
    assert not s["vacuous"]
    assert not s["inconclusive"]
    assert s["collected"] == 50
    assert s["violations"] == 0
    assert math.isfinite(s["gamma"]) and math.isfinite(s["c"])
    print(
        f"PASS criterion-8 0 violations over {s['collected']} samples,"
        f" gamma={s['gamma']:.4g} c={s['c']:.4g}"
    )


# ---------------------------------------------------------------------------
# criterion 9: 10^4 randomized invariant trials per seed, two distinct seeds


def _homogeneity_trials(seed: int, budget: int) -> int:
    rng = np.random.default_rng([90, seed])
    for _ in range(budget):
        m = int(rng.integers(2, 5))
        n = int(rng.integers(2, 4))
        A = random_gaussian(m, n, rng)
        x = rng.uniform(-2.0, 2.0, size=n)
        t = float(rng.uniform(0.0, 3.0))
        lhs = contract(A, t * x)
        rhs = t ** (m - 1) * contract(A, x)
        assert np.abs(lhs - rhs).max() <= 1e-10 * max(1.0, float(np.abs(rhs).max()))
        fl, fr = form(A, t * x), t**m * form(A, x)
        assert abs(fl - fr) <= 1e-10 * max(1.0, abs(fr))
    return budget


def _kkt_trials(seed: int, budget: int) -> int:
    cfg = SolverConfig(seed=seed)
    rng = np.random.default_rng([91, seed])
    done = 0
    # forward direction on real solver output: the natural multiplier of an
    # emitted point must be a valid KKT pair at solver tolerance
    for _ in range(20):
        inst = TcpInstance(random_gaussian(3, 2, rng), rng.normal(size=2))
        for p in solve(inst, cfg).points:
            assert kkt_residual(inst, KktPoint(p.x, inst.F(p.x))) <= 10 * cfg.tol
            done += 1
    while done < budget:
        m = int(rng.integers(2, 4))
        n = int(rng.integers(2, 4))
        A = random_gaussian(m, n, rng)
        # backward direction: an exactly complementary KKT pair is a solution
        x = np.where(rng.random(n) < 0.4, 0.0, rng.uniform(0.1, 2.0, size=n))
        lam = np.where(x > 0.0, 0.0, np.abs(rng.normal(size=n)))
        inst = TcpInstance(A, lam - contract(A, x))
        assert kkt_residual(inst, KktPoint(x, lam)) <= 1e-12
        assert max_residual(inst, x) <= 1e-12 * (1.0 + float(np.abs(x).sum()))
        done += 1
        if done >= budget:
            break
        # and the KKT violation with the natural multiplier is exactly the
        # solution residual, on arbitrary probe points
        y = np.abs(rng.normal(size=n))
        assert kkt_residual(inst, KktPoint(y, inst.F(y))) == pytest.approx(
            max_residual(inst, y), abs=1e-15
        )
        done += 1
    return done


def _cone_scaling_trials(seed: int, budget: int) -> int:
    cfg = SolverConfig(seed=seed)
    rng = np.random.default_rng([92, seed])
    pool = [Tensor.zeros(3, 2), Tensor.zeros(2, 3)]
    for k, alpha in enumerate(((), (1,), (2,), (1, 2))):
        pool.append(non_r0_witness(3, 3, alpha, seed=seed * 50 + k))
    for k, alpha in enumerate(((), (1,), (2,))):
        pool.append(non_r0_witness(3, 2, alpha, seed=seed * 50 + 10 + k))
    diag = np.zeros((3, 3, 3))
    diag[0, 0, 0] = 1.0
    diag[0, 1, 1] = -1.0
    pool.append(Tensor(diag))  # curve of homogeneous rays, Newton path

    rays = []
    for A in pool:
        hom = homogeneous_solve(A, cfg)
        rays.extend((A, r.direction) for r in hom.rays)
    assert rays

    done = 0
    set_comparisons = 25
    while done < budget - set_comparisons:
        A, r = rays[int(rng.integers(0, len(rays)))]
        if rng.random() < 0.5:
            t = float(rng.choice([0.5, 1.0, 2.0, 10.0]))
        else:
            t = float(rng.uniform(0.1, 10.0))
        assert max_residual(TcpInstance(A, np.zeros(A.dim)), t * r) <= cfg.tol
        done += 1
    for j in range(set_comparisons):
        A = pool[j % len(pool)]
        t = (1.7, 3.0, 0.25)[j % 3]
        s1 = homogeneous_solve(A, cfg)
        s2 = homogeneous_solve(scale(t, A), cfg)
        assert s1.posdim_suspect == s2.posdim_suspect
        # isolated rays must agree pointwise; a ray whose own face is flagged
        # positive-dimensional is one sample of a continuum, so those are
        # compared by cross-membership instead of by coordinates
        d1 = sorted(
            r.direction.tolist()
            for r in s1.rays
            if face_of(r.direction, cfg.tol) not in s1.posdim_suspect
        )
        d2 = sorted(
            r.direction.tolist()
            for r in s2.rays
            if face_of(r.direction, cfg.tol) not in s2.posdim_suspect
        )
        assert len(d1) == len(d2)
        for u, v in zip(d1, d2):
            assert np.abs(np.array(u) - np.array(v)).max() <= 1e-8
        assert len(s1.rays) == len(s2.rays)
        i1 = TcpInstance(A, np.zeros(A.dim))
        i2 = TcpInstance(scale(t, A), np.zeros(A.dim))
        for r in s1.rays:
            assert max_residual(i2, r.direction) <= 10 * cfg.tol
        for r in s2.rays:
            assert max_residual(i1, r.direction) <= 10 * cfg.tol
        done += 1
    return done


def _determinism_trials(seed: int, budget: int) -> int:
    cfg = SolverConfig(seed=seed)
    rng = np.random.default_rng([93, seed])
    for _ in range(budget):
        m = int(rng.integers(2, 4))
        inst = TcpInstance(random_gaussian(m, 2, rng), rng.normal(size=2))
        s1 = json.dumps(solve(inst, cfg).to_json(), sort_keys=True)
        s2 = json.dumps(solve(inst, cfg).to_json(), sort_keys=True)
        assert s1 == s2  # byte-identical, ordering included
    return budget


def test_criterion_9_invariant_suites_two_seeds():
    totals = {}
    for seed in (0, 1):
        n = 0
        n += _homogeneity_trials(seed, 4000)
        n += _kkt_trials(seed, 3800)
        n += _cone_scaling_trials(seed, 2000)
        n += _determinism_trials(seed, 200)
        assert n >= 10_000
        totals[seed] = n
    print(f"PASS criterion-9 invariant trials per seed: {totals}")
