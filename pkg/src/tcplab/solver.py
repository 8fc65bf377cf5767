"""Pseudo-face enumeration solver for complementarity instances.

Every face of the nonnegative orthant contributes a square polynomial
system (model.FaceSystem); the solver runs a multistart damped Newton on
each, filters roots by the face sign conditions, and merges the survivors.
Unboundedness is probed through the homogeneous problem TCP(A, 0): its
nonzero solutions on the probability simplex are the candidate recession
directions, and a direction is kept for a concrete right-hand side only
when the far tail of its ray actually solves the instance.

The brute-force grid oracle at the bottom is an independent check path:
it never reuses Newton roots, only polishes grid clusters.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import ndimage

from .model import (
    FaceMask,
    FaceSystem,
    TcpInstance,
    enumerate_faces,
    face_of,
    face_system,
    max_residual,
)
from .tensors import Tensor, as_vector, contract, contract_jacobian, frobenius, scale

STATUS_EMPTY = "exact-empty"
STATUS_FINITE = "finite"
STATUS_NON_ISOLATED = "non-isolated"
STATUS_UNBOUNDED = "unbounded-suspect"

# a face is suspected to carry a positive-dimensional component when more
# than this many deduplicated roots survive on it, or when the system
# Jacobian at a root is rank-deficient beyond SIGMA_RATIO
POSDIM_ROOT_LIMIT = 25
SIGMA_RATIO = 1e-6

RANDOM_STARTS = 16
GRID_START_BUDGET = 3200
NEWTON_ATOL = 1e-14

ORACLE_BUDGET = 10**8
ORACLE_VERIFY_TOL = 1e-7
ORACLE_MEMBER_CAP = 10_000


class FaceSolveError(RuntimeError):
    """Numeric failure (non-finite evaluation) on a specific face."""

    def __init__(self, face: FaceMask, message: str):
        super().__init__(f"face {face.to_json()}: {message}")
        self.face = face


class BudgetError(RuntimeError):
    """A requested computation exceeds the desk-scale resource budget."""


@dataclass(frozen=True)
class SolverConfig:
    tol: float = 1e-8
    dedup_radius: float = 1e-5
    newton_max_iter: int = 100
    grid_starts_per_axis: int = 9
    start_box_radius: float = 5.0
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0 or self.dedup_radius <= 0 or self.start_box_radius <= 0:
            raise ValueError("tolerances and the start box must be positive")
        if self.tol >= self.dedup_radius:
            raise ValueError("tol must be smaller than dedup_radius")
        if self.newton_max_iter < 1 or self.grid_starts_per_axis < 2:
            raise ValueError("iteration and start counts must be positive")
        if self.seed < 0:
            raise ValueError("seed must be a nonnegative integer")


@dataclass(frozen=True, eq=False)
class SolutionPoint:
    x: np.ndarray
    face: FaceMask
    kkt_res: float

    def to_json(self) -> dict:
        return {"x": self.x.tolist(), "face": self.face.to_json(), "kkt_res": self.kkt_res}


@dataclass(frozen=True, eq=False)
class Ray:
    direction: np.ndarray
    face: FaceMask

    def to_json(self) -> dict:
        return {"direction": self.direction.tolist(), "face": self.face.to_json()}


@dataclass(eq=False)
class SolutionSet:
    points: list[SolutionPoint]
    rays: list[Ray]
    posdim_suspect: list[FaceMask]
    status: str
    meta: dict = field(default_factory=dict)

    @property
    def point_array(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 0))
        return np.stack([p.x for p in self.points])

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "points": [p.to_json() for p in self.points],
            "rays": [r.to_json() for r in self.rays],
            "posdim_suspect": [f.to_json() for f in self.posdim_suspect],
            "meta": self.meta,
        }


# ---------------------------------------------------------------------------
# Newton engine


def _newton_polish(fun, jac, z0, max_iter, face: FaceMask):
    """Damped Newton with Armijo backtracking on the squared residual.

    Rectangular or singular Jacobians fall back to least-squares steps, so
    the same loop serves square face systems and the simplex-augmented
    homogeneous systems.  Returns (z, residual_inf, iterations).
    """
    z = np.asarray(z0, dtype=float)
    f = fun(z)
    # a single squared-norm scalar doubles as the finiteness probe: any
    # nan/inf in f makes phi non-finite
    phi0 = float(f @ f) if f.size else 0.0
    if not math.isfinite(phi0):
        raise FaceSolveError(face, "non-finite residual at a finite start point")
    iters = 0
    stalled = 0
    for it in range(max_iter):
        ninf = float(np.max(np.abs(f))) if f.size else 0.0
        if ninf <= NEWTON_ATOL:
            break
        J = jac(z)
        step = None
        if J.shape[0] == J.shape[1]:
            try:
                step = np.linalg.solve(J, -f)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and not math.isfinite(float(step @ step)):
                step = None
        if step is None:
            step = np.linalg.lstsq(J, -f, rcond=None)[0]
        snorm = float(step @ step)
        if not math.isfinite(snorm) or snorm == 0.0:
            break
        t = 1.0
        moved = False
        while t >= 2.0**-30:
            zt = z + t * step
            ft = fun(zt)
            phit = float(ft @ ft)
            if math.isfinite(phit) and phit <= (1.0 - 1e-4 * t) * phi0:
                # converging to a root of any multiplicity q contracts phi by
                # at least (1-1/q)^(2q) < 0.14 per full step; sustained ratios
                # near 1 mean a positive-residual floor with no root below
                stalled = stalled + 1 if phit > 0.5 * phi0 else 0
                z, f, phi0 = zt, ft, phit
                moved = True
                break
            t *= 0.5
        iters = it + 1
        if not moved or stalled >= 12:
            break
    ninf = float(np.max(np.abs(f))) if f.size else 0.0
    return z, ninf, iters


def _grid_starts(k: int, box: float, per_axis: int) -> np.ndarray:
    """Deterministic start grid over [0, box]^k, capped by GRID_START_BUDGET."""
    if k == 0:
        return np.zeros((1, 0))
    g = per_axis
    while g > 2 and g**k > GRID_START_BUDGET:
        g -= 1
    axes = np.linspace(0.0, box, g)
    mesh = np.meshgrid(*([axes] * k), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _random_starts(k: int, box: float, seed: int, mask: int, salt: int) -> np.ndarray:
    rng = np.random.default_rng([seed, mask, salt])
    return rng.uniform(0.0, box, size=(RANDOM_STARTS, k))


def _simplex_starts(k: int, resolution: int = 6) -> np.ndarray:
    """Lattice of the probability simplex: compositions of resolution into k."""
    if k == 1:
        return np.ones((1, 1))
    pts = []
    for bars in itertools.combinations(range(resolution + k - 1), k - 1):
        parts, prev = [], -1
        for b in bars:
            parts.append(b - prev - 1)
            prev = b
        parts.append(resolution + k - 2 - prev)
        pts.append(parts)
    return np.asarray(pts, dtype=float) / resolution


def _dedup(candidates: list[tuple[np.ndarray, float]], radius: float) -> list[np.ndarray]:
    """Greedy dedup in inf-norm, best residual first; deterministic order."""
    ranked = sorted(candidates, key=lambda c: (c[1], tuple(c[0])))
    kept: list[np.ndarray] = []
    for z, _ in ranked:
        if all(float(np.max(np.abs(z - w))) > radius for w in kept):
            kept.append(z)
    return kept


# ---------------------------------------------------------------------------
# ray tests


def coordinate_ray_solves(inst: TcpInstance, i: int, tol: float) -> bool:
    """Whether the whole ray {t * e_i : t > 0} solves the instance.

    Along the ray only pure powers of x_i survive, so with c_j = A[j, i, .., i]
    the conditions reduce to c_i = a_i = 0 (complementarity on the free
    coordinate) and c_j >= 0, a_j >= 0 elsewhere, all within tol.
    """
    arr = inst.tensor.array
    c = arr[(slice(None),) + (i,) * (inst.m - 1)]
    if abs(c[i]) > tol or abs(inst.a[i]) > tol:
        return False
    for j in range(inst.n):
        if j == i:
            continue
        if c[j] < -tol or inst.a[j] < -tol:
            return False
    return True


def ray_active(inst: TcpInstance, direction, tol: float) -> bool:
    """Whether the tail of a homogeneous solution ray solves the instance.

    For a homogeneous solution r, points t * r with t large solve TCP(A, a)
    iff a vanishes on the support of r and, off the support, the slack
    contract(A, r) is either strictly positive or backed by a nonnegative a.
    """
    r = as_vector(direction, inst.n)
    Fr = contract(inst.tensor, r)
    for i in range(inst.n):
        if r[i] > tol:
            if abs(inst.a[i]) > tol or abs(Fr[i]) > tol:
                return False
        else:
            if Fr[i] < -tol:
                return False
            if Fr[i] <= tol and inst.a[i] < -tol:
                return False
    return True


# ---------------------------------------------------------------------------
# per-face root finding


@dataclass
class _FaceOutcome:
    points: list[np.ndarray] = field(default_factory=list)
    rays: list[np.ndarray] = field(default_factory=list)
    posdim: bool = False
    starts: int = 0
    newton_iters: int = 0


def _feasible_on_face(fs: FaceSystem, x: np.ndarray, tol: float) -> bool:
    return fs.pinned_slack(x) >= -tol


def _solve_face_roots(fs: FaceSystem, cfg: SolverConfig, homogeneous: bool) -> _FaceOutcome:
    """Roots of one face system with sign filtering and posdim detection."""
    inst = fs.instance
    out = _FaceOutcome()
    tol = cfg.tol
    if fs.infeasible_rows:
        # an equation that is identically a nonzero constant can never vanish
        return out

    if fs.k == 0:
        if not homogeneous and float(np.min(inst.a)) >= -tol:
            out.points.append(np.zeros(inst.n))
        return out

    check_inst = inst if not homogeneous else TcpInstance(inst.tensor, np.zeros(inst.n))

    if len(fs.zero_rows) == fs.k:
        # every equation vanishes identically: the face is cut out by the
        # pinned-row sign conditions alone
        if fs.k == 1:
            i = fs.free[0]
            e = np.zeros(inst.n)
            e[i] = 1.0
            if homogeneous:
                if _feasible_on_face(fs, e, tol):
                    out.rays.append(e)
            elif coordinate_ray_solves(inst, i, tol):
                out.rays.append(e)
            else:
                ts = np.linspace(0.1, cfg.start_box_radius, 8)
                if any(_feasible_on_face(fs, t * e, tol) for t in ts):
                    out.posdim = True
        else:
            if homogeneous:
                candidates = [np.full(fs.k, 1.0 / fs.k)]
                for z in _grid_starts(fs.k, 1.0, 5)[1:]:
                    s = float(np.sum(z))
                    if s > 0.1:
                        candidates.append(z / s)
            else:
                box = cfg.start_box_radius
                candidates = [np.full(fs.k, 0.5 * box)]
                candidates.extend(z for z in _grid_starts(fs.k, box, 4) if np.min(z) > 0)
            for z in candidates:
                x = fs.embed(z)
                if np.min(z) > tol and _feasible_on_face(fs, x, tol):
                    out.posdim = True
                    if homogeneous:
                        out.rays.append(x / float(np.linalg.norm(x)))
                    break
        return out

    # general face: multistart damped Newton on the (possibly augmented) system
    if homogeneous:
        # the search lives on the probability simplex, so start there
        rng = np.random.default_rng([cfg.seed, fs.alpha.mask, 1])
        start_arr = np.vstack([
            _simplex_starts(fs.k),
            np.full((1, fs.k), 1.0 / fs.k),
            rng.dirichlet(np.ones(fs.k), size=RANDOM_STARTS),
        ])
    else:
        start_arr = np.vstack([
            _grid_starts(fs.k, cfg.start_box_radius, cfg.grid_starts_per_axis),
            _random_starts(fs.k, cfg.start_box_radius, cfg.seed, fs.alpha.mask, 0),
        ])
    out.starts = start_arr.shape[0]

    if homogeneous:

        def fun(z):
            return np.append(fs.residual_vec(z), np.sum(z) - 1.0)

        def jac(z):
            return np.vstack([fs.jacobian(z), np.ones(fs.k)])

    else:
        fun, jac = fs.residual_vec, fs.jacobian

    accepted: list[tuple[np.ndarray, float]] = []
    # degenerate components (multiplicity q) stall Newton near
    # NEWTON_ATOL**(1/q), above tol; roots that collapse onto a smaller face
    # once such components are zeroed are that face's solutions, not ours
    snap = max(cfg.dedup_radius, 10.0 * NEWTON_ATOL ** (1.0 / max(2, inst.m - 1)))
    for z0 in start_arr:
        z, resid, iters = _newton_polish(fun, jac, z0, cfg.newton_max_iter, fs.alpha)
        out.newton_iters += iters
        if resid > tol / 10:
            continue
        if float(np.min(z)) <= tol:
            # boundary roots belong to a larger face and are found there
            continue
        small = z <= snap
        if bool(small.any()):
            zs = np.where(small, 0.0, z)
            if max_residual(check_inst, fs.embed(zs)) <= tol:
                continue
        x = fs.embed(z)
        if not _feasible_on_face(fs, x, tol):
            continue
        if max_residual(check_inst, x) > tol:
            continue
        accepted.append((z, resid))

    roots = _dedup(accepted, cfg.dedup_radius)
    if not roots:
        return out

    posdim = len(roots) > POSDIM_ROOT_LIMIT
    if not posdim:
        for z in roots:
            sig = np.linalg.svd(jac(z), compute_uv=False)
            if sig[0] == 0.0 or sig[-1] < SIGMA_RATIO * sig[0]:
                posdim = True
                break
    out.posdim = posdim

    if homogeneous:
        xs = [fs.embed(z) for z in roots]
        reps = xs[:1] if posdim else xs
        out.rays.extend(x / float(np.linalg.norm(x)) for x in reps)
    elif not posdim:
        out.points.extend(fs.embed(z) for z in roots)
    return out


def _status(points, rays, posdim) -> str:
    if rays:
        return STATUS_UNBOUNDED
    if posdim:
        return STATUS_NON_ISOLATED
    if points:
        return STATUS_FINITE
    return STATUS_EMPTY


def _meta(cfg: SolverConfig, **extra) -> dict:
    d = {
        "tol": cfg.tol,
        "dedup_radius": cfg.dedup_radius,
        "newton_max_iter": cfg.newton_max_iter,
        "grid_starts_per_axis": cfg.grid_starts_per_axis,
        "random_starts": RANDOM_STARTS,
        "start_box_radius": cfg.start_box_radius,
        "seed": cfg.seed,
    }
    d.update(extra)
    return d


def _sorted_points(inst: TcpInstance, xs: list[np.ndarray], cfg: SolverConfig) -> list[SolutionPoint]:
    ranked = _dedup([(x, max_residual(inst, x)) for x in xs], cfg.dedup_radius)
    ranked.sort(key=lambda x: tuple(x))
    return [
        SolutionPoint(x=x, face=face_of(x, cfg.tol), kkt_res=max_residual(inst, x))
        for x in ranked
    ]


def _sorted_rays(directions: list[np.ndarray], tol: float, radius: float) -> list[Ray]:
    kept = _dedup([(d, 0.0) for d in directions], radius)
    kept.sort(key=lambda d: tuple(d))
    return [Ray(direction=d, face=face_of(d, tol)) for d in kept]


def solve_face(inst: TcpInstance, alpha: FaceMask, cfg: SolverConfig) -> SolutionSet:
    """Solve the square system of a single face and filter by its signs."""
    fs = face_system(inst, alpha)
    out = _solve_face_roots(fs, cfg, homogeneous=False)
    points = _sorted_points(inst, out.points, cfg)
    rays = _sorted_rays(out.rays, cfg.tol, cfg.dedup_radius)
    posdim = [alpha] if out.posdim else []
    return SolutionSet(
        points=points,
        rays=rays,
        posdim_suspect=posdim,
        status=_status(points, rays, posdim),
        meta=_meta(cfg, face=alpha.to_json(), starts=out.starts, newton_iters=out.newton_iters),
    )


_CONE_TS = (0.5, 1.0, 2.0, 10.0)


def _certified_ray(inst0: TcpInstance, direction, cfg: SolverConfig) -> np.ndarray | None:
    """Re-polish a candidate direction until the cone property certifies.

    Every emitted ray promises residual(A, 0, t*r) <= tol along the sampled
    tail t in _CONE_TS; comp scales like t^m, so a root accepted at tol/10
    can be too loose at t = 10.  Exact candidates pass immediately; Newton
    candidates get one more polish to machine accuracy.  Directions that
    still fail are dropped (the posdim flag, not a sloppy ray, reports their
    face).
    """
    r = np.asarray(direction, dtype=float)
    r = r / float(np.linalg.norm(r))
    if all(max_residual(inst0, t * r) <= cfg.tol for t in _CONE_TS):
        return r
    fs = face_system(inst0, face_of(np.maximum(r, 0.0), cfg.tol))
    if fs.k == 0:
        return None

    def fun(z):
        return np.append(fs.residual_vec(z), np.sum(z) - 1.0)

    def jac(z):
        return np.vstack([fs.jacobian(z), np.ones(fs.k)])

    z0 = r[list(fs.free)]
    s = float(np.sum(z0))
    if s <= 0.0:
        return None
    try:
        z, _, _ = _newton_polish(fun, jac, z0 / s, cfg.newton_max_iter, fs.alpha)
    except FaceSolveError:
        return None
    x = fs.embed(z)
    nrm = float(np.linalg.norm(x))
    if not math.isfinite(nrm) or nrm <= 0.0 or float(np.min(x)) < 0.0:
        return None
    r = x / nrm
    if all(max_residual(inst0, t * r) <= cfg.tol for t in _CONE_TS):
        return r
    return None


def homogeneous_solve(A: Tensor, cfg: SolverConfig) -> SolutionSet:
    """Nonzero solutions of TCP(A, 0), searched on the probability simplex.

    The solution set of the homogeneous problem is a cone, so the search
    adds the normalization sum(x) = 1 to every face system and reports each
    solution as a unit-Euclidean ray direction.  An empty ray list means the
    only homogeneous solution is the origin.

    The search runs on the Frobenius-normalized tensor: Sol(tA, 0) equals
    Sol(A, 0) for every t > 0, and normalizing makes the computation, and in
    particular the representative chosen for a positive-dimensional cone,
    literally identical across rescalings of A.
    """
    nrm = frobenius(A)
    B = scale(1.0 / nrm, A) if nrm > 1e-12 else A
    inst = TcpInstance(B, np.zeros(A.dim))
    directions: list[np.ndarray] = []
    posdim: list[FaceMask] = []
    starts = iters = 0
    for face in enumerate_faces(A.dim):
        if face.mask == 2**A.dim - 1:
            continue  # the face {0} holds only the trivial solution
        out = _solve_face_roots(face_system(inst, face), cfg, homogeneous=True)
        directions.extend(out.rays)
        if out.posdim:
            posdim.append(face)
        starts += out.starts
        iters += out.newton_iters
    certified = [r for r in (_certified_ray(inst, d, cfg) for d in directions) if r is not None]
    rays = _sorted_rays(certified, cfg.tol, cfg.dedup_radius)
    posdim = sorted(posdim)
    return SolutionSet(
        points=[],
        rays=rays,
        posdim_suspect=posdim,
        status=_status([], rays, posdim),
        meta=_meta(cfg, homogeneous=True, starts=starts, newton_iters=iters),
    )


def solve(inst: TcpInstance, cfg: SolverConfig, hom: SolutionSet | None = None) -> SolutionSet:
    """Solve TCP(A, a) by enumerating all 2^n faces.

    Points are the deduplicated isolated roots across faces; faces that trip
    the positive-dimension heuristics are reported in posdim_suspect and
    their roots are withheld from the point list (they sample a continuum).
    Rays are the homogeneous candidate directions whose tails actually solve
    this instance, so status "unbounded-suspect" means a genuinely unbounded
    branch was certified at the working tolerance.

    Callers sweeping many right-hand sides against one tensor can pass the
    precomputed homogeneous_solve(A, cfg) result as hom; it depends only on
    the tensor, not on a.
    """
    xs: list[np.ndarray] = []
    face_rays: list[np.ndarray] = []
    posdim: list[FaceMask] = []
    starts = iters = 0
    for face in enumerate_faces(inst.n):
        out = _solve_face_roots(face_system(inst, face), cfg, homogeneous=False)
        xs.extend(out.points)
        face_rays.extend(out.rays)
        if out.posdim:
            posdim.append(face)
        starts += out.starts
        iters += out.newton_iters

    if hom is None:
        hom = homogeneous_solve(inst.tensor, cfg)
    candidates = [r.direction for r in hom.rays] + face_rays
    active = [d for d in candidates if ray_active(inst, d, cfg.tol)]

    points = _sorted_points(inst, xs, cfg)
    rays = _sorted_rays(active, cfg.tol, cfg.dedup_radius)
    posdim = sorted(posdim)
    return SolutionSet(
        points=points,
        rays=rays,
        posdim_suspect=posdim,
        status=_status(points, rays, posdim),
        meta=_meta(
            cfg,
            starts=starts,
            newton_iters=iters,
            hom_candidates=len(hom.rays),
            faces=2**inst.n,
        ),
    )


# ---------------------------------------------------------------------------
# combinatorial bound and set distance


def chi_bound(m: int, n: int) -> int:
    """Upper bound d*(2d-1)^(5n), d = max(2, m-1), on connected components.

    Exact integer arithmetic; solver point counts beyond this bound indicate
    a bug, not mathematics.
    """
    m, n = int(m), int(n)
    if m < 2 or n < 2:
        raise ValueError("chi_bound requires m >= 2 and n >= 2")
    d = max(2, m - 1)
    return d * (2 * d - 1) ** (5 * n)


def hausdorff_excess(S1, S2) -> float:
    """sup over S1 of the Euclidean distance to S2; one-sided.

    Empty S1 gives 0 (vacuous sup); empty S2 with nonempty S1 gives the
    +inf sentinel.
    """
    P1 = [as_vector(p) for p in S1]
    P2 = [as_vector(p) for p in S2]
    if not P1:
        return 0.0
    if not P2:
        return math.inf
    B = np.stack(P2)
    worst = 0.0
    for p in P1:
        d = float(np.min(np.linalg.norm(B - p, axis=1)))
        worst = max(worst, d)
    return worst


# ---------------------------------------------------------------------------
# brute-force grid oracle


@dataclass(eq=False)
class OracleCluster:
    size: int
    raw: np.ndarray
    polished: np.ndarray | None
    verified: bool
    extent: float
    extended: bool
    boundary: bool
    members: np.ndarray


@dataclass(eq=False)
class OracleResult:
    representatives: list[np.ndarray]
    clusters: list[OracleCluster]
    meta: dict


def _einsum_batch_contract(A: Tensor, X: np.ndarray) -> np.ndarray:
    letters = "abcdefghijkl"[: A.order]
    subs = letters + "," + ",".join("p" + c for c in letters[1:]) + "->p" + letters[0]
    operands = [A.array] + [X] * (A.order - 1)
    return np.einsum(subs, *operands)


def _einsum_batch_jacobian(A: Tensor, X: np.ndarray) -> np.ndarray:
    """Jacobian of x -> A x^{m-1} at every row of X, shape (len(X), n, n)."""
    n, m = A.dim, A.order
    xpow = np.ones((X.shape[0], 1))
    for _ in range(m - 2):
        xpow = (xpow[:, :, None] * X[:, None, :]).reshape(X.shape[0], -1)
    J = np.zeros((X.shape[0], n, n))
    for p in range(1, m):
        V = np.moveaxis(A.array, p, 1).reshape(n, n, -1)
        J += np.einsum("ijk,pk->pij", V, xpow)
    return J


_ORACLE_CHUNK = 1 << 18
_ORACLE_SEED_CAP = 16
_ORACLE_SAFETY = 1.5


def _oracle_polish(inst: TcpInstance, seed: np.ndarray, pin_tol: float, tol: float):
    """Polish one grid seed; yields verified candidate points.

    Coordinates within pin_tol of zero are pinned to their face and, when any
    were pinned, a second fully-free polish runs as well, so solutions just
    inside the first grid cell are not lost to a wrong face guess.  The raw
    seed itself is the last candidate (it may already be an exact solution on
    faces with no equations to polish).
    """
    vtol = max(ORACLE_VERIFY_TOL, tol)
    faces = [face_of(seed, pin_tol)]
    if len(faces[0]) > 0:
        faces.append(FaceMask(inst.n, 0))
    out = []
    for face in faces:
        fs = face_system(inst, face)
        if fs.k == 0:
            cand = np.zeros(inst.n)
        elif len(fs.zero_rows) == fs.k:
            continue
        else:
            z, _, _ = _newton_polish(
                fs.residual_vec, fs.jacobian, seed[list(fs.free)], 100, face
            )
            if float(np.min(z)) < -1e-12:
                continue
            cand = fs.embed(np.maximum(z, 0.0))
        r = max_residual(inst, cand)
        if r <= vtol:
            out.append((cand, r))
    r = max_residual(inst, seed)
    if r <= vtol:
        out.append((seed, r))
    return out


def brute_force_oracle(
    inst: TcpInstance, box_radius: float, grid_step: float, tol: float
) -> OracleResult:
    """Independent grid search over [0, box_radius]^n.

    Accepts grid points whose feasibility and complementarity clear local
    thresholds widened to the grid resolution (the exact batch Jacobian gives
    each point its own bound, so a true solution within half a cell is never
    missed and far-field slop does not bloat the capture).  Accepted points
    are grouped by grid connectivity; every local minimum of the violation
    score inside a cluster seeds a Newton polish, so one cluster can yield
    several nearby solutions.  Only polished points re-verified at
    ORACLE_VERIFY_TOL enter `representatives`; clusters report size and
    spatial extent so positive-dimensional components are visible as extended
    clusters.  Valid only inside the box: clusters touching the outer
    boundary are flagged, the exterior is unobserved.
    """
    if box_radius <= 0 or grid_step <= 0 or tol <= 0:
        raise ValueError("box_radius, grid_step and tol must be positive")
    n = inst.n
    g = int(math.floor(box_radius / grid_step + 0.5)) + 1
    if n * g**n > ORACLE_BUDGET:
        raise BudgetError(
            f"oracle grid needs n*g^n = {n * g**n} > {ORACLE_BUDGET} evaluations"
        )
    shape = (g,) * n
    total = g**n
    half_diag = 0.5 * grid_step * math.sqrt(n)

    accept = np.zeros(total, dtype=bool)
    score = np.full(total, np.inf)
    theta_F_max = 0.0
    for s in range(0, total, _ORACLE_CHUNK):
        idx = np.arange(s, min(s + _ORACLE_CHUNK, total))
        Xc = np.stack(np.unravel_index(idx, shape), axis=1) * grid_step
        FX = _einsum_batch_contract(inst.tensor, Xc) + inst.a
        J = _einsum_batch_jacobian(inst.tensor, Xc)
        row_norms = np.linalg.norm(J, axis=2)
        theta_F = _ORACLE_SAFETY * half_diag * row_norms + tol
        grad_comp = FX + np.einsum("pij,pi->pj", J, Xc)
        theta_comp = _ORACLE_SAFETY * half_diag * np.linalg.norm(grad_comp, axis=1) + tol
        feas_F = np.maximum(0.0, -np.min(FX, axis=1))
        comp = np.abs(np.einsum("pi,pi->p", Xc, FX))
        accept[idx] = np.all(FX + theta_F >= 0.0, axis=1) & (comp <= theta_comp)
        score[idx] = np.maximum(feas_F, comp)
        if idx.size:
            theta_F_max = max(theta_F_max, float(np.max(theta_F)))

    labels, ncl = ndimage.label(accept.reshape(shape), structure=np.ones((3,) * n, dtype=int))
    labels = labels.reshape(-1)

    # polish seeds: local minima of the violation score within the captured
    # set, taken per face sub-grid.  A solution with zero coordinates is
    # interior to its face, where its basin is a genuine minimum; on the full
    # grid the score valley can drain past it toward a nearby interior basin
    # without ever forming one.
    field = np.where(accept, score, np.inf).reshape(shape)
    is_min = np.zeros(total, dtype=bool)
    for face in enumerate_faces(n):
        pinned = set(face.zero_indices)
        expr = tuple(0 if i in pinned else slice(None) for i in range(n))
        sub = field[expr]
        if sub.ndim == 0:
            mins = np.isfinite(sub).reshape(())
            if not mins:
                continue
            coords = np.zeros((1, n), dtype=int)
        else:
            filt = ndimage.minimum_filter(sub, size=3, mode="constant", cval=np.inf)
            mask = (sub <= filt) & np.isfinite(sub)
            if not mask.any():
                continue
            pos = np.nonzero(mask)
            coords = np.zeros((len(pos[0]), n), dtype=int)
            for ax, i in enumerate(sorted(set(range(n)) - pinned)):
                coords[:, i] = pos[ax]
        is_min[np.ravel_multi_index(tuple(coords.T), shape)] = True
    is_min &= accept

    clusters: list[OracleCluster] = []
    reps: list[tuple[np.ndarray, float]] = []
    pin_tol = grid_step * (1.0 + 1e-9)
    for c in range(1, ncl + 1):
        idx = np.flatnonzero(labels == c)
        members = np.stack(np.unravel_index(idx, shape), axis=1) * grid_step
        best = members[int(np.argmin(score[idx]))]
        extent = float(np.max(np.max(members, axis=0) - np.min(members, axis=0))) if len(idx) > 1 else 0.0
        boundary = bool(np.any(members >= box_radius - grid_step / 2))

        seed_idx = idx[is_min[idx]]
        if len(seed_idx) == 0:
            seed_idx = idx[[int(np.argmin(score[idx]))]]
        if len(seed_idx) > _ORACLE_SEED_CAP:
            order = np.argsort(score[seed_idx], kind="stable")
            seed_idx = seed_idx[order[:_ORACLE_SEED_CAP]]
        found: list[tuple[np.ndarray, float]] = []
        for fi in seed_idx:
            seed = np.asarray(np.unravel_index(int(fi), shape), dtype=float) * grid_step
            found.extend(_oracle_polish(inst, seed, pin_tol, tol))
        found.sort(key=lambda pr: pr[1])
        polished = found[0][0] if found else None
        verified = bool(found)

        if len(idx) > ORACLE_MEMBER_CAP:
            stride = int(math.ceil(len(idx) / ORACLE_MEMBER_CAP))
            members = members[::stride]
        clusters.append(
            OracleCluster(
                size=int(len(idx)),
                raw=best,
                polished=polished,
                verified=verified,
                extent=extent,
                extended=extent > 20 * grid_step,
                boundary=boundary,
                members=members,
            )
        )
        reps.extend(found)

    representatives = _dedup(reps, radius=1e-5)
    representatives.sort(key=lambda x: tuple(x))
    return OracleResult(
        representatives=representatives,
        clusters=clusters,
        meta={
            "box_radius": box_radius,
            "grid_step": grid_step,
            "tol": tol,
            "grid_points": int(total),
            "accepted": int(np.count_nonzero(accept)),
            "theta_F_max": theta_F_max,
            "n_clusters": ncl,
        },
    )
