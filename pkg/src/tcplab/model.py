"""Problem instances and the face decomposition of the nonnegative orthant.

An instance is a pair (A, a); a solution is x >= 0 with
F(x) = contract(A, x) + a >= 0 and <x, F(x)> = 0.  Complementarity splits
the orthant into 2^n pseudo-faces indexed by the set alpha of coordinates
pinned to zero: on the face with free set beta = complement(alpha), any
solution must satisfy the square polynomial system F_i(x) = 0 for i in beta
together with the sign conditions x_i > 0 (i in beta) and F_i(x) >= 0
(i in alpha).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .tensors import Tensor, as_vector, contract, contract_jacobian, tensor_from_dict, tensor_to_dict

# coefficient magnitude below which a reduced equation counts as identically zero
ZERO_ROW_TOL = 1e-14


@dataclass(frozen=True, order=True)
class FaceMask:
    """Subset alpha of {1..n} of coordinates pinned to zero, as a bitmask.

    Bit i - 1 set means coordinate i is pinned.  The empty mask is the open
    orthant; the full mask names the face {0}.
    """

    n: int
    mask: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if not 0 <= self.mask < 2**self.n:
            raise ValueError(f"mask {self.mask} out of range for n = {self.n}")

    @classmethod
    def from_indices(cls, n: int, indices) -> "FaceMask":
        mask = 0
        for i in indices:
            i = int(i)
            if not 1 <= i <= n:
                raise ValueError(f"face index {i} out of range 1..{n}")
            mask |= 1 << (i - 1)
        return cls(n, mask)

    @property
    def zero_indices(self) -> tuple[int, ...]:
        """Pinned coordinates, 0-based."""
        return tuple(i for i in range(self.n) if self.mask >> i & 1)

    @property
    def free_indices(self) -> tuple[int, ...]:
        """Free coordinates, 0-based."""
        return tuple(i for i in range(self.n) if not self.mask >> i & 1)

    def __iter__(self) -> Iterator[int]:
        # iterate 1-based members, so a FaceMask can be passed as an index set
        return (i + 1 for i in self.zero_indices)

    def __len__(self) -> int:
        return bin(self.mask).count("1")

    def __contains__(self, i: int) -> bool:
        return 1 <= i <= self.n and bool(self.mask >> (i - 1) & 1)

    def to_json(self) -> list[int]:
        return [i + 1 for i in self.zero_indices]


def enumerate_faces(n: int) -> list[FaceMask]:
    """All 2^n faces in ascending bitmask order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return [FaceMask(n, mask) for mask in range(2**n)]


def face_of(x, tol: float) -> FaceMask:
    """Face of a nonnegative point: coordinates with x_i <= tol are pinned."""
    x = as_vector(x)
    if np.min(x) < -tol:
        raise ValueError(f"point is not nonnegative within tol: min entry {np.min(x)}")
    mask = 0
    for i, xi in enumerate(x):
        if xi <= tol:
            mask |= 1 << i
    return FaceMask(x.shape[0], mask)


@dataclass(frozen=True, eq=False)
class TcpInstance:
    """Pair (A, a) defining F(x) = contract(A, x) + a."""

    tensor: Tensor
    a: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "a", as_vector(self.a, self.tensor.dim))
        arr = self.a.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "a", arr)

    @property
    def n(self) -> int:
        return self.tensor.dim

    @property
    def m(self) -> int:
        return self.tensor.order

    def F(self, x) -> np.ndarray:
        return contract(self.tensor, x) + self.a

    def to_json(self) -> dict:
        return {"tensor": tensor_to_dict(self.tensor), "a": self.a.tolist()}

    @classmethod
    def from_json(cls, d: dict) -> "TcpInstance":
        try:
            tensor = tensor_from_dict(d["tensor"])
            a = d["a"]
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed instance object: {exc}") from exc
        return cls(tensor, as_vector(a, tensor.dim))


def residual(inst: TcpInstance, x) -> tuple[float, float, float]:
    """Infeasibility split (feas_x, feas_F, comp); all <= tol means solution."""
    x = as_vector(x, inst.n)
    Fx = inst.F(x)
    feas_x = max(0.0, float(-np.min(x)))
    feas_F = max(0.0, float(-np.min(Fx)))
    comp = abs(float(x @ Fx))
    return feas_x, feas_F, comp


def max_residual(inst: TcpInstance, x) -> float:
    return max(residual(inst, x))


@dataclass(frozen=True, eq=False)
class KktPoint:
    """Primal point x with multiplier lam for F(x) - lam = 0, <lam, x> = 0."""

    x: np.ndarray
    lam: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", as_vector(self.x))
        object.__setattr__(self, "lam", as_vector(self.lam, self.x.shape[0]))


def kkt_residual(inst: TcpInstance, point: KktPoint) -> float:
    """Max violation across stationarity, complementarity and both signs."""
    x, lam = point.x, point.lam
    if x.shape[0] != inst.n:
        raise ValueError(f"dimension mismatch: instance n = {inst.n}, point n = {x.shape[0]}")
    stat = float(np.max(np.abs(inst.F(x) - lam)))
    comp = abs(float(lam @ x))
    neg_x = max(0.0, float(-np.min(x)))
    neg_lam = max(0.0, float(-np.min(lam)))
    return max(stat, comp, neg_x, neg_lam)


class FaceSystem:
    """Reduced square system of one face: F_i(x) = 0 for free i, x pinned on alpha.

    Rows are indexed by the free coordinates.  A row whose reduced polynomial
    has every coefficient below ZERO_ROW_TOL is identically zero (the face is
    underdetermined); a row that is identically a nonzero constant can never
    vanish, so the face is empty.
    """

    def __init__(self, inst: TcpInstance, alpha: FaceMask):
        if alpha.n != inst.n:
            raise ValueError(f"face over n = {alpha.n} does not match instance n = {inst.n}")
        self.instance = inst
        self.alpha = alpha
        self.free = alpha.free_indices
        self.k = len(self.free)

        # every monomial with a pinned index vanishes on the face, so the
        # reduced system is exactly the contraction of the free sub-block
        free = list(self.free)
        arr = inst.tensor.array
        if self.k > 0:
            self._block = arr[np.ix_(*([free] * inst.m))]
            self._a_free = inst.a[free]
            self._jac_views = [np.moveaxis(self._block, p, 1) for p in range(1, inst.m)]
        else:
            self._block = np.zeros((0,) * inst.m)
            self._a_free = np.zeros(0)
            self._jac_views = []

        zero_rows, infeasible_rows = [], []
        if self.k > 0:
            for r, i in enumerate(self.free):
                block = arr[i][np.ix_(*([free] * (inst.m - 1)))]
                if np.max(np.abs(block)) < ZERO_ROW_TOL:
                    if abs(inst.a[i]) < ZERO_ROW_TOL:
                        zero_rows.append(r)
                    else:
                        infeasible_rows.append(r)
        self.zero_rows = tuple(zero_rows)
        self.infeasible_rows = tuple(infeasible_rows)
        self.underdetermined = bool(zero_rows)

    def embed(self, z) -> np.ndarray:
        """Lift free coordinates z to the full space, zeros on alpha."""
        z = np.asarray(z, dtype=float)
        x = np.zeros(self.instance.n)
        x[list(self.free)] = z
        return x

    def residual_vec(self, z) -> np.ndarray:
        """F restricted to the free rows, evaluated on the reduced block."""
        out = self._block
        for _ in range(self.instance.m - 1):
            out = out @ z
        return out + self._a_free

    def jacobian(self, z) -> np.ndarray:
        reps = self.instance.m - 2
        J = np.zeros((self.k, self.k))
        for view in self._jac_views:
            out = view
            for _ in range(reps):
                out = out @ z
            J += out
        return J

    def pinned_slack(self, x) -> float:
        """min F_i(x) over pinned rows (+inf when alpha is empty)."""
        pinned = self.alpha.zero_indices
        if not pinned:
            return float("inf")
        return float(np.min(self.instance.F(x)[list(pinned)]))


def face_system(inst: TcpInstance, alpha: FaceMask) -> FaceSystem:
    return FaceSystem(inst, alpha)
