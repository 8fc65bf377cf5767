"""Dense real tensors of fixed order and dimension, with the contractions
used throughout the package.

A tensor A of order m and dimension n acts on a vector x through

    contract(A, x)_i = sum over (i2..im) of A[i, i2, .., im] * x[i2] * .. * x[im]

which is homogeneous of degree m - 1, and through the scalar form(A, x),
homogeneous of degree m.  Entries are stored as an ndarray of shape (n,)*m;
the C-order flat layout coincides with lexicographic order of multi-indices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# desk-scale guard: refuse tensors with more than this many entries
MAX_ENTRIES = 10_000_000


def as_vector(x, n: int | None = None) -> np.ndarray:
    """Validate and convert x to a finite 1-d float array."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"expected a 1-d vector, got shape {v.shape}")
    if n is not None and v.shape[0] != n:
        raise ValueError(f"dimension mismatch: expected length {n}, got {v.shape[0]}")
    if not np.all(np.isfinite(v)):
        raise ValueError("vector has non-finite entries")
    return v


@dataclass(frozen=True, eq=False)
class Tensor:
    """Immutable order-m, dimension-n real tensor."""

    array: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.array, dtype=float)
        if arr.ndim < 2:
            raise ValueError(f"tensor order must be >= 2, got {arr.ndim}")
        n = arr.shape[0]
        if n < 2:
            raise ValueError(f"tensor dimension must be >= 2, got {n}")
        if any(s != n for s in arr.shape):
            raise ValueError(f"all modes must have equal dimension, got shape {arr.shape}")
        if n**arr.ndim > MAX_ENTRIES:
            raise ValueError(
                f"n**m = {n**arr.ndim} exceeds the desk-scale budget {MAX_ENTRIES}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("tensor has non-finite entries")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "array", arr)

    @property
    def order(self) -> int:
        return self.array.ndim

    @property
    def dim(self) -> int:
        return self.array.shape[0]

    @property
    def entries(self) -> np.ndarray:
        """Flat entry list in lexicographic multi-index order."""
        return self.array.reshape(-1)

    @classmethod
    def from_entries(cls, m: int, n: int, entries) -> "Tensor":
        flat = np.asarray(entries, dtype=float).reshape(-1)
        if flat.size != n**m:
            raise ValueError(f"expected {n**m} entries for (m, n) = ({m}, {n}), got {flat.size}")
        return cls(flat.reshape((n,) * m))

    @classmethod
    def zeros(cls, m: int, n: int) -> "Tensor":
        return cls(np.zeros((n,) * m))

    def __add__(self, other: "Tensor") -> "Tensor":
        return add(self, other)

    def __sub__(self, other: "Tensor") -> "Tensor":
        return add(self, scale(-1.0, other))


def flat_index(multi: Sequence[int], n: int) -> int:
    """Zero-based flat position of a 1-based multi-index (lexicographic)."""
    pos = 0
    for i in multi:
        if not 1 <= i <= n:
            raise ValueError(f"index {i} out of range 1..{n}")
        pos = pos * n + (i - 1)
    return pos


def multi_index(flat: int, m: int, n: int) -> tuple[int, ...]:
    """Inverse of flat_index: 1-based multi-index of a flat position."""
    if not 0 <= flat < n**m:
        raise ValueError(f"flat position {flat} out of range for (m, n) = ({m}, {n})")
    out = []
    for _ in range(m):
        out.append(flat % n + 1)
        flat //= n
    return tuple(reversed(out))


def _contract_all_but(arr: np.ndarray, x: np.ndarray, keep: int) -> np.ndarray:
    # contract x into every mode except `keep`; result is a vector
    out = np.moveaxis(arr, keep, 0)
    for _ in range(arr.ndim - 1):
        out = out @ x
    return out


def contract(A: Tensor, x) -> np.ndarray:
    """A x^{m-1}: contract x into all modes but the first."""
    x = as_vector(x, A.dim)
    return _contract_all_but(A.array, x, 0)


def form(A: Tensor, x) -> float:
    """The scalar A x^m, summed in one pass (independent of contract)."""
    x = as_vector(x, A.dim)
    m = A.order
    if m <= 12:
        letters = "abcdefghijkl"[:m]
        operands = [A.array] + [x] * m
        return float(np.einsum(letters + "," + ",".join(letters), *operands))
    return float(x @ contract(A, x))


def contract_jacobian(A: Tensor, x) -> np.ndarray:
    """Jacobian of x -> contract(A, x), by differentiating each monomial slot."""
    x = as_vector(x, A.dim)
    m, n = A.order, A.dim
    J = np.zeros((n, n))
    for p in range(1, m):
        moved = np.moveaxis(A.array, p, 1)
        out = moved
        for _ in range(m - 2):
            out = out @ x
        J += out
    return J

def form_gradient(A: Tensor, x) -> np.ndarray:
    """Gradient of x -> form(A, x)."""
    x = as_vector(x, A.dim)
    g = np.zeros(A.dim)
    for p in range(A.order):
        g += _contract_all_but(A.array, x, p)
    return g


def frobenius(A: Tensor) -> float:
    """Square root of the sum of squared entries."""
    return float(np.sqrt(np.sum(A.array**2)))


def pair_norm(A: Tensor, a) -> float:
    """Norm of an (A, a) pair: sqrt(frobenius(A)^2 + |a|_2^2)."""
    a = as_vector(a, A.dim)
    return float(np.sqrt(np.sum(A.array**2) + np.sum(a**2)))


def add(A: Tensor, B: Tensor) -> Tensor:
    if A.order != B.order or A.dim != B.dim:
        raise ValueError(
            f"shape mismatch: ({A.order}, {A.dim}) vs ({B.order}, {B.dim})"
        )
    return Tensor(A.array + B.array)


def scale(t: float, A: Tensor) -> Tensor:
    t = float(t)
    if not np.isfinite(t):
        raise ValueError("scale factor must be finite")
    return Tensor(t * A.array)


def random_gaussian(m: int, n: int, seed) -> Tensor:
    """Tensor with iid standard normal entries (PCG64 stream from seed)."""
    rng = np.random.default_rng(seed)
    return Tensor(rng.standard_normal(size=(n,) * m))


def non_r0_witness(m: int, n: int, alpha: Iterable[int], seed) -> Tensor:
    """Random tensor whose entries vanish whenever a multi-index leaves alpha.

    alpha is a set of 1-based coordinates; the |alpha|^m entries indexed
    entirely inside alpha are iid Gaussian, every other entry is zero.  Any
    nonnegative x supported outside alpha then satisfies contract(A, x) = 0,
    so the homogeneous problem has nonzero solutions whenever alpha is a
    proper subset of {1..n}.
    """
    ids = sorted(set(int(i) for i in alpha))
    if any(i < 1 or i > n for i in ids):
        raise ValueError(f"alpha must be a subset of 1..{n}, got {ids}")
    if len(ids) == n:
        raise ValueError("alpha must be a proper subset: the full set leaves no witness ray")
    arr = np.zeros((n,) * m)
    if ids:
        zero_based = [i - 1 for i in ids]
        rng = np.random.default_rng(seed)
        block = rng.standard_normal(size=(len(ids),) * m)
        arr[np.ix_(*([zero_based] * m))] = block
    return Tensor(arr)


# ---------------------------------------------------------------------------
# JSON layer


def tensor_to_dict(A: Tensor, fmt: str = "dense") -> dict:
    """JSON-ready dict; 1-based multi-indices in sparse format."""
    if fmt == "dense":
        return {"m": A.order, "n": A.dim, "format": "dense", "entries": A.entries.tolist()}
    if fmt == "sparse":
        entries = []
        flat = A.entries
        for pos in np.nonzero(flat)[0]:
            entries.append(
                {"index": list(multi_index(int(pos), A.order, A.dim)), "value": float(flat[pos])}
            )
        return {"m": A.order, "n": A.dim, "format": "sparse", "entries": entries}
    raise ValueError(f"unknown tensor format {fmt!r}")


def tensor_from_dict(d: dict) -> Tensor:
    """Load a tensor from its JSON dict; rejects duplicate sparse indices."""
    try:
        m, n, fmt = int(d["m"]), int(d["n"]), d["format"]
        raw = d["entries"]
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed tensor object: missing field {exc}") from exc
    if m < 2 or n < 2:
        raise ValueError(f"tensor requires m >= 2 and n >= 2, got m={m}, n={n}")
    if fmt == "dense":
        flat = np.asarray(raw, dtype=float)
        if flat.size != n**m:
            raise ValueError(f"dense entries: expected {n**m} values, got {flat.size}")
        return Tensor.from_entries(m, n, flat)
    if fmt == "sparse":
        arr = np.zeros(n**m)
        seen = set()
        for k, item in enumerate(raw):
            try:
                idx = tuple(int(i) for i in item["index"])
                val = float(item["value"])
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"malformed sparse entry at position {k}: {exc}") from exc
            if len(idx) != m:
                raise ValueError(f"sparse entry {k}: index length {len(idx)} != m = {m}")
            pos = flat_index(idx, n)
            if pos in seen:
                raise ValueError(f"duplicate sparse index {list(idx)}")
            seen.add(pos)
            arr[pos] = val
        return Tensor.from_entries(m, n, arr)
    raise ValueError(f"unknown tensor format {fmt!r}")
