"""Dense order-p tensors and their norms.

Tensors are plain C-contiguous float64 numpy arrays: ``shape`` is the tuple
(d_1, ..., d_p), ``ndim`` is the order, and the flat view enumerates entries
row-major (last index fastest).  Three norms are provided:

* ``frobenius_inner`` -- the entrywise inner product <A, B>.
* ``max_norm`` -- largest absolute entry, i.e. the supremum of
  |<T, v_1 x ... x v_p>| over standard-basis vectors.  Exact.
* operator norm -- supremum of |<T, v_1 x ... x v_p>| over unit vectors.
  NP-hard in general for order > 2, so ``operator_norm_hopm`` returns a
  certified lower bound via alternating rank-1 maximization (higher-order
  power iteration), and ``operator_norm_grid`` is a brute-force oracle for
  shapes with every d_k <= 2, used to cross-check the power method in tests.

Both operator-norm routines maximize the absolute inner product, so they
agree with the max-norm convention on sign-symmetric feasible sets.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ResourceLimitError, UnsupportedShapeError
from .rng import derive_seed, unit_vector

# desk-scale ceiling: 1e8 float64 entries is ~0.8 GB
MAX_ENTRIES = 10**8

HOPM_RESTARTS = 20
HOPM_TOL = 1e-10
HOPM_MAX_ITERS = 1000


def entry_count(shape) -> int:
    n = 1
    for d in shape:
        n *= int(d)
    return n


def check_entry_budget(shape) -> None:
    n = entry_count(shape)
    if n > MAX_ENTRIES:
        raise ResourceLimitError(
            f"tensor with {n} entries exceeds the {MAX_ENTRIES} entry budget"
        )


def as_tensor(t) -> np.ndarray:
    """Validate and coerce to a C-contiguous float64 array with finite entries."""
    arr = np.ascontiguousarray(t, dtype=np.float64)
    if not np.isfinite(arr).all():
        raise ValueError("tensor has non-finite entries")
    return arr


@dataclass
class NormResult:
    """A norm value with the method that produced it and its certificate.

    For ``power_iteration`` and ``grid_oracle`` the value is an attained
    inner product, hence a lower bound on the true operator norm.  When a
    certificate is present, re-evaluating <T, v_1 x ... x v_p> reproduces
    the value (signs are folded into the first vector).
    """

    value: float
    method: str  # "exact" | "power_iteration" | "grid_oracle"
    certificate: list[np.ndarray] | None = None
    iterations: int = 0
    restarts: int = 0

    def to_json(self) -> dict:
        out = {
            "value": float(self.value),
            "method": self.method,
            "iterations": int(self.iterations),
            "restarts": int(self.restarts),
        }
        if self.certificate is not None:
            out["certificate"] = [[float(x) for x in v] for v in self.certificate]
        return out


def outer_product(vectors) -> np.ndarray:
    """Outer product of p vectors; entry (l_1..l_p) = prod_k v_k[l_k]."""
    if len(vectors) == 0:
        raise ValueError("outer_product needs at least one vector")
    vecs = [np.asarray(v, dtype=np.float64) for v in vectors]
    for v in vecs:
        if v.ndim != 1 or v.size == 0:
            raise ValueError("outer_product arguments must be nonempty vectors")
    check_entry_budget([v.size for v in vecs])
    out = vecs[0]
    for v in vecs[1:]:
        out = np.multiply.outer(out, v)
    return np.ascontiguousarray(out)


def frobenius_inner(a, b) -> float:
    """Entrywise inner product; requires identical shapes."""
    ta, tb = as_tensor(a), as_tensor(b)
    if ta.shape != tb.shape:
        raise ValueError(f"shape mismatch: {ta.shape} vs {tb.shape}")
    return float(np.dot(ta.ravel(), tb.ravel()))


def rank1_value(t, vectors) -> float:
    """<T, v_1 x ... x v_p>, contracting one axis at a time."""
    w = as_tensor(t)
    if len(vectors) != w.ndim:
        raise ValueError(f"expected {w.ndim} vectors, got {len(vectors)}")
    for v in vectors:
        w = np.tensordot(w, np.asarray(v, dtype=np.float64), axes=(0, 0))
    return float(w)


def _basis_certificate(shape, index, negate_first: bool) -> list[np.ndarray]:
    cert = []
    for k, d in enumerate(shape):
        e = np.zeros(d)
        e[index[k]] = -1.0 if (negate_first and k == 0) else 1.0
        cert.append(e)
    return cert


def max_norm(t) -> NormResult:
    """Largest absolute entry, with the attaining basis vectors.

    Ties break to the lexicographically smallest multi-index (first argmax
    in row-major order).  The sign is folded into the first basis vector so
    the certificate's inner product equals the value.
    """
    arr = as_tensor(t)
    if arr.size == 0:
        raise ValueError("empty tensor")
    pos = int(np.argmax(np.abs(arr.ravel())))
    index = np.unravel_index(pos, arr.shape)
    entry = float(arr[index])
    cert = _basis_certificate(arr.shape, index, negate_first=entry < 0)
    return NormResult(value=abs(entry), method="exact", certificate=cert)


def _contract_all_but(t: np.ndarray, vectors: list[np.ndarray], k: int) -> np.ndarray:
    """Contract every mode except k; returns a vector of length t.shape[k]."""
    w = t
    for j in range(t.ndim - 1, -1, -1):
        if j == k:
            continue
        w = np.tensordot(w, vectors[j], axes=(j if j < k else j, 0))
    return w


def _hopm_single(t: np.ndarray, init: list[np.ndarray], tol: float,
                 max_iters: int, reinit_seed: int):
    """One alternating-maximization run.

    Returns (objective, vectors, sweeps, history).  The per-sweep objective
    history is monotone nondecreasing: each factor update replaces v_k by
    the maximizer of |<T, v_1 x .. v_k .. x v_p>| with the others fixed.
    """
    p = t.ndim
    vectors = [np.array(v, dtype=np.float64) for v in init]
    obj = abs(rank1_value(t, vectors))
    history = [obj]
    sweeps = 0
    reinits = 0
    for sweep in range(max_iters):
        sweeps = sweep + 1
        for k in range(p):
            w = _contract_all_but(t, vectors, k)
            nw = float(np.linalg.norm(w))
            if nw < 1e-300:
                # degenerate contraction: restart this factor from the stream
                reinits += 1
                vectors[k] = unit_vector(reinit_seed, t.shape[k], row0=reinits)
            else:
                vectors[k] = w / nw
                obj = nw
        history.append(obj)
        if history[-1] - history[-2] < tol * max(1.0, history[-1]):
            break
    return obj, vectors, sweeps, history


def operator_norm_hopm(t, restarts: int = HOPM_RESTARTS, tol: float = HOPM_TOL,
                       max_iters: int = HOPM_MAX_ITERS, seed: int = 0) -> NormResult:
    """Lower bound on the operator norm by higher-order power iteration.

    Runs ``restarts`` seeded random starts plus one deterministic start at
    the basis vectors of the largest-magnitude entry, keeping the best
    attained |<T, v_1 x ... x v_p>|.  The rank-1 problem is nonconvex, so
    the value is a certified lower bound, exact for order <= 2 up to the
    tolerance.  Ties between restarts keep the lowest restart index, so a
    parallel implementation would return the identical result.
    """
    arr = as_tensor(t)
    if restarts < 0 or tol <= 0 or max_iters < 1:
        raise ValueError("need restarts >= 0, tol > 0, max_iters >= 1")
    p = arr.ndim
    mx = max_norm(arr)
    starts: list[list[np.ndarray]] = [mx.certificate]
    for r in range(restarts):
        rs = derive_seed(seed, r)
        starts.append([unit_vector(rs, arr.shape[k], row0=1000 * k) for k in range(p)])

    best_obj = -1.0
    best_vecs = None
    best_sweeps = 0
    total_sweeps = 0
    for ridx, init in enumerate(starts):
        obj, vecs, sweeps, _ = _hopm_single(
            arr, init, tol, max_iters, reinit_seed=derive_seed(seed, ridx, 0xDE6)
        )
        total_sweeps += sweeps
        if obj > best_obj:
            best_obj, best_vecs, best_sweeps = obj, vecs, sweeps
    if rank1_value(arr, best_vecs) < 0:
        best_vecs[0] = -best_vecs[0]
    return NormResult(value=best_obj, method="power_iteration",
                      certificate=best_vecs, iterations=total_sweeps,
                      restarts=len(starts))


def _angle_grid(d: int, steps: int) -> np.ndarray:
    if d == 1:
        return np.ones((1, 1))
    theta = np.arange(steps) * (2.0 * np.pi / steps)
    return np.column_stack([np.cos(theta), np.sin(theta)])


def operator_norm_grid(t, angular_steps: int) -> NormResult:
    """Brute-force operator-norm oracle for shapes with every d_k <= 2.

    Each two-dimensional factor's unit circle is gridded with
    ``angular_steps`` angles; the last two factors are solved exactly as the
    largest singular value of the remaining matrix, so orders 1 and 2 are
    exact regardless of the step count.  The result is an attained inner
    product: a lower bound converging to the operator norm as steps grow.
    Cost scales as steps^(p-2); intended as a small-instance test oracle.
    """
    arr = as_tensor(t)
    if angular_steps < 1:
        raise ValueError("angular_steps must be positive")
    if any(d > 2 for d in arr.shape):
        raise UnsupportedShapeError(
            f"grid oracle supports d_k <= 2 only, got shape {arr.shape}"
        )
    p = arr.ndim

    if p == 1:
        val = float(np.linalg.norm(arr))
        cert = [arr / val] if val > 0 else [np.eye(arr.shape[0])[0]]
        return NormResult(value=val, method="grid_oracle", certificate=cert)

    grids = [_angle_grid(d, angular_steps) for d in arr.shape[:-2]]
    n_combos = entry_count([g.shape[0] for g in grids])
    check_entry_budget([n_combos, arr.shape[-2], arr.shape[-1]])

    # stack of tail matrices indexed by the gridded factor combinations
    stack = arr[None, ...]
    for g in grids:
        # contract current leading tensor axis (axis 1) against the grid
        stack = np.einsum("xa...,ga->xg...", stack, g).reshape(
            (-1,) + stack.shape[2:]
        )
    svals = np.linalg.svd(stack, compute_uv=False)[:, 0]
    win = int(np.argmax(svals))
    value = float(svals[win])

    u_mats, s, vh = np.linalg.svd(stack[win])
    cert: list[np.ndarray] = []
    combo = np.unravel_index(win, tuple(g.shape[0] for g in grids)) if grids else ()
    for k, g in enumerate(grids):
        cert.append(g[combo[k]].copy())
    cert.append(u_mats[:, 0].copy())
    cert.append(vh[0, :].copy())
    if rank1_value(arr, cert) < 0:
        cert[0] = -cert[0]
    return NormResult(value=value, method="grid_oracle", certificate=cert,
                      iterations=int(n_combos))


def spectral_norm(a) -> float:
    """Matrix operator norm: max |eigenvalue| when symmetric, else sigma_max."""
    m = as_tensor(a)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    if m.shape[0] == m.shape[1] and np.array_equal(m, m.T):
        return float(np.max(np.abs(np.linalg.eigvalsh(m)))) if m.size else 0.0
    return float(np.linalg.norm(m, 2))


def max_abs(a) -> float:
    """Largest absolute entry of an array."""
    arr = as_tensor(a)
    return float(np.max(np.abs(arr))) if arr.size else 0.0


def save_tensor(t, path) -> None:
    """Write the text format: 'shape: d1 ... dp' then one entry per line.

    Entries are row-major, printed with repr so they round-trip exactly.
    """
    arr = as_tensor(t)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write("shape: " + " ".join(str(d) for d in arr.shape) + "\n")
        for x in arr.ravel():
            fh.write(repr(float(x)) + "\n")


def load_tensor(path) -> np.ndarray:
    """Read the text format written by save_tensor."""
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if not header.startswith("shape:"):
            raise ValueError(f"{path}: missing 'shape:' header line")
        shape = tuple(int(s) for s in header[len("shape:"):].split())
        if not shape or any(d < 1 for d in shape):
            raise ValueError(f"{path}: bad shape {shape}")
        check_entry_budget(shape)
        n = entry_count(shape)
        data = np.empty(n, dtype=np.float64)
        for i in range(n):
            line = fh.readline()
            if not line:
                raise ValueError(f"{path}: expected {n} entries, got {i}")
            data[i] = float(line)
        if fh.readline().strip():
            raise ValueError(f"{path}: trailing data beyond {n} entries")
    return as_tensor(data.reshape(shape))
