"""Mixed even p-spin Hamiltonians on raw Gaussian disorder tensors.

H(x) = <h, x> + sum_p gamma_p N^{-(p-1)/2} <G^(p), x^{tensor p}> with G^(p)
a flat array of N^p i.i.d. standard normals (never symmetrized; contracting
x^{tensor p} directly keeps the covariance exactly N xi(R)).
"""

import struct
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator, eigsh

from . import rng
from .errors import ArgumentError, DomainError, NumericError, ResourceError
from .mixture import Mixture
from .points import norm_n_sq, project_ball, sphere_point

DEFAULT_MAX_TENSOR_ENTRIES = 2**27
DEFAULT_DENSE_HESSIAN_CAP = 512
RADIUS_SQ_CAP = 2.0  # evaluation ball |x|_N <= sqrt(2)
_RADIUS_TOL = 1e-9

_SNAPSHOT_MAGIC = b"SPGLASS1"
_SNAPSHOT_VERSION = 1


@dataclass(frozen=True)
class Hamiltonian:
    """Sampled disorder plus mixture; immutable after construction."""

    mixture: Mixture
    n: int
    tensors: dict  # p -> ndarray of shape (n,) * p
    seed: int | None = None
    label: str = ""

    def __post_init__(self):
        for p in self.mixture.ps:
            t = self.tensors[p]
            if t.shape != (self.n,) * p:
                raise ArgumentError(f"tensor for p={p} has shape {t.shape}, want {(self.n,) * p}")

    @property
    def coefficients(self) -> np.ndarray:
        """Disorder vector g(H): tensors concatenated in ascending-p order."""
        return np.concatenate([self.tensors[p].ravel() for p in self.mixture.ps])

    def with_tensors(self, tensors: dict, label: str = "") -> "Hamiltonian":
        return Hamiltonian(self.mixture, self.n, tensors, seed=None, label=label)


def _tensor_stream(seed: int, p: int) -> np.random.Generator:
    # stream labels (seed, "tensor", p); entry index = position in the stream
    return rng.stream(seed, "tensor", p)


def sample_tensor(seed: int, p: int, n: int) -> np.ndarray:
    return _tensor_stream(seed, p).standard_normal(n**p).reshape((n,) * p)


def check_budget(m: Mixture, n: int, max_entries: int = DEFAULT_MAX_TENSOR_ENTRIES):
    for p in m.ps:
        if n**p > max_entries:
            raise ResourceError(
                f"tensor for p={p} needs {n**p} entries, over the budget of {max_entries}"
            )


def sample_hamiltonian(
    m: Mixture, n: int, seed: int, max_entries: int = DEFAULT_MAX_TENSOR_ENTRIES
) -> Hamiltonian:
    """Deterministic disorder sample; bit-identical for equal (m, n, seed)."""
    if n < 1:
        raise ArgumentError(f"dimension n={n} must be >= 1")
    check_budget(m, n, max_entries)
    tensors = {p: sample_tensor(seed, p, n) for p in m.ps}
    return Hamiltonian(m, n, tensors, seed=seed)


def _check_radius(h: Hamiltonian, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape != (h.n,):
        raise ArgumentError(f"point has shape {x.shape}, want ({h.n},)")
    if norm_n_sq(x) > RADIUS_SQ_CAP + _RADIUS_TOL:
        raise DomainError(f"|x|_N^2 = {norm_n_sq(x):.6g} outside the sqrt(2) evaluation ball")
    return x


def _contract(tensor: np.ndarray, assign: list, keep=()) -> np.ndarray:
    """Contract every axis not in `keep` with its assigned vector; kept axes
    come out in ascending original order.

    First/last axes contract as reshape matvecs (no transpose copy of the
    large tensor); only interior axes trapped between kept ones fall back to
    tensordot, by which point the array is at least one power of n smaller.
    """
    part = tensor
    axes = list(range(tensor.ndim))
    while len(axes) > len(keep):
        if axes[-1] not in keep:
            ax = axes.pop()
            lead = part.shape[:-1]
            part = (part.reshape(-1, part.shape[-1]) @ assign[ax]).reshape(lead)
        elif axes[0] not in keep:
            ax = axes.pop(0)
            tail = part.shape[1:]
            part = (assign[ax] @ part.reshape(part.shape[0], -1)).reshape(tail)
        else:
            pos = next(i for i, a in enumerate(axes) if a not in keep)
            ax = axes.pop(pos)
            part = np.tensordot(part, assign[ax], axes=([pos], [0]))
    return part


def _scale(m: Mixture, p: int, n: int) -> float:
    return m.gammas[p] * n ** (-(p - 1) / 2)


def energy(h: Hamiltonian, x) -> float:
    """H(x) = <h, x> + sum_p gamma_p N^{-(p-1)/2} <G^(p), x^{tensor p}>."""
    x = _check_radius(h, x)
    val = h.mixture.h * float(np.sum(x))
    for p in h.mixture.ps:
        g = _scale(h.mixture, p, h.n)
        if g == 0.0:
            continue
        val += g * float(_contract(h.tensors[p], [x] * p))
    return val


def gradient(h: Hamiltonian, x) -> np.ndarray:
    """Exact analytic gradient, summing slot-wise partial contractions."""
    x = _check_radius(h, x)
    grad = np.full(h.n, h.mixture.h)
    for p in h.mixture.ps:
        g = _scale(h.mixture, p, h.n)
        if g == 0.0:
            continue
        assign = [x] * p
        for s in range(p):
            grad += g * _contract(h.tensors[p], assign, keep=(s,))
    return grad


def _hessian_pair_blocks(h: Hamiltonian, x):
    """Yield (scale, s, t, block) over ordered slot pairs s != t, where block
    is the tensor contracted with x on all other slots, axes ordered (s, t)."""
    for p in h.mixture.ps:
        g = _scale(h.mixture, p, h.n)
        if g == 0.0 or p < 2:
            continue
        assign = [x] * p
        for s in range(p):
            for t in range(s + 1, p):
                block = _contract(h.tensors[p], assign, keep=(s, t))
                yield g, s, t, block


def hessian(h: Hamiltonian, x, dense_cap: int = DEFAULT_DENSE_HESSIAN_CAP) -> np.ndarray:
    """Dense symmetric Hessian of the energy; refuses n above dense_cap."""
    if h.n > dense_cap:
        raise ResourceError(f"dense Hessian refused for n={h.n} > cap {dense_cap}")
    x = _check_radius(h, x)
    out = np.zeros((h.n, h.n))
    for g, s, t, block in _hessian_pair_blocks(h, x):
        out += g * (block + block.T)  # ordered pairs (s,t) and (t,s)
    return out


def hessian_apply(h: Hamiltonian, x, w) -> np.ndarray:
    """Hessian-vector product, O(n) memory, available at any n."""
    x = _check_radius(h, x)
    w = np.asarray(w, dtype=float)
    out = np.zeros(h.n)
    for p in h.mixture.ps:
        g = _scale(h.mixture, p, h.n)
        if g == 0.0 or p < 2:
            continue
        for s in range(p):
            for t in range(p):
                if s == t:
                    continue
                assign = [x] * p
                assign[t] = w
                out += g * _contract(h.tensors[p], assign, keep=(s,))
    return out


def hessian_operator(h: Hamiltonian, x) -> LinearOperator:
    x = np.asarray(x, dtype=float)
    return LinearOperator(
        (h.n, h.n), matvec=lambda w: hessian_apply(h, x, np.asarray(w).ravel())
    )


def restricted_top_eigvec(h: Hamiltonian, x, basis, tol: float = 1e-10, maxiter: int = 10_000):
    """Top eigenpair of the Hessian restricted (as a bilinear form) to span(basis).

    basis: array (k, n) of Euclidean-orthonormal rows.  Returns the l2-unit
    eigenvector in R^n inside the span and the raw matrix eigenvalue, with
    relative eigen-residual <= 1e-8.
    """
    basis = np.atleast_2d(np.asarray(basis, dtype=float))
    k = basis.shape[0]
    gram = basis @ basis.T
    if np.max(np.abs(gram - np.eye(k))) > tol:
        raise ArgumentError("basis is not orthonormal within 1e-10")

    images = np.stack([hessian_apply(h, x, b) for b in basis])
    small = basis @ images.T
    small = 0.5 * (small + small.T)
    if k <= 64:
        vals, vecs = np.linalg.eigh(small)
        idx = int(np.argmax(vals))
        lam, coef = float(vals[idx]), vecs[:, idx]
    else:
        op = LinearOperator((k, k), matvec=lambda c: small @ c)
        v0 = rng.stream(0, "rtev", k).standard_normal(k)
        try:
            vals, vecs = eigsh(op, k=1, which="LA", v0=v0, maxiter=maxiter)
        except Exception as exc:  # pragma: no cover - ARPACK failure path
            raise NumericError(f"restricted eigensolve did not converge: {exc}") from exc
        lam, coef = float(vals[0]), vecs[:, 0]
    vec = coef @ basis
    vec /= np.linalg.norm(vec)
    residual = np.linalg.norm(small @ coef - lam * coef)
    if residual > 1e-8 * max(1.0, abs(lam)):
        raise NumericError(f"eigen-residual {residual:.3g} above 1e-8 tolerance")
    return vec, lam


def projected_top_eigvec(h: Hamiltonian, x, orth=(), k: int = 1, seed: int = 0):
    """Top-k l2-unit eigenpairs of P Hess(x) P, P projecting out span(orth).

    Dense eigh below the dimension cap, Lanczos on hessian_apply above it.
    Returns (vectors (k, n), eigenvalues (k,)) in descending order.
    """
    ortho = _orthonormalize(orth, h.n)

    def proj(v):
        if ortho.size:
            v = v - ortho.T @ (ortho @ v)
        return v

    if h.n <= DEFAULT_DENSE_HESSIAN_CAP:
        hess = hessian(h, x)
        if ortho.size:
            pmat = np.eye(h.n) - ortho.T @ ortho
            hess = pmat @ hess @ pmat
        vals, vecs = np.linalg.eigh(0.5 * (hess + hess.T))
        order = np.argsort(vals)[::-1][:k]
        return vecs[:, order].T.copy(), vals[order]

    op = LinearOperator(
        (h.n, h.n),
        matvec=lambda w: proj(hessian_apply(h, x, proj(np.asarray(w).ravel()))),
    )
    v0 = rng.stream(seed, "proj-eig", h.n).standard_normal(h.n)
    try:
        vals, vecs = eigsh(op, k=k, which="LA", v0=v0)
    except Exception as exc:  # pragma: no cover
        raise NumericError(f"projected eigensolve did not converge: {exc}") from exc
    order = np.argsort(vals)[::-1]
    return vecs[:, order].T.copy(), vals[order]


def _orthonormalize(vectors, n: int) -> np.ndarray:
    rows = []
    for v in vectors:
        v = np.asarray(v, dtype=float).copy()
        for r in rows:
            v -= (r @ v) * r
        nrm = np.linalg.norm(v)
        if nrm > 1e-12:
            rows.append(v / nrm)
    if not rows:
        return np.empty((0, n))
    return np.stack(rows)


# -- operator-norm probe ------------------------------------------------------


def _ordered_tuples(p: int, k: int):
    if k == 1:
        for s in range(p):
            yield (s,)
    elif k == 2:
        for s in range(p):
            for t in range(p):
                if s != t:
                    yield (s, t)
    elif k == 3:
        for s in range(p):
            for t in range(p):
                for u in range(p):
                    if len({s, t, u}) == 3:
                        yield (s, t, u)
    else:
        raise ArgumentError(f"k={k} unsupported")


def _k_form_value(h: Hamiltonian, x, sigmas) -> float:
    """<grad^k H(x), sigma^1 x ... x sigma^k>, raw (unnormalized)."""
    k = len(sigmas)
    val = 0.0
    if k == 1:
        val += h.mixture.h * float(np.sum(sigmas[0]))
    for p in h.mixture.ps:
        g = _scale(h.mixture, p, h.n)
        if g == 0.0 or p < k:
            continue
        for slots in _ordered_tuples(p, k):
            assign = [x] * p
            for a, s in enumerate(slots):
                assign[s] = sigmas[a]
            val += g * float(_contract(h.tensors[p], assign))
    return val


def _k_form_grad(h: Hamiltonian, x, sigmas, wrt: str, a: int = 0) -> np.ndarray:
    """Gradient of the k-form in sigma_a (wrt='sigma') or in x (wrt='x')."""
    k = len(sigmas)
    grad = np.zeros(h.n)
    if wrt == "sigma" and k == 1:
        grad += h.mixture.h
    for p in h.mixture.ps:
        g = _scale(h.mixture, p, h.n)
        if g == 0.0 or p < k + (1 if wrt == "x" else 0) or p < k:
            continue
        for slots in _ordered_tuples(p, k):
            assign = [x] * p
            for b, s in enumerate(slots):
                assign[s] = sigmas[b]
            if wrt == "sigma":
                grad += g * _contract(h.tensors[p], assign, keep=(slots[a],))
            else:
                for free in range(p):
                    if free in slots:
                        continue
                    grad += g * _contract(h.tensors[p], assign, keep=(free,))
    return grad


def op_norm_probe(
    h: Hamiltonian,
    k: int,
    r: float,
    trials: int,
    seed: int,
    iters: int = 40,
) -> float:
    """Lower estimate of sup_{|x|_N <= r} |grad^k H(x)|_op by random-restart
    alternating maximization; nondecreasing in `trials` on a fixed seed."""
    if k not in (1, 2, 3):
        raise ArgumentError(f"k={k} must be in {{1, 2, 3}}")
    if not (1.0 <= r < np.sqrt(2.0)):
        raise ArgumentError(f"radius r={r} must satisfy 1 <= r < sqrt(2)")
    best = 0.0
    sqrt_n = np.sqrt(h.n)
    for trial in range(trials):
        g = rng.stream(seed, "opnorm", trial)
        x = r * sphere_point(g.standard_normal(h.n))
        sigmas = [sphere_point(g.standard_normal(h.n)) for _ in range(k)]
        step = 0.5 * r
        for _ in range(iters):
            for a in range(k):
                direction = _k_form_grad(h, x, sigmas, "sigma", a)
                nrm = np.linalg.norm(direction)
                if nrm > 0:
                    sigmas[a] = direction * (sqrt_n / nrm)
            if _k_form_value(h, x, sigmas) < 0:
                sigmas[0] = -sigmas[0]
            gx = _k_form_grad(h, x, sigmas, "x")
            nrm = np.linalg.norm(gx)
            if nrm > 0:
                cand = project_ball(x + step * sqrt_n * gx / nrm, r)
                if _k_form_value(h, cand, sigmas) > _k_form_value(h, x, sigmas):
                    x = cand
                else:
                    step *= 0.5
        best = max(best, abs(_k_form_value(h, x, sigmas)) / h.n)
    return best


# -- snapshot serialization ----------------------------------------------------


def save_snapshot(h: Hamiltonian, path):
    """Binary snapshot: header + little-endian f64 payloads in ascending p."""
    seed = 0 if h.seed is None else int(h.seed) % 2**64
    has_seed = h.seed is not None
    with open(path, "wb") as f:
        f.write(_SNAPSHOT_MAGIC)
        f.write(struct.pack("<IQdQB", _SNAPSHOT_VERSION, h.n, h.mixture.h, seed, int(has_seed)))
        f.write(struct.pack("<I", len(h.mixture.ps)))
        for p in h.mixture.ps:
            f.write(struct.pack("<Id", p, h.mixture.gammas[p]))
        for p in h.mixture.ps:
            f.write(np.ascontiguousarray(h.tensors[p], dtype="<f8").tobytes())


def load_snapshot(path) -> Hamiltonian:
    with open(path, "rb") as f:
        magic = f.read(8)
        if magic != _SNAPSHOT_MAGIC:
            raise ArgumentError(f"bad snapshot magic {magic!r}")
        version, n, hfield, seed, has_seed = struct.unpack("<IQdQB", f.read(29))
        if version != _SNAPSHOT_VERSION:
            raise ArgumentError(f"unsupported snapshot version {version}")
        (nterms,) = struct.unpack("<I", f.read(4))
        gammas = {}
        for _ in range(nterms):
            p, gam = struct.unpack("<Id", f.read(12))
            gammas[p] = gam
        mixture = Mixture(gammas, h=hfield)
        tensors = {}
        for p in mixture.ps:
            count = n**p
            data = np.frombuffer(f.read(8 * count), dtype="<f8").astype(float)
            tensors[p] = data.reshape((n,) * p)
    return Hamiltonian(mixture, int(n), tensors, seed=int(seed) if has_seed else None)
