"""One-dimensional Parisi PDE via the backward Cole-Hopf recursion, the Ising
functional and its variational minimization, and the multidimensional
recursion evaluated by nested Monte Carlo.

On each interval where zeta = c is constant the PDE solution satisfies
Phi(t, x) = (1/c) log E exp(c Phi(t+, x + Z sqrt(xi'(t+) - xi'(t)))),
with the plain heat step at c = 0.  The beta = infinity terminal |x| - ax is
integrated in closed form (erf); smooth slices use Gauss-Hermite quadrature
on the spatial grid with linear tail extrapolation at the asymptotic slopes.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import minimize_scalar
from scipy.special import log_ndtr, logsumexp, ndtr, roots_hermite

from .. import rng
from ..ensembles import CorrelationLadder, OverlapLadder, TreeShape, m_matrix
from ..errors import ArgumentError, NumericError
from ..mixture import Mixture, xi_eval
from .zeta import PiecewiseZeta

_SELF_CHECK_TOL = 1e-6


def _log2cosh(u):
    u = np.abs(u)
    return u + np.log1p(np.exp(-2.0 * u))


def _terminal(x, a: float, beta: float):
    if math.isinf(beta):
        return np.abs(x) - a * x
    return _log2cosh(beta * x) / beta - a * x


@dataclass
class PDESolution:
    """Phi on the time knots of zeta (plus t=0 and t=1) over a spatial grid.

    Convex and (1+|a|)-Lipschitz in x at every slice; tails extended
    linearly at the terminal slopes (-1-a, 1-a).
    """

    times: tuple
    grid: np.ndarray
    values: dict = field(repr=False)  # time -> array over grid
    a: float = 0.0
    beta: float = math.inf
    meta: dict = field(default_factory=dict)

    @property
    def slopes(self):
        return (-1.0 - self.a, 1.0 - self.a)

    def slice_at(self, t: float) -> np.ndarray:
        for tk in self.times:
            if abs(tk - t) <= 1e-12:
                return self.values[tk]
        raise ArgumentError(f"t={t} is not a stored time knot {self.times}")

    def eval(self, t: float, x) -> float | np.ndarray:
        vals = self.slice_at(t)
        return _pl_eval(np.asarray(x, dtype=float), self.grid, vals, self.slopes)


def _pl_eval(x, grid, vals, slopes):
    out = np.interp(x, grid, vals)
    lo, hi = grid[0], grid[-1]
    left = x < lo
    right = x > hi
    if np.any(left):
        out = np.where(left, vals[0] + slopes[0] * (x - lo), out)
    if np.any(right):
        out = np.where(right, vals[-1] + slopes[1] * (x - hi), out)
    return out if out.ndim else float(out)


def _default_grid(m: Mixture, center: float = 0.0):
    # dx keeps the piecewise-linear wiggle sampled by Gauss-Hermite below the
    # 1e-6 node-doubling self-check for slices of curvature up to ~2
    length = abs(center) + 6.0 * math.sqrt(max(xi_eval(m, 1.0, 1), 1e-12)) + 2.0
    return (length, 0.002)


def _terminal_kink_step(grid, s: float, c: float, a: float):
    """Exact backward step from the beta = infinity terminal |y| - ay over a
    Gaussian increment of std s; c is the zeta level (c = 0 gives the folded
    normal mean)."""
    x = grid
    if c == 0.0:
        z = x / s
        return s * math.sqrt(2.0 / math.pi) * np.exp(-0.5 * z * z) + x * (1.0 - 2.0 * ndtr(-z)) - a * x
    lam_p = c * (1.0 - a)
    lam_m = -c * (1.0 + a)
    log_pos = lam_p * x + 0.5 * lam_p**2 * s**2 + log_ndtr((x + lam_p * s**2) / s)
    log_neg = lam_m * x + 0.5 * lam_m**2 * s**2 + log_ndtr(-(x + lam_m * s**2) / s)
    return np.logaddexp(log_pos, log_neg) / c


def _terminal_quad_step(grid, s: float, c: float, a: float, beta: float):
    """Backward step from the finite-beta terminal by composite Gauss-Legendre
    panels in y, refined near the terminal's curvature region |y| <= 12/beta,
    so the 1/beta scale never limits the spatial grid or the Hermite nodes."""
    tilt = c * (1.0 + abs(a)) * s  # exponential tilt rate of the integrand
    reach = (12.0 + tilt) * s
    lo, hi = grid[0] - reach, grid[-1] + reach
    fine_half = min(12.0 / beta, hi - lo)
    edges = [lo]
    # coarse panels resolve the Gaussian kernel; fine panels the terminal kink
    coarse = max(s / 3.0, 2.0 * fine_half / 64.0, (hi - lo) / 4000.0)
    fine = max(fine_half / 24.0, (hi - lo) / 100_000.0)
    y = lo
    while y < hi:
        width = fine if abs(y) <= fine_half or abs(y + coarse) <= fine_half else coarse
        y = min(y + width, hi)
        edges.append(y)
    edges = np.asarray(edges)
    gl_z, gl_w = np.polynomial.legendre.leggauss(8)
    mids = 0.5 * (edges[:-1] + edges[1:])
    halfw = 0.5 * np.diff(edges)
    ys = (mids[:, None] + halfw[:, None] * gl_z[None, :]).ravel()
    ws = (halfw[:, None] * gl_w[None, :]).ravel()
    fy = _terminal(ys, a, beta)

    out = np.empty_like(grid)
    chunk = 512
    log_norm = math.log(math.sqrt(2.0 * math.pi) * s)
    for start in range(0, len(grid), chunk):
        x = grid[start : start + chunk][:, None]
        log_kernel = -0.5 * ((ys[None, :] - x) / s) ** 2 - log_norm
        if c == 0.0:
            out[start : start + chunk] = (np.exp(log_kernel) * ws[None, :]) @ fy
        else:
            out[start : start + chunk] = (
                logsumexp(c * fy[None, :] + log_kernel, b=ws[None, :], axis=1) / c
            )
    return out


_gh_roots_cache: dict = {}


def _gh_roots(nodes: int):
    if nodes not in _gh_roots_cache:
        z, w = roots_hermite(nodes)
        with np.errstate(divide="ignore"):
            logw = np.log(w) - 0.5 * math.log(math.pi)
        _gh_roots_cache[nodes] = (z, w, logw)
    return _gh_roots_cache[nodes]


def _shifted_slice(grid, vals, slopes, delta: float) -> np.ndarray:
    """Slice values at grid + delta via a three-point quadratic stencil
    around the nearest node (linear tails beyond the grid).  The grid is
    uniform, so a constant shift is pure index arithmetic; the quadratic
    stencil keeps Gauss-Hermite node-doubling stable to O(dx^3)."""
    n = len(grid)
    dx = grid[1] - grid[0]
    shift = delta / dx
    nearest = math.floor(shift + 0.5)
    t = shift - nearest  # in [-0.5, 0.5)
    base = np.arange(n) + nearest
    core = np.clip(base, 1, n - 2)
    vm, v0, vp = vals[core - 1], vals[core], vals[core + 1]
    out = v0 + 0.5 * t * (vp - vm) + 0.5 * t * t * (vp - 2.0 * v0 + vm)
    # linear beyond the second-to-last interior stencil
    lo_mask = base < 1
    hi_mask = base > n - 2
    if lo_mask.any():
        off = (base[lo_mask] + t) * dx
        out[lo_mask] = np.where(
            base[lo_mask] + t >= 0,
            vals[0] + (vals[1] - vals[0]) / dx * off,
            vals[0] + slopes[0] * off,
        )
    if hi_mask.any():
        off = (base[hi_mask] + t) * dx - (n - 1) * dx
        out[hi_mask] = np.where(
            base[hi_mask] + t <= n - 1,
            vals[-1] + (vals[-1] - vals[-2]) / dx * off,
            vals[-1] + slopes[1] * off,
        )
    return out


def _gh_step(grid, vals, slopes, s: float, c: float, nodes: int):
    """Gauss-Hermite Cole-Hopf step on the piecewise-linear slice."""
    z, w, logw = _gh_roots(nodes)
    fmat = np.stack(
        [_shifted_slice(grid, vals, slopes, math.sqrt(2.0) * s * zj) for zj in z]
    )
    if c == 0.0:
        return (w / math.sqrt(math.pi)) @ fmat
    a = c * fmat + logw[:, None]
    amax = a.max(axis=0)
    return (np.log(np.sum(np.exp(a - amax[None, :]), axis=0)) + amax) / c


def _log_gauss_mass(a, b):
    """log(Phi(b) - Phi(a)) for a < b, stable in both tails."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    out = np.empty(np.broadcast(a, b).shape)
    flip = b <= 0.0
    aa = np.where(flip, -b, a)
    bb = np.where(flip, -a, b)
    # now the mass is on [aa, bb] with bb > 0
    straddle = aa < 0.0
    with np.errstate(divide="ignore"):
        out = np.where(
            straddle,
            np.log(np.maximum(ndtr(bb) - ndtr(aa), 1e-320)),
            log_ndtr(-aa) + np.log(-np.expm1(np.minimum(log_ndtr(-bb) - log_ndtr(-aa), -1e-320))),
        )
    return out


def _exact_pl_step(grid, vals, slopes, s: float, c: float):
    """Exact Gaussian convolution of the piecewise-linear slice (with linear
    tails); O(n_grid^2) per step but kink-exact."""
    edges = np.concatenate([[-np.inf], grid, [np.inf]])
    seg_lo = edges[:-1]
    seg_hi = edges[1:]
    slopes_seg = np.empty(len(grid) + 1)
    slopes_seg[0] = slopes[0]
    slopes_seg[-1] = slopes[1]
    slopes_seg[1:-1] = np.diff(vals) / np.diff(grid)
    # intercept alpha so f(y) = alpha + beta y on each segment
    anchor_x = np.concatenate([[grid[0]], grid])
    anchor_v = np.concatenate([[vals[0]], vals])
    alpha = anchor_v - slopes_seg * anchor_x

    out = np.empty(len(grid))
    chunk = 256
    for start in range(0, len(grid), chunk):
        x = grid[start : start + chunk][:, None]
        if c == 0.0:
            lo = (seg_lo[None, :] - x) / s
            hi = (seg_hi[None, :] - x) / s
            mass = ndtr(hi) - ndtr(lo)
            phi_lo = np.where(np.isfinite(lo), np.exp(-0.5 * lo**2), 0.0) / math.sqrt(2 * math.pi)
            phi_hi = np.where(np.isfinite(hi), np.exp(-0.5 * hi**2), 0.0) / math.sqrt(2 * math.pi)
            mean_y = x * mass - s * (phi_hi - phi_lo)
            out[start : start + chunk] = np.sum(
                alpha[None, :] * mass + slopes_seg[None, :] * mean_y, axis=1
            )
        else:
            shift = x + c * slopes_seg[None, :] * s**2
            log_mass = _log_gauss_mass((seg_lo[None, :] - shift) / s, (seg_hi[None, :] - shift) / s)
            log_term = (
                c * alpha[None, :]
                + c * slopes_seg[None, :] * x
                + 0.5 * (c * slopes_seg[None, :] * s) ** 2
                + log_mass
            )
            out[start : start + chunk] = logsumexp(log_term, axis=1) / c
    return out


def solve_parisi_pde(
    m: Mixture,
    zeta: PiecewiseZeta,
    a: float = 0.0,
    beta: float = math.inf,
    grid=None,
    center: float = 0.0,
    gh_nodes: int = 64,
    method: str = "gh",
    self_check: bool = True,
) -> PDESolution:
    """Backward Cole-Hopf recursion for the Parisi PDE with terminal
    log(2cosh(beta x))/beta - ax (|x| - ax at beta = infinity).

    grid is (L, dx): spatial domain [center-L, center+L], spacing dx <= 0.01 L.
    The node-doubling self-check raises NumericError when the quadrature is
    under-resolved (Phi(0, center) moves by more than 1e-6).
    """
    if not (-1.0 <= a <= 1.0):
        raise ArgumentError(f"a={a} outside [-1, 1]")
    if beta <= 0:
        raise ArgumentError(f"beta={beta} must be positive (or inf)")
    if grid is None:
        grid = _default_grid(m, center)
    length, dx = grid
    if dx > 0.01 * length + 1e-15:
        raise ArgumentError(f"dx={dx} too coarse for L={length}: need dx <= 0.01 L")
    half = int(math.ceil(length / dx))
    xs = center + dx * np.arange(-half, half + 1)

    sol = _solve_on_grid(m, zeta, a, beta, xs, gh_nodes, method)
    if self_check and method == "gh" and sol.meta["gh_steps"] > 0:
        # the first backward step is node-count independent; reuse it
        ref = _solve_on_grid(m, zeta, a, beta, xs, 2 * gh_nodes, method, warm=sol)
        delta = abs(sol.eval(0.0, center) - ref.eval(0.0, center))
        sol.meta["self_check_delta"] = delta
        if delta > _SELF_CHECK_TOL:
            raise NumericError(
                f"quadrature self-check failed: doubling nodes moved Phi(0, {center}) by {delta:.3g}"
            )
    return sol


def _solve_on_grid(m, zeta, a, beta, xs, gh_nodes, method, warm=None) -> PDESolution:
    slopes = (-1.0 - a, 1.0 - a)
    knots = sorted(set(zeta.breaks) | {0.0})
    times = knots + [1.0]
    vals = {1.0: _terminal(xs, a, beta)}
    current = vals[1.0]
    gh_steps = 0
    first = True
    for t_hi, t_lo in zip(times[::-1], times[::-1][1:]):
        c = zeta(t_lo)
        s2 = xi_eval(m, t_hi, 1) - xi_eval(m, t_lo, 1)
        if s2 <= 0.0:
            vals[t_lo] = current.copy()
            first = False
            continue
        s = math.sqrt(s2)
        if first:
            if warm is not None:
                current = warm.values[t_lo]
            elif math.isinf(beta):
                current = _terminal_kink_step(xs, s, c, a)
            else:
                current = _terminal_quad_step(xs, s, c, a, beta)
        elif method == "exact":
            current = _exact_pl_step(xs, current, slopes, s, c)
        else:
            current = _gh_step(xs, current, slopes, s, c, gh_nodes)
            gh_steps += 1
        vals[t_lo] = current
        first = False
    return PDESolution(
        times=tuple(times),
        grid=xs,
        values=vals,
        a=a,
        beta=beta,
        meta={"gh_nodes": gh_nodes, "method": method, "gh_steps": gh_steps},
    )


def parisi_is(zeta: PiecewiseZeta, m: Mixture, grid=None, **solver_kw) -> float:
    """P(zeta) = Phi_zeta(0, h) - (1/2) integral_0^1 t xi''(t) zeta(t) dt."""
    sol = solve_parisi_pde(m, zeta, a=0.0, beta=math.inf, grid=grid, center=m.h, **solver_kw)
    return float(sol.eval(0.0, m.h)) - 0.5 * zeta.integral_t_xi2(m)


def shift_identity_check(m: Mixture, zeta: PiecewiseZeta, a: float, x: float, grid=None, **kw) -> float:
    """|Phi_zeta(0, y) - a y - Phi_{a,zeta}(0, x) - (a^2/2) int xi'' zeta| with
    y = x - a int xi'' zeta, from two solver runs."""
    j = zeta.integral_xi2(m, 0.0, 1.0)
    y = x - a * j
    left = solve_parisi_pde(m, zeta, a=0.0, beta=math.inf, grid=grid, center=y, **kw)
    right = solve_parisi_pde(m, zeta, a=a, beta=math.inf, grid=grid, center=x, **kw)
    lhs = float(left.eval(0.0, y)) - a * y
    rhs = float(right.eval(0.0, x)) + 0.5 * a * a * j
    return abs(lhs - rhs)


def alg_is_numeric(
    m: Mixture,
    knots: int = 16,
    grid=None,
    sweeps_min: int = 3,
    sweeps_max: int = 12,
    sweep_tol: float = 1e-6,
    value_cap: float = 32.0,
    **solver_kw,
) -> float:
    """Coordinate-descent minimization of the Ising functional over
    nonnegative (not necessarily monotone) step profiles on a uniform q-grid.

    Restarts from zero, constant, and a slope-profile initialization; the
    knot count is refined by doubling with warm starts, so the output is
    nonincreasing when `knots` doubles.
    """
    if knots < 8:
        raise ArgumentError(f"knots={knots} must be >= 8")
    if grid is None:
        length = abs(m.h) + 6.0 * math.sqrt(max(xi_eval(m, 1.0, 1), 1e-12)) + 2.0
        grid = (length, min(0.04, 0.01 * length))

    def objective(breaks, values):
        return parisi_is(PiecewiseZeta(breaks, values), m, grid=grid, self_check=False, **solver_kw)

    def sweep_down(breaks, values):
        values = list(values)
        best = objective(breaks, tuple(values))
        for sweep in range(sweeps_max):
            improved = 0.0
            for i in range(len(values)):
                def f(v):
                    trial = values.copy()
                    trial[i] = v
                    return objective(breaks, tuple(trial))

                res = minimize_scalar(f, bounds=(0.0, value_cap), method="bounded",
                                      options={"xatol": 1e-3})
                lo = max(0.0, 0.7 * values[i] - 0.05)
                hi = min(value_cap, 1.4 * values[i] + 0.05)
                local = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                                        options={"xatol": 1e-4})
                if local.fun < res.fun:
                    res = local
                if res.fun < best:
                    improved += best - res.fun
                    best = res.fun
                    values[i] = float(res.x)
            if improved < sweep_tol and sweep + 1 >= sweeps_min:
                break
        return values, best

    levels = 8
    breaks = tuple(i / levels for i in range(levels))
    starts = [
        [0.0] * levels,
        [1.0] * levels,
        [min(_slope_profile(m, (b + 0.5 / levels)), value_cap) for b in breaks],
    ]
    starts = [s for i, s in enumerate(starts) if s not in starts[:i]]
    best_vals, best = None, math.inf
    for start in starts:
        vals, obj = sweep_down(breaks, start)
        if obj < best:
            best_vals, best = vals, obj
    while levels < knots:
        levels *= 2
        breaks = tuple(i / levels for i in range(levels))
        best_vals = [best_vals[i // 2] for i in range(levels)]
        best_vals, best = sweep_down(breaks, best_vals)
    return float(best)


def _slope_profile(m: Mixture, q: float) -> float:
    """xi'''(q) / (2 xi''(q)^{3/2}), the spherical-style slope initialization."""
    denom = xi_eval(m, q, 2)
    if denom <= 1e-12:
        return 0.0
    return xi_eval(m, q, 3) / (2.0 * denom**1.5)


# -- multidimensional recursion by nested Monte Carlo ---------------------------


@dataclass
class MCEstimate:
    value: float
    se: float
    bias: float  # outer-level jackknife bias estimate


def _sqrt_psd(mat: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(mat)
    vals = np.clip(vals, 0.0, None)
    return vecs * np.sqrt(vals) @ vecs.T


def phi_multidim_mc(
    shape: TreeShape,
    pladder: CorrelationLadder,
    qladder: OverlapLadder,
    zeta_levels,
    a: float,
    x,
    m: Mixture,
    samples: int = 100_000,
    seed: int = 0,
) -> MCEstimate:
    """Nested Monte Carlo for the K-dimensional recursion with terminal
    sum_u log(2cosh x_u) - a x_u, Gaussian increments eta_d ~ N(0, M^d), and
    per-level log-mean-exp at the zeta levels (plain mean below q_0 and at
    zero levels)."""
    K = shape.n_leaves
    if K > 4:
        raise ArgumentError(f"K={K} too large for nested MC (K <= 4)")
    x = np.asarray(x, dtype=float)
    if x.shape != (K,):
        raise ArgumentError(f"x has shape {x.shape}, want ({K},)")
    levels = [float(z) for z in zeta_levels]
    if len(levels) != shape.depth:
        raise ArgumentError("need one zeta level per tree depth")
    qs = qladder.qs

    layers = []  # (std, cov sqrt, zeta level applied when reducing this layer)
    s2_head = xi_eval(m, qs[0], 1) - xi_eval(m, 0.0, 1)
    if s2_head > 0:
        layers.append((math.sqrt(s2_head), _sqrt_psd(m_matrix(shape, pladder, 1)), 0.0))
    for d in range(shape.depth):
        s2 = xi_eval(m, qs[d + 1], 1) - xi_eval(m, qs[d], 1)
        layers.append((math.sqrt(max(s2, 0.0)), _sqrt_psd(m_matrix(shape, pladder, d + 1)), levels[d]))

    if not layers:
        val = float(np.sum(_log2cosh(x) - a * x))
        return MCEstimate(val, 0.0, 0.0)

    depth = len(layers)
    n_per = max(8, int(round(samples ** (1.0 / depth))))
    gen = rng.stream(seed, "phi-mc", K, depth)

    # sample increments shape (n_0, ..., n_{depth-1}, K) and fold backwards
    total_shape = (n_per,) * depth
    points = np.broadcast_to(x, total_shape + (K,)).copy()
    for ell, (s, root, _z) in enumerate(layers):
        if s == 0.0:
            continue
        shape_ell = total_shape[: ell + 1] + (1,) * (depth - ell - 1) + (K,)
        eta = gen.standard_normal(shape_ell) @ root.T
        points += s * eta

    vals = np.sum(_log2cosh(points) - a * points, axis=-1)
    for s, root, z in layers[:0:-1]:
        if z > 0.0:
            vals = logsumexp(z * vals, axis=-1) / z - math.log(vals.shape[-1]) / z
        else:
            vals = np.mean(vals, axis=-1)

    # outermost reduction with jackknife over the n_0 samples
    z0 = layers[0][2]
    n0 = vals.shape[0]
    if z0 > 0.0:
        w = z0 * vals
        full = (logsumexp(w) - math.log(n0)) / z0
        wmax = np.max(w)
        expw = np.exp(w - wmax)
        total = np.sum(expw)
        loo = (wmax + np.log((total - expw) / (n0 - 1))) / z0
    else:
        full = float(np.mean(vals))
        total = np.sum(vals)
        loo = (total - vals) / (n0 - 1)
    jack_mean = float(np.mean(loo))
    bias = (n0 - 1) * (jack_mean - full)
    se = math.sqrt((n0 - 1) / n0 * float(np.sum((loo - jack_mean) ** 2)))
    return MCEstimate(float(full), se, float(bias))


def quadrature_log2cosh_mean(mu: float, s: float) -> float:
    """E log 2cosh(mu + s Z) by adaptive quadrature (test oracle helper)."""
    val, _ = quad(
        lambda z: float(_log2cosh(mu + s * z)) * math.exp(-0.5 * z * z) / math.sqrt(2 * math.pi),
        -12.0,
        12.0,
        epsabs=1e-12,
        limit=400,
    )
    return val
