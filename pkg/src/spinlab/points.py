"""Point geometry in the normalized N-norm, |x|_N^2 = (1/N) sum x_i^2.

S_N is the sphere |x|_N = 1, Sigma_N the cube corners {-1,1}^N, B_N / C_N
their convex hulls.
"""

import numpy as np


def norm_n_sq(x) -> float:
    x = np.asarray(x, dtype=float)
    return float(x @ x) / x.size


def norm_n(x) -> float:
    return float(np.sqrt(norm_n_sq(x)))


def overlap(x, y) -> float:
    """R(x, y) = <x, y> / N."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(x @ y) / x.size


def on_sphere(x, tol: float = 1e-9) -> bool:
    return abs(norm_n_sq(x) - 1.0) <= tol


def in_ball(x, r: float = 1.0, tol: float = 1e-9) -> bool:
    return norm_n_sq(x) <= r * r + tol


def on_cube_corners(x, tol: float = 1e-9) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(np.abs(np.abs(x) - 1.0) <= tol))


def in_cube(x, r: float = 1.0, tol: float = 1e-9) -> bool:
    x = np.asarray(x, dtype=float)
    return bool(np.all(np.abs(x) <= r + tol))


def sphere_point(v) -> np.ndarray:
    """Rescale v to S_N (|.|_N = 1)."""
    v = np.asarray(v, dtype=float)
    nrm = np.linalg.norm(v)
    if nrm == 0.0:
        raise ValueError("cannot project the zero vector to the sphere")
    return v * (np.sqrt(v.size) / nrm)


def project_ball(x, r: float = 1.0) -> np.ndarray:
    """Euclidean projection onto rB_N."""
    x = np.asarray(x, dtype=float)
    nn = norm_n(x)
    if nn <= r:
        return x
    return x * (r / nn)


def project_cube(x, r: float = 1.0) -> np.ndarray:
    """Euclidean projection onto rC_N = [-r, r]^N."""
    return np.clip(np.asarray(x, dtype=float), -r, r)
