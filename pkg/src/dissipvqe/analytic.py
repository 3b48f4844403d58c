"""Closed forms for the warm-up problem: minimize I - |0...0><0...0| with
per-qubit x-rotations, optionally followed by depolarizing noise or by
all-site decay toward |0...0>.

Everything here is a product formula, so any qubit count is cheap.  The
gradient variances are taken over angles drawn uniformly from [0, 2pi].
"""

from __future__ import annotations

import numpy as np


def cost_u(theta) -> float:
    """Unitary cost 1 - prod_j cos^2(theta_j / 2)."""
    theta = np.asarray(theta, dtype=float)
    return float(1.0 - np.prod(np.cos(theta / 2) ** 2))


def cost_n(theta, p: float) -> float:
    """Depolarized cost p (1 - 2^-n) + (1 - p) * cost_u."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    return float(p * (1.0 - 2.0**-n) + (1.0 - p) * cost_u(theta))


def cost_ed(theta, dt: float) -> float:
    """Engineered-dissipation cost 1 - prod_j [1 - sin^2(theta_j/2) e^{-dt}]."""
    if dt < 0:
        raise ValueError("dt must be >= 0")
    theta = np.asarray(theta, dtype=float)
    return float(1.0 - np.prod(1.0 - np.sin(theta / 2) ** 2 * np.exp(-dt)))


def grad_cost_u(theta) -> np.ndarray:
    """Exact gradient of :func:`cost_u`."""
    return grad_cost_ed(theta, 0.0)


def grad_cost_ed(theta, dt: float) -> np.ndarray:
    """Exact gradient of :func:`cost_ed`.

    d/dtheta_j = (1/2) sin(theta_j) e^{-dt} * prod_{k != j} factor_k.
    """
    theta = np.asarray(theta, dtype=float)
    u = np.exp(-dt)
    factors = 1.0 - np.sin(theta / 2) ** 2 * u
    grad = np.empty_like(theta)
    for j in range(theta.size):
        others = np.prod(np.delete(factors, j))
        grad[j] = 0.5 * np.sin(theta[j]) * u * others
    return grad


def var_grad_u(n: int) -> float:
    """Variance of one gradient component of the unitary cost: (1/8)(3/8)^(n-1)."""
    if n < 1:
        raise ValueError("need n >= 1")
    return 0.125 * 0.375 ** (n - 1)


def var_grad_ed(n: int, dt: float) -> float:
    """Variance of one gradient component under engineered dissipation.

    Over angles uniform on [0, 2pi] the derivative of the product cost has
    second moment E[f'^2] E[f^2]^(n-1) with f(x) = 1 - sin^2(x/2) e^{-dt}:

        (1/8) e^{-2 dt} (1 - e^{-dt} + (3/8) e^{-2 dt})^(n-1).

    At dt = 0 this reduces to :func:`var_grad_u`.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if dt < 0:
        raise ValueError("dt must be >= 0")
    u = np.exp(-dt)
    return 0.125 * u * u * (1.0 - u + 0.375 * u * u) ** (n - 1)


_GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0


def optimal_dt(n: int, lo: float = 0.0, hi: float = 20.0, tol: float = 1e-4) -> float:
    """Interaction time maximizing :func:`var_grad_ed` by golden-section search."""
    if n < 2:
        raise ValueError("need n >= 2")
    a, b = float(lo), float(hi)
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = var_grad_ed(n, c), var_grad_ed(n, d)
    while b - a > tol:
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = var_grad_ed(n, c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = var_grad_ed(n, d)
    return 0.5 * (a + b)


def landscape_grid(
    kind: str,
    n: int,
    theta_min: float = -np.pi,
    theta_max: float = np.pi,
    points: int = 201,
    fixed_value: float = 0.0,
    p: float = 0.5,
    dt: float | None = None,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Cost over a (theta_1, theta_2) grid with the other angles fixed.

    Returns ``(axis, axis, grid)`` with ``grid[i, j]`` the cost at
    ``theta_1 = axis[i], theta_2 = axis[j]``.  ``kind`` selects the landscape:
    ``"u"`` (unitary), ``"n"`` (depolarized, uses ``p``) or ``"ed"``
    (engineered dissipation, uses ``dt``; defaults to :func:`optimal_dt`).
    """
    if kind not in ("u", "n", "ed"):
        raise ValueError(f"unknown landscape kind {kind!r}")
    if n < 2:
        raise ValueError("need n >= 2 for a two-angle cross section")
    if not (-2 * np.pi <= theta_min < theta_max <= 2 * np.pi):
        raise ValueError("grid bounds must lie within [-2pi, 2pi]")
    if kind == "ed" and dt is None:
        dt = optimal_dt(n)
    axis = np.linspace(theta_min, theta_max, points)
    theta = np.full(n, fixed_value, dtype=float)
    grid = np.empty((points, points))
    for i, t1 in enumerate(axis):
        for j, t2 in enumerate(axis):
            theta[0], theta[1] = t1, t2
            if kind == "u":
                grid[i, j] = cost_u(theta)
            elif kind == "n":
                grid[i, j] = cost_n(theta, p)
            else:
                grid[i, j] = cost_ed(theta, dt)
    return axis, axis, grid
