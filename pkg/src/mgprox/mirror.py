"""Bregman geometry and the mirror-descent step.

Only the Euclidean geometry ships with a closed-form mirror step; the
abstraction exists so alternative distance generating functions can be
added later, but the rest of the library assumes the pairing
||.|| = ||.||_* = ||.||_2 throughout.
"""

import numpy as np

__all__ = ["BregmanGeometry", "EuclideanGeometry", "bregman", "mirror_step"]


class BregmanGeometry:
    """Distance generating function omega and its induced divergence."""

    def omega(self, x):
        raise NotImplementedError

    def omega_grad(self, x):
        raise NotImplementedError

    def divergence(self, x, z) -> float:
        """V_x(z) = omega(z) - <grad omega(x), z - x> - omega(x)."""
        return self.omega(z) - float(self.omega_grad(x) @ (z - x)) - self.omega(x)

    def mirror(self, problem, z, xi, alpha):
        raise NotImplementedError


class EuclideanGeometry(BregmanGeometry):
    """omega(x) = 0.5*||x||^2, so V_x(z) = 0.5*||x - z||^2."""

    def omega(self, x) -> float:
        return 0.5 * float(x @ x)

    def omega_grad(self, x):
        return x

    def divergence(self, x, z) -> float:
        d = z - x
        return 0.5 * float(d @ d)

    def mirror(self, problem, z, xi, alpha):
        # argmin_u 0.5*||u - z||^2 + alpha*<xi, u> + alpha*g(u)
        # is exactly the prox of alpha*g at z - alpha*xi.
        return problem.g_prox(z - alpha * xi, alpha)


def bregman(geometry: BregmanGeometry, x: np.ndarray, z: np.ndarray) -> float:
    """Bregman divergence V_x(z); nonnegative, zero iff z == x."""
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    if x.shape != z.shape:
        raise ValueError(f"shape mismatch: {x.shape} vs {z.shape}")
    return geometry.divergence(x, z)


def mirror_step(geometry: BregmanGeometry, problem, z: np.ndarray,
                xi: np.ndarray, alpha: float) -> np.ndarray:
    """argmin_u V_z(u) + <alpha*xi, u - z> + alpha*g(u).

    In Euclidean geometry with an l1 penalty this is the shrinkage
    T_(alpha*lam)(z - alpha*xi); with g == 0 it is the plain translation
    z - alpha*xi.
    """
    if alpha <= 0:
        raise ValueError("alpha must be positive")
    z = np.asarray(z, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if z.shape != xi.shape:
        raise ValueError(f"shape mismatch: {z.shape} vs {xi.shape}")
    return geometry.mirror(problem, z, xi, alpha)
