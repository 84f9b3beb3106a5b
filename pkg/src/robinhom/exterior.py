"""Limiting exterior problems on R^n minus the unit ball.

For a spherical hole the rescaled cell limits are available in closed
form: with sigma_n the unit-sphere area,

    lambda*(kappa) = sigma_n (n-2) (kappa - 1) / kappa,

and the Dirichlet, Steklov and capacity limits all equal (n-2) sigma_n.
A truncated 1D radial minimisation provides an independent numerical
oracle for lambda*: minimise the radial Dirichlet energy over piecewise
linear functions on a geometric grid in [1, R], subject to
z(1)^2 - kappa z(R)^2 = sign(kappa - 1), with z(R) standing in for the
value at infinity (truncation error O(1/R) in dimension 3).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cellmesh import unit_sphere_area
from .errors import ConstraintInfeasible


@dataclass(frozen=True)
class StarConstants:
    """Rescaled cell limits for the spherical hole."""

    n: int
    sigma_n: float
    cap_star: float
    lambda_dir_star: float
    lambda_st_star: float


def lambda_star_ball(kappa: float, n: int = 3) -> float:
    """Closed-form rescaled eigenvalue limit for the unit-ball hole.

    Continuous and strictly increasing on (0, inf); zero at kappa = 1.
    """
    if kappa < 0.0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if kappa == 1.0:
        return 0.0
    return unit_sphere_area(n) * (n - 2) * (kappa - 1.0) / kappa


def star_constants(n: int = 3) -> StarConstants:
    if n < 3:
        raise ValueError(f"dimension must be >= 3, got {n}")
    sigma = unit_sphere_area(n)
    c = (n - 2) * sigma
    return StarConstants(n=n, sigma_n=sigma, cap_star=c,
                         lambda_dir_star=c, lambda_st_star=c)


def _radial_grid(R: float, m: int) -> np.ndarray:
    """Geometric grid on [1, R] whose midpoint node sits at rho = 10,
    so half the points resolve the boundary layer near the ball."""
    if R <= 1.0:
        raise ValueError(f"truncation radius must exceed 1, got {R}")
    if m < 8:
        raise ValueError(f"need at least 8 radial intervals, got {m}")
    t = (R - 10.0) / 9.0
    q = t ** (2.0 / m) if t > 1.0 else 1.0
    if q > 1.0:
        h1 = (R - 1.0) * (q - 1.0) / (q**m - 1.0)
        rho = 1.0 + h1 * (q ** np.arange(m + 1) - 1.0) / (q - 1.0)
    else:
        rho = np.linspace(1.0, R, m + 1)
    rho[-1] = R
    return rho


def exterior_numeric(kappa: float, n: int = 3, R: float = 1000.0, m: int = 512) -> float:
    """Truncated radial oracle for lambda*(kappa) on the ball.

    Builds the two discrete harmonic basis solutions with endpoint data
    (1, 0) and (0, 1), forms their 2x2 energy matrix E, and minimises
    the energy over the constraint x' C x = sign(kappa - 1) with
    C = diag(1, -kappa); the stationarity condition E x = nu C x is a
    quadratic in nu, and the admissible root is the one whose sign
    matches kappa - 1.
    """
    if kappa <= 0.0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if kappa == 1.0:
        return 0.0
    sigma = unit_sphere_area(n)
    rho = _radial_grid(R, m)
    h = np.diff(rho)
    wseg = (rho[1:] ** n - rho[:-1] ** n) / n  # int rho^(n-1) over segment
    c = sigma * wseg / h**2

    # discrete harmonics have constant flux: z_{i+1} - z_i = F / c_i
    inc = np.concatenate(([0.0], np.cumsum(1.0 / c)))
    span = inc[-1]
    h1 = 1.0 - inc / span          # endpoint data (1, 0)
    h2 = inc / span                # endpoint data (0, 1)

    def energy(za, zb):
        da = np.diff(za)
        db = np.diff(zb)
        return float((c * da * db).sum())

    E = np.array(
        [[energy(h1, h1), energy(h1, h2)],
         [energy(h2, h1), energy(h2, h2)]]
    )
    s = 1.0 if kappa > 1.0 else -1.0
    # det(E - nu*diag(1, -kappa)) = 0
    a = kappa
    b = E[1, 1] - kappa * E[0, 0]
    d = E[0, 1] ** 2 - E[0, 0] * E[1, 1]
    disc = b * b - 4.0 * a * d
    if disc < 0.0:
        raise ConstraintInfeasible("stationarity equation has no real root")
    roots = np.array([(-b + np.sqrt(disc)) / (2 * a), (-b - np.sqrt(disc)) / (2 * a)])
    admissible = roots[np.sign(roots) == s]
    if admissible.size == 0:
        raise ConstraintInfeasible(
            f"no stationary value with the sign of kappa - 1 (kappa={kappa})"
        )
    # the constrained minimum of the energy is nu * s = |nu|; take the
    # smallest admissible |nu|, which is the nearest-to-zero root
    nu = admissible[np.argmin(np.abs(admissible))]
    return float(nu)
