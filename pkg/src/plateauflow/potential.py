"""Double-well potentials and 1D optimal profiles for both phase-field models.

Two models are supported: the quadratic single-well V(s) = (1-s)^2/4 used by
the Ambrosio-Tortorelli (AT) energy, and the obstacle potential W with a
smooth well at 0 and an obstacle at 1/4 used by the Willmore-Cahn-Hilliard
(WCH) energy.
"""

from __future__ import annotations

import enum

import numpy as np

from .grid import ScalarField

#: Largest admissible argument of W; the flow clamps fields to this value.
OBSTACLE = 0.25

_OBSTACLE_SLACK = 1e-12


class PotentialKind(enum.Enum):
    AT = "at"
    WCH = "wch"


def V(s):
    """Single well V(s) = (1-s)^2 / 4, zero exactly at s = 1."""
    s = np.asarray(s, dtype=np.float64)
    return 0.25 * (1.0 - s) ** 2


def V_prime(s):
    s = np.asarray(s, dtype=np.float64)
    return -0.5 * (1.0 - s)


def W(s):
    """Obstacle potential: s^2 (1/2 - 2 s) for s <= 1/4, +inf beyond."""
    s = np.asarray(s, dtype=np.float64)
    out = s * s * (0.5 - 2.0 * s)
    return np.where(s <= OBSTACLE, out, np.inf)


def _check_feasible(s, name):
    if np.any(np.asarray(s) > OBSTACLE + _OBSTACLE_SLACK):
        raise ValueError(f"{name} undefined beyond the obstacle s = 1/4; clamp first")


def W_prime(s):
    """W'(s) = s - 6 s^2; only defined on the feasible set s <= 1/4."""
    s = np.asarray(s, dtype=np.float64)
    _check_feasible(s, "W'")
    return s - 6.0 * s * s


def W_second(s):
    """W''(s) = 1 - 12 s; only defined on the feasible set s <= 1/4."""
    s = np.asarray(s, dtype=np.float64)
    _check_feasible(s, "W''")
    return 1.0 - 12.0 * s


def profile_q(s):
    """Standard front profile q(s) = (1 - tanh(s/2)) / 2."""
    s = np.asarray(s, dtype=np.float64)
    return 0.5 * (1.0 - np.tanh(0.5 * s))


def profile_y(s):
    """Bump profile y = -q' = (1 - tanh^2(s/2)) / 4; peaks at 1/4."""
    s = np.asarray(s, dtype=np.float64)
    t = np.tanh(0.5 * s)
    return 0.25 * (1.0 - t * t)


def expected_profile(dist: ScalarField, eps: float, kind: PotentialKind) -> ScalarField:
    """Model profile as a function of the distance to the interface.

    WCH: y(dist/eps), the stable bump with value 1/4 on the interface.
    AT: 1 - exp(-dist/(2 eps)), vanishing on the interface.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    d = dist.values
    if d.min() < 0:
        raise ValueError("distance field must be nonnegative")
    if kind is PotentialKind.WCH:
        vals = profile_y(d / eps)
    elif kind is PotentialKind.AT:
        vals = 1.0 - np.exp(-d / (2.0 * eps))
    else:
        raise ValueError(f"unknown potential kind {kind!r}")
    return ScalarField(dist.spec, vals)


def coupling(u, kind: PotentialKind):
    """Weight entering the geodesic integrand: u for AT, 1 - 4u for WCH.

    The film carrier is u = 0 (AT) or u = 1/4 (WCH); in both cases the
    coupling vanishes on a fully developed interface.
    """
    u = np.asarray(u, dtype=np.float64)
    if kind is PotentialKind.AT:
        return u
    return 1.0 - 4.0 * u
