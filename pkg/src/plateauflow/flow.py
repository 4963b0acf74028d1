"""Semi-implicit Fourier-spectral steppers for the two phase-field models.

Both schemes treat the stiff linear part implicitly through a diagonal
Fourier solve and the remaining terms explicitly, stabilized by constants
alpha (and beta for the fourth-order model) large enough to keep the energy
non-increasing for a frozen weight field. The stabilizers appear on both
sides of the update, so they damp only the per-step change, not the flow.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, replace

import numpy as np
import scipy.fft as sfft

from . import potential as pot
from .grid import GridSpec, ScalarField, dirichlet_energy, laplacian_symbol
from .potential import PotentialKind

_OBSTACLE_SLACK = 1e-9


@dataclass(frozen=True)
class ModelParams:
    """Scalar parameters of one phase-field run, all tied to one epsilon.

    alpha/beta of None mean "derive stabilizers from the current state";
    explicit values override (config knob for reproduction experiments).
    """

    eps: float
    dt: float
    sigma_eps: float
    lambda_eps: float
    delta_eps: float
    kernel_width: float
    level_value: float
    alpha: float | None = None
    beta: float | None = None

    def __post_init__(self):
        if min(self.eps, self.dt, self.delta_eps, self.lambda_eps) <= 0:
            raise ValueError("eps, dt, delta_eps and lambda_eps must be positive")
        if self.sigma_eps < 0 or self.kernel_width < 0:
            raise ValueError("sigma_eps and kernel_width must be nonnegative")
        if (self.alpha is not None and self.alpha < 0) or (
            self.beta is not None and self.beta < 0
        ):
            raise ValueError("explicit stabilizers must be nonnegative")
        if self.delta_eps / self.lambda_eps > 0.1:
            warnings.warn(
                f"delta_eps/lambda_eps = {self.delta_eps / self.lambda_eps:.3g} > 0.1; "
                "geodesic floor is no longer a small perturbation",
                stacklevel=2,
            )

    @staticmethod
    def reproduction(n: int, model: PotentialKind, **overrides) -> "ModelParams":
        """Published parameter set: eps = 2/n (WCH) or 4/n (AT), dt = 10 eps^2,
        sigma = 1/eps^2 (WCH only), kernel width two cells."""
        h = 1.0 / n
        if model is PotentialKind.WCH:
            eps = 2.0 * h
            base = ModelParams(
                eps=eps,
                dt=10.0 * eps * eps,
                sigma_eps=1.0 / (eps * eps),
                lambda_eps=1e-6,
                delta_eps=1e-8,
                kernel_width=2.0 * h,
                level_value=3.0 / 16.0,
            )
        else:
            eps = 4.0 * h
            base = ModelParams(
                eps=eps,
                dt=10.0 * eps * eps,
                sigma_eps=0.0,
                lambda_eps=0.1,
                delta_eps=1e-4,
                kernel_width=2.0 * h,
                level_value=0.5,
            )
        return replace(base, **overrides) if overrides else base


@dataclass(frozen=True)
class EnergyReport:
    """Per-iteration energy decomposition; total must equal the sum."""

    dirichlet: float
    potential: float
    willmore: float
    geodesic: float
    total: float
    iteration: int
    alpha: float = 0.0
    beta: float = 0.0

    def __post_init__(self):
        s = self.dirichlet + self.potential + self.willmore + self.geodesic
        if abs(self.total - s) > 1e-10 * max(1.0, abs(s)):
            raise ValueError("total does not match the component sum")


def _report(dirichlet, potential, willmore, geodesic, iteration, alpha=0.0, beta=0.0):
    return EnergyReport(
        dirichlet=dirichlet,
        potential=potential,
        willmore=willmore,
        geodesic=geodesic,
        total=dirichlet + potential + willmore + geodesic,
        iteration=iteration,
        alpha=alpha,
        beta=beta,
    )


def at_energy(u: ScalarField, params: ModelParams, geodesic: float = 0.0, iteration: int = 0) -> EnergyReport:
    """AT energy: eps |grad u|^2 + (1-u)^2/(4 eps), grid-sum quadrature."""
    eps = params.eps
    dirichlet = eps * dirichlet_energy(u)
    potential = float(pot.V(u.values).sum()) * u.spec.cell_volume / eps
    return _report(dirichlet, potential, 0.0, geodesic, iteration)


def wch_energy(u: ScalarField, params: ModelParams, geodesic: float = 0.0, iteration: int = 0) -> EnergyReport:
    """Willmore-Cahn-Hilliard energy with component breakdown."""
    if u.max() > pot.OBSTACLE + _OBSTACLE_SLACK:
        raise ValueError("phase field violates the obstacle u <= 1/4")
    eps, sigma = params.eps, params.sigma_eps
    vol = u.spec.cell_volume
    dirichlet = 0.5 * eps * dirichlet_energy(u)
    potential = float(pot.W(u.values).sum()) * vol / eps
    lap = _lap_field(u)
    mu = eps * lap - pot.W_prime(u.values) / eps
    willmore = 0.5 * sigma / eps * float((mu * mu).sum()) * vol
    return _report(dirichlet, potential, willmore, geodesic, iteration)


# Fourier plumbing: cached half-spectrum multipliers per (spec, parameters).
# Bounded: solver symbols are rebuilt whenever the stabilizers move, so old
# entries are garbage after every geodesic recomputation.

_symbol_cache: dict = {}
_SYMBOL_CACHE_LIMIT = 16


def _cache_put(key, value):
    if len(_symbol_cache) >= _SYMBOL_CACHE_LIMIT:
        _symbol_cache.pop(next(iter(_symbol_cache)))
    _symbol_cache[key] = value
    return value


def _khat2_half(spec: GridSpec) -> np.ndarray:
    """(2 pi |k|)^2 on the rfftn half lattice."""
    key = ("khat2", spec)
    if key not in _symbol_cache:
        lap = laplacian_symbol(spec)
        return _cache_put(key, np.ascontiguousarray(-lap.half()))
    return _symbol_cache[key]


def _lap_field(u: ScalarField) -> np.ndarray:
    kh2 = _khat2_half(u.spec)
    return sfft.irfftn(sfft.rfftn(u.values) * (-kh2), u.spec.shape)


def pick_stabilizers(omega: ScalarField, params: ModelParams, model: PotentialKind, u_min: float = 0.0):
    """Convex-concave stabilization bounds for a frozen weight field.

    AT: alpha = sup (2/lambda) omega, beta = 0. WCH: the curvature bound of
    the explicit chemistry on the feasible set [u_min, 1/4] (where
    |W''| <= max(2, |1 - 12 u_min|)), sigma-amplified, plus the coupling
    bound; beta covers the explicit cross term.
    """
    sup_omega = float(omega.values.max()) if omega is not None else 0.0
    if model is PotentialKind.AT:
        return 2.0 * sup_omega / params.lambda_eps, 0.0
    eps, sigma = params.eps, params.sigma_eps
    wpp = max(2.0, abs(1.0 - 12.0 * u_min))
    a = wpp / (eps * eps)
    alpha = a * (1.0 + sigma * a) + 8.0 * sup_omega / (eps * params.lambda_eps)
    beta = 2.0 * sigma * a
    return alpha, beta


def _at_solver_half(spec: GridSpec, params: ModelParams, alpha: float) -> np.ndarray:
    key = ("at", spec, params.eps, params.dt, round(alpha, 12))
    if key not in _symbol_cache:
        kh2 = _khat2_half(spec)
        denom = 1.0 + params.dt * (params.eps * kh2 + 0.5 / params.eps + alpha)
        return _cache_put(key, 1.0 / denom)
    return _symbol_cache[key]


def _wch_solver_half(spec: GridSpec, params: ModelParams, alpha: float, beta: float) -> np.ndarray:
    key = ("wch", spec, params.eps, params.dt, params.sigma_eps, round(alpha, 6), round(beta, 6))
    if key not in _symbol_cache:
        kh2 = _khat2_half(spec)
        denom = 1.0 + params.eps * params.dt * (
            kh2 + params.sigma_eps * kh2 * kh2 + alpha + beta * kh2
        )
        return _cache_put(key, 1.0 / denom)
    return _symbol_cache[key]


def at_step(u: ScalarField, omega: ScalarField, params: ModelParams) -> ScalarField:
    """One semi-implicit AT step for frozen omega.

    alpha defaults to the smallest energy-decreasing choice,
    sup (2/lambda) omega, re-evaluated on the current weight.
    """
    if omega.min() < 0:
        raise ValueError("weight field must be nonnegative")
    eps, dt, lam = params.eps, params.dt, params.lambda_eps
    alpha = params.alpha if params.alpha is not None else 2.0 * omega.max() / lam
    rhs = u.values + dt * (
        0.5 / eps - ((2.0 / lam) * omega.values - alpha) * u.values
    )
    mult = _at_solver_half(u.spec, params, alpha)
    out = sfft.irfftn(sfft.rfftn(rhs) * mult, u.spec.shape)
    return ScalarField(u.spec, out)


def wch_step(
    u: ScalarField,
    omega: ScalarField,
    params: ModelParams,
    stabilizers: tuple | None = None,
) -> ScalarField:
    """One semi-implicit WCH step for frozen omega, obstacle-projected.

    The explicit term carries the full nonlinear chemistry plus the
    stabilizer pair; the inverse operator carries diffusion, biharmonic
    and the matching stabilizers. The output is clamped to u <= 1/4.
    """
    if u.max() > pot.OBSTACLE + _OBSTACLE_SLACK:
        raise ValueError("phase field violates the obstacle u <= 1/4")
    eps, dt, sigma, lam = params.eps, params.dt, params.sigma_eps, params.lambda_eps
    if stabilizers is not None:
        alpha, beta = stabilizers
    elif params.alpha is not None and params.beta is not None:
        alpha, beta = params.alpha, params.beta
    else:
        alpha, beta = pick_stabilizers(
            omega, params, PotentialKind.WCH, u_min=min(0.0, u.min())
        )
        if params.alpha is not None:
            alpha = params.alpha
        if params.beta is not None:
            beta = params.beta

    vals = u.values
    kh2 = _khat2_half(u.spec)
    u_hat = sfft.rfftn(vals)
    lap_u = sfft.irfftn(u_hat * (-kh2), u.spec.shape)
    wp = pot.W_prime(vals) / (eps * eps)
    lap_wp = sfft.irfftn(sfft.rfftn(wp) * (-kh2), u.spec.shape)
    wpp = pot.W_second(vals) / (eps * eps)
    mu = lap_u - wp

    g = vals + dt * eps * (
        -wp
        + sigma * (lap_wp + wpp * mu)
        + alpha * vals
        - beta * lap_u
        - (2.0 / (eps * lam)) * omega.values * (4.0 * vals - 1.0)
    )
    mult = _wch_solver_half(u.spec, params, alpha, beta)
    out = sfft.irfftn(sfft.rfftn(g) * mult, u.spec.shape)
    np.minimum(out, pot.OBSTACLE, out=out)
    return ScalarField(u.spec, out)
