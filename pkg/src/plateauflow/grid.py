"""Periodic uniform grids on the unit box with Fourier-diagonal operators.

Fields live on [0,1]^d (d = 2 or 3) sampled at n points per axis, n a power
of two. All constant-coefficient operators (Laplacian, biharmonic, Gaussian
mollifier) are applied as real symbols on the integer frequency lattice.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class GridSpec:
    """Uniform periodic grid: n points per axis on the unit box, h = 1/n."""

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ValueError(f"dim must be 2 or 3, got {self.dim}")
        if self.n < 8 or not _is_power_of_two(self.n):
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def axis(self) -> np.ndarray:
        """Node coordinates along one axis: 0, h, 2h, ..., 1-h."""
        return np.arange(self.n) / self.n

    def meshgrid(self) -> list:
        """Coordinate arrays X_0..X_{dim-1}, each of shape `self.shape`."""
        ax = self.axis()
        return list(np.meshgrid(*([ax] * self.dim), indexing="ij"))

    def frequencies(self) -> list:
        """Integer frequency arrays k_0..k_{dim-1} in FFT layout."""
        k = np.fft.fftfreq(self.n, d=1.0 / self.n)
        return list(np.meshgrid(*([k] * self.dim), indexing="ij"))


@dataclass(frozen=True)
class ScalarField:
    """Real periodic scalar samples; axes indexed [ix, iy(, iz)].

    Values are immutable after construction and must be finite.
    """

    spec: GridSpec
    values: np.ndarray

    def __post_init__(self):
        v = np.ascontiguousarray(np.asarray(self.values, dtype=np.float64))
        if v.shape != self.spec.shape:
            raise ValueError(f"values shape {v.shape} != grid shape {self.spec.shape}")
        if not np.isfinite(v).all():
            raise ValueError("field contains non-finite values")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.spec, values)

    def integral(self) -> float:
        """Midpoint quadrature of the field over the unit box."""
        return float(self.values.sum() * self.spec.cell_volume)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())


def constant_field(spec: GridSpec, value: float) -> ScalarField:
    return ScalarField(spec, np.full(spec.shape, float(value)))


@dataclass(frozen=True)
class FourierSymbol:
    """Real, even symbol over the integer frequency lattice.

    Represents a real self-adjoint constant-coefficient operator; evenness
    under k -> -k is required so the operator maps real fields to real
    fields.
    """

    spec: GridSpec
    symbol: np.ndarray

    def __post_init__(self):
        s = np.ascontiguousarray(np.asarray(self.symbol, dtype=np.float64))
        if s.shape != self.spec.shape:
            raise ValueError("symbol shape does not match grid")
        for ax in range(self.spec.dim):
            if not np.allclose(s, np.flip(np.roll(s, -1, axis=ax), axis=ax), atol=1e-12):
                raise ValueError("symbol is not even under k -> -k")
        s.setflags(write=False)
        object.__setattr__(self, "symbol", s)

    def half(self) -> np.ndarray:
        """Slice matching the rfftn half-spectrum layout (last axis halved)."""
        return self.symbol[..., : self.spec.n // 2 + 1]


def laplacian_symbol(spec: GridSpec) -> FourierSymbol:
    """Symbol of the Laplacian on the unit box: -(2*pi)^2 |k|^2."""
    ks = spec.frequencies()
    k2 = sum(k * k for k in ks)
    return FourierSymbol(spec, -((2.0 * np.pi) ** 2) * k2)


def identity_symbol(spec: GridSpec) -> FourierSymbol:
    return FourierSymbol(spec, np.ones(spec.shape))


def apply_symbol(f: ScalarField, s: FourierSymbol) -> ScalarField:
    """Apply a Fourier-diagonal operator: FFT, multiply, inverse FFT."""
    if f.spec != s.spec:
        raise ValueError("field and symbol live on different grids")
    fh = sfft.rfftn(f.values)
    out = sfft.irfftn(fh * s.half(), f.spec.shape)
    return ScalarField(f.spec, out)


def convolve_gaussian(f: ScalarField, width: float) -> ScalarField:
    """Mollify by a periodic Gaussian of standard deviation `width`.

    Spectral multiplier exp(-0.5 width^2 (2 pi |k|)^2); the k = 0 factor is
    exactly 1, so the integral of the field is preserved to rounding.
    """
    if width < 0:
        raise ValueError("kernel width must be >= 0")
    if width == 0.0:
        return f
    lap = laplacian_symbol(f.spec).symbol  # already -(2 pi |k|)^2
    mult = np.exp(0.5 * width * width * lap)
    return apply_symbol(f, FourierSymbol(f.spec, mult))


def spectral_gradient(f: ScalarField) -> list:
    """Gradient components via spectral differentiation.

    Returns dim real arrays. The Nyquist mode is zeroed per axis (its first
    derivative has no real representation on the grid).
    """
    spec = f.spec
    fh = sfft.rfftn(f.values)
    k1 = np.fft.fftfreq(spec.n, d=1.0 / spec.n)
    k1[spec.n // 2] = 0.0
    khalf = np.arange(spec.n // 2 + 1, dtype=np.float64)
    khalf[-1] = 0.0
    grads = []
    for ax in range(spec.dim):
        shape = [1] * spec.dim
        shape[ax] = -1
        k = (khalf if ax == spec.dim - 1 else k1).reshape(shape)
        grads.append(sfft.irfftn(fh * (2j * np.pi * k), spec.shape))
    return grads


def dirichlet_energy(f: ScalarField) -> float:
    """integral |grad f|^2 dx with spectral derivatives."""
    total = 0.0
    for g in spectral_gradient(f):
        total += float(np.sum(g * g))
    return total * f.spec.cell_volume


def sample(f: ScalarField, points: np.ndarray, mode: str = "wrap") -> np.ndarray:
    """Multilinear interpolation of the field at arbitrary box points.

    mode='wrap' uses periodic indexing; mode='clamp' clamps coordinates to
    the box (appropriate for non-periodic data stored on the same lattice).
    """
    spec = f.spec
    pts = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if pts.shape[1] != spec.dim:
        raise ValueError(f"points must be ({spec.dim},)-vectors")
    x = pts * spec.n
    if mode == "clamp":
        x = np.clip(x, 0.0, spec.n - 1.0)
    base = np.floor(x).astype(np.int64)
    frac = x - base
    out = np.zeros(len(pts))
    for corner in range(2**spec.dim):
        idx = []
        w = np.ones(len(pts))
        for ax in range(spec.dim):
            bit = (corner >> ax) & 1
            i = base[:, ax] + bit
            if mode == "wrap":
                i = np.mod(i, spec.n)
            else:
                i = np.clip(i, 0, spec.n - 1)
            idx.append(i)
            w = w * (frac[:, ax] if bit else 1.0 - frac[:, ax])
        out += w * f.values[tuple(idx)]
    return out
