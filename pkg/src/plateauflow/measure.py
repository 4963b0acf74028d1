"""Rasterize curve and sweep measures onto the grid and build the weight field.

A polyline deposits its length, a sweep lattice its triangle areas, both as
densities whose integral over the box equals the geometric measure. The
mollified density is the weight omega entering both the eikonal solves and
the geodesic energy term.
"""

from __future__ import annotations

import numpy as np

from .grid import GridSpec, ScalarField, convolve_gaussian
from .path import Polyline, SweepSurface
from .potential import PotentialKind, coupling


def _splat(spec: GridSpec, points: np.ndarray, masses: np.ndarray) -> np.ndarray:
    """Deposit point masses multilinearly onto the 2^dim surrounding nodes."""
    n, dim = spec.n, spec.dim
    x = points * n
    base = np.floor(x).astype(np.int64)
    frac = x - base
    out = np.zeros(spec.shape)
    dens = masses / spec.cell_volume
    for corner in range(2**dim):
        idx = []
        w = dens.copy()
        for ax in range(dim):
            bit = (corner >> ax) & 1
            idx.append(np.mod(base[:, ax] + bit, n))
            w = w * (frac[:, ax] if bit else 1.0 - frac[:, ax])
        np.add.at(out, tuple(idx), w)
    return out


def rasterize_polyline(c: Polyline, spec: GridSpec) -> ScalarField:
    """Length measure of the polyline as a grid density.

    Segments are cut into pieces no longer than h/2; each piece deposits
    length/h^dim at its midpoint, so the field integrates to the total
    length exactly (splat weights sum to one).
    """
    pts = c.points
    if len(pts) < 2:
        return ScalarField(spec, np.zeros(spec.shape))
    starts = pts[:-1]
    ends = pts[1:]
    if c.closed:
        starts = pts
        ends = np.vstack([pts[1:], pts[:1]])
    mids = []
    masses = []
    hmax = 0.5 * spec.h
    for a, b in zip(starts, ends):
        ln = float(np.linalg.norm(b - a))
        if ln == 0.0:
            continue
        k = max(1, int(np.ceil(ln / hmax)))
        ts = (np.arange(k) + 0.5) / k
        mids.append(a[None, :] + ts[:, None] * (b - a)[None, :])
        masses.append(np.full(k, ln / k))
    if not mids:
        return ScalarField(spec, np.zeros(spec.shape))
    return ScalarField(spec, _splat(spec, np.vstack(mids), np.concatenate(masses)))


def _triangles_of_sweep(s: SweepSurface) -> np.ndarray:
    """Split every lattice cell (wrapping in theta) into two triangles."""
    lat = s.lattice
    t1, m = lat.shape[0] - 1, lat.shape[1]
    if t1 == 0:
        return np.empty((0, 3, 3))
    a = lat[:-1, :, :]
    b = lat[:-1, np.r_[1:m, 0], :]
    c = lat[1:, :, :]
    d = lat[1:, np.r_[1:m, 0], :]
    tri1 = np.stack([a, b, c], axis=2).reshape(-1, 3, 3)
    tri2 = np.stack([b, d, c], axis=2).reshape(-1, 3, 3)
    return np.vstack([tri1, tri2])


def _tri_areas(tris: np.ndarray) -> np.ndarray:
    cr = np.cross(tris[:, 1] - tris[:, 0], tris[:, 2] - tris[:, 0])
    return 0.5 * np.linalg.norm(cr, axis=1)


def _tri_diams(tris: np.ndarray) -> np.ndarray:
    e0 = np.linalg.norm(tris[:, 1] - tris[:, 0], axis=1)
    e1 = np.linalg.norm(tris[:, 2] - tris[:, 1], axis=1)
    e2 = np.linalg.norm(tris[:, 0] - tris[:, 2], axis=1)
    return np.maximum(e0, np.maximum(e1, e2))


def _subdivide_to(tris: np.ndarray, diam: float) -> np.ndarray:
    """Midpoint 4-split until every triangle has diameter <= diam."""
    out = []
    todo = tris
    while len(todo):
        big = _tri_diams(todo) > diam
        out.append(todo[~big])
        t = todo[big]
        if not len(t):
            break
        m01 = 0.5 * (t[:, 0] + t[:, 1])
        m12 = 0.5 * (t[:, 1] + t[:, 2])
        m20 = 0.5 * (t[:, 2] + t[:, 0])
        todo = np.vstack(
            [
                np.stack([t[:, 0], m01, m20], axis=1),
                np.stack([m01, t[:, 1], m12], axis=1),
                np.stack([m20, m12, t[:, 2]], axis=1),
                np.stack([m01, m12, m20], axis=1),
            ]
        )
    return np.vstack(out) if out else tris


def rasterize_sweep(s: SweepSurface, spec: GridSpec) -> ScalarField:
    """Area measure of the sweep lattice as a grid density.

    Lattice cells are split into triangles, subdivided to sub-cell size,
    and each deposits area/h^dim splatted at its centroid.
    """
    tris = _triangles_of_sweep(s)
    if not len(tris):
        return ScalarField(spec, np.zeros(spec.shape))
    tris = _subdivide_to(tris, spec.h)
    areas = _tri_areas(tris)
    keep = areas > 0
    if not keep.any():
        return ScalarField(spec, np.zeros(spec.shape))
    centroids = tris[keep].mean(axis=1)
    return ScalarField(spec, _splat(spec, centroids, areas[keep]))


def surface_area(s: SweepSurface) -> float:
    """Total area of the sweep's lattice triangles."""
    return float(_tri_areas(_triangles_of_sweep(s)).sum())


def geodesic_term(omega: ScalarField, u: ScalarField, params, model: PotentialKind) -> float:
    """(1/lambda_eps) * integral omega (delta_eps + phi(u)^2) dx.

    phi = u for AT and phi = 1 - 4u for WCH; `omega` is an already
    mollified measure density.
    """
    phi = coupling(u.values, model)
    integrand = omega.values * (params.delta_eps + phi * phi)
    return float(integrand.sum() * u.spec.cell_volume / params.lambda_eps)


def geodesic_weight(m: ScalarField, u: ScalarField, params, model: PotentialKind):
    """Mollified measure density and the geodesic energy it carries.

    Returns (omega, value) with omega the Gaussian-mollified measure and
    value the geodesic term evaluated against the current phase field.
    """
    if m.spec != u.spec:
        raise ValueError("measure and phase field live on different grids")
    omega = convolve_gaussian(m, params.kernel_width)
    return omega, geodesic_term(omega, u, params, model)


def integrate_over_sweep(s: SweepSurface, f) -> float:
    """Surface integral of f over the sweep, by triangle-centroid quadrature.

    `f` maps an (m, 3) array of points to m values; triangles are
    subdivided to the scale of their own mean size for a stable quadrature.
    """
    tris = _triangles_of_sweep(s)
    if not len(tris):
        return 0.0
    areas = _tri_areas(tris)
    centroids = tris.mean(axis=1)
    return float((areas * np.asarray(f(centroids))).sum())
