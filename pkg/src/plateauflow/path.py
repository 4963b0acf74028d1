"""Discrete curves, geodesic backtracking, and homotopy sweeps.

Backtracking integrates the normalized descent x' = -grad d / |grad d| from
a start point until it reaches the source set of the distance map. A sweep
advances every sample of a closed curve by the same rule, freezing samples
on arrival, and records the visited rows as a discrete homotopy surface.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BacktrackError
from .eikonal import DistanceMap, WeightField, fast_march, gradient_at
from .grid import GridSpec, ScalarField, sample
from .potential import PotentialKind, coupling

_STAGNATION = 1e-12
_MAX_ROWS = 512
_RESPACING_LIMIT = 2.0


@dataclass(frozen=True)
class Polyline:
    """Ordered point chain; duplicates of consecutive points are dropped."""

    points: np.ndarray
    closed: bool = False

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.points, dtype=np.float64))
        if len(pts) > 1:
            keep = np.ones(len(pts), dtype=bool)
            keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
            pts = pts[keep]
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def length(self) -> float:
        pts = self.points
        if len(pts) < 2:
            return 0.0
        total = float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())
        if self.closed:
            total += float(np.linalg.norm(pts[0] - pts[-1]))
        return total


def _uniform_resample_closed(samples: np.ndarray, m: int) -> np.ndarray:
    """Arc-length uniform samples of the closed polygon, anchored at sample 0."""
    seg = np.vstack([samples, samples[:1]])
    lens = np.linalg.norm(np.diff(seg, axis=0), axis=1)
    total = lens.sum()
    if total <= 0:
        raise ValueError("zero-length curve cannot be resampled")
    cum = np.concatenate([[0.0], np.cumsum(lens)])
    targets = np.arange(m) * (total / m)
    idx = np.searchsorted(cum, targets, side="right") - 1
    idx = np.clip(idx, 0, len(lens) - 1)
    t = (targets - cum[idx]) / np.where(lens[idx] > 0, lens[idx], 1.0)
    return seg[idx] + t[:, None] * (seg[idx + 1] - seg[idx])


def _spacing_ratio(samples: np.ndarray) -> float:
    seg = np.vstack([samples, samples[:1]])
    lens = np.linalg.norm(np.diff(seg, axis=0), axis=1)
    lo = lens.min()
    return np.inf if lo <= 0 else float(lens.max() / lo)


@dataclass(frozen=True)
class ClosedCurve:
    """M samples of a closed curve at angles 2 pi m / M.

    Construction enforces an arc-length spacing ratio of at most 4 by
    resampling when the input is more distorted than that.
    """

    samples: np.ndarray

    def __post_init__(self):
        pts = np.atleast_2d(np.asarray(self.samples, dtype=np.float64))
        if len(pts) < 3:
            raise ValueError("a closed curve needs at least 3 samples")
        if _spacing_ratio(pts) > 4.0:
            pts = _uniform_resample_closed(pts, len(pts))
        pts.setflags(write=False)
        object.__setattr__(self, "samples", pts)

    @property
    def m(self) -> int:
        return len(self.samples)

    @property
    def dim(self) -> int:
        return self.samples.shape[1]

    def length(self) -> float:
        seg = np.vstack([self.samples, self.samples[:1]])
        return float(np.linalg.norm(np.diff(seg, axis=0), axis=1).sum())


def resample_uniform(c: ClosedCurve) -> ClosedCurve:
    """Same polygon, samples uniform in arc length, M preserved."""
    if c.m < 3:
        raise ValueError("need at least 3 samples")
    return ClosedCurve(_uniform_resample_closed(c.samples, c.m))


@dataclass(frozen=True)
class SweepSurface:
    """Homotopy image sampled on a (T+1) x M lattice of 3D points."""

    lattice: np.ndarray  # (T+1, M, 3)

    def __post_init__(self):
        lat = np.asarray(self.lattice, dtype=np.float64)
        if lat.ndim != 3 or lat.shape[2] != 3:
            raise ValueError("lattice must have shape (T+1, M, 3)")
        if lat.min() < -1e-12 or lat.max() > 1.0 + 1e-12:
            raise ValueError("lattice leaves the unit box")
        lat.setflags(write=False)
        object.__setattr__(self, "lattice", lat)

    @property
    def rows(self) -> int:
        return self.lattice.shape[0]

    @property
    def m(self) -> int:
        return self.lattice.shape[1]


def _snap_to_source(d: DistanceMap, pts: np.ndarray) -> np.ndarray:
    """Nearest source-geometry point for each query point."""
    diff = pts[:, None, :] - d.source_points[None, :, :]
    nearest = np.argmin((diff**2).sum(axis=2), axis=1)
    return d.source_points[nearest]


def backtrack_point(d: DistanceMap, start, step: float | None = None) -> Polyline:
    """Descend -grad d from `start` to the source set of the map."""
    spec = d.spec
    if step is None:
        step = 0.5 * spec.h
    if step <= 0:
        raise ValueError("step must be positive")
    x = np.asarray(start, dtype=np.float64).copy()
    if x.min() < 0 or x.max() > 1:
        raise ValueError("start point outside the box")
    cap = 10 * spec.n * spec.dim
    path = [x.copy()]
    for _ in range(cap):
        if d.distance_to_source(x[None, :])[0] < spec.h:
            path.append(_snap_to_source(d, x[None, :])[0])
            return Polyline(np.array(path))
        g = gradient_at(d, x)
        norm = np.linalg.norm(g)
        if norm < _STAGNATION:
            raise BacktrackError(
                "gradient vanished before reaching the source",
                partial=Polyline(np.array(path)),
            )
        x = np.clip(x - (step / norm) * g, 0.0, 1.0)
        path.append(x.copy())
    raise BacktrackError(
        f"descent exceeded {cap} steps", partial=Polyline(np.array(path))
    )


def sweep_curve(d: DistanceMap, start: ClosedCurve, step: float | None = None) -> SweepSurface:
    """Advance all samples of `start` down the distance field in lockstep.

    Samples freeze when they come within one cell of the source geometry and
    are snapped onto it; the sweep ends when every sample is frozen. Rows
    are re-spaced to uniform arc length while the curve is still fully
    mobile, then thinned to at most 512 rows uniform in arrival fraction.
    """
    spec = d.spec
    if start.dim != spec.dim:
        raise ValueError("curve dimension does not match the grid")
    if step is None:
        step = 0.5 * spec.h
    pts = start.samples.copy()
    frozen = np.zeros(len(pts), dtype=bool)
    rows = [pts.copy()]
    cap = 10 * spec.n * spec.dim

    near = d.distance_to_source(pts) < spec.h
    if near.all():
        # degenerate sweep: the start lies on the source already
        return SweepSurface(pts[None, :, :])

    for _ in range(cap):
        near = d.distance_to_source(pts) < spec.h
        newly = near & ~frozen
        if newly.any():
            pts[newly] = _snap_to_source(d, pts[newly])
            frozen |= newly
        if frozen.all():
            rows.append(pts.copy())
            break
        active = ~frozen
        g = gradient_at(d, pts[active])
        norms = np.linalg.norm(g, axis=1)
        if (norms < _STAGNATION).any():
            raise BacktrackError(
                f"{int((norms < _STAGNATION).sum())} sweep samples stagnated",
                partial=Polyline(pts),
            )
        pts[active] = np.clip(pts[active] - (step / norms)[:, None] * g, 0.0, 1.0)
        if not frozen.any() and _spacing_ratio(pts) > _RESPACING_LIMIT:
            pts = _uniform_resample_closed(pts, len(pts))
        rows.append(pts.copy())
    else:
        raise BacktrackError(f"sweep exceeded {cap} steps", partial=Polyline(pts))

    rows = np.array(rows)
    if len(rows) - 1 > _MAX_ROWS:
        pick = np.round(np.linspace(0, len(rows) - 1, _MAX_ROWS + 1)).astype(int)
        rows = rows[pick]
    return SweepSurface(rows)


def circular_weight(u: ScalarField, m_theta: int, kind: PotentialKind = PotentialKind.WCH) -> ScalarField:
    """Reduced (r, z) weight for coaxial-circle geodesics.

    omega(r, z) = integral over theta of coupling(u)^2 r, quadrature with
    m_theta equispaced nodes (exact for constants). The circle axis is the
    vertical line through the box centre; u is sampled trilinearly with
    periodic wrap.
    """
    if u.spec.dim != 3:
        raise ValueError("reduced weight needs a 3D phase field")
    spec2 = GridSpec(2, u.spec.n)
    ax = spec2.axis()
    r, z = np.meshgrid(ax, ax, indexing="ij")
    acc = np.zeros(spec2.shape)
    thetas = 2.0 * np.pi * np.arange(m_theta) / m_theta
    for th in thetas:
        pts = np.stack(
            [
                0.5 + r.ravel() * np.cos(th),
                0.5 + r.ravel() * np.sin(th),
                z.ravel(),
            ],
            axis=1,
        )
        vals = sample(u, np.mod(pts, 1.0), mode="wrap")
        acc += coupling(vals, kind).reshape(spec2.shape) ** 2
    omega = acc * (2.0 * np.pi / m_theta) * r
    return ScalarField(spec2, omega)


def circular_reduced_geodesic(
    u: ScalarField,
    c1: tuple,
    c2: tuple,
    m_theta: int,
    kind: PotentialKind = PotentialKind.WCH,
    floor: float = 1e-3,
    step: float | None = None,
) -> SweepSurface:
    """Geodesic between coaxial horizontal circles via the (r, z) reduction.

    c1 and c2 are (radius, height) pairs. The 2D weight is floored at
    `floor` so the axis r = 0 stays marchable, fast-marched from c1, and
    the path backtracked from c2 is lifted to circles sampled at m_theta
    angles around the box centreline.
    """
    p1 = np.asarray(c1, dtype=np.float64)
    p2 = np.asarray(c2, dtype=np.float64)
    if p1.min() < 0 or p2.min() < 0:
        raise ValueError("radii must be nonnegative")
    omega = circular_weight(u, m_theta, kind)
    floored = ScalarField(omega.spec, np.maximum(omega.values, floor))
    thetas = 2.0 * np.pi * np.arange(m_theta) / m_theta

    def lift(path_rz: np.ndarray) -> np.ndarray:
        rr = path_rz[:, 0][:, None]
        zz = path_rz[:, 1][:, None]
        x = 0.5 + rr * np.cos(thetas)[None, :]
        y = 0.5 + rr * np.sin(thetas)[None, :]
        z = np.broadcast_to(zz, x.shape)
        return np.stack([x, y, z], axis=2)

    if np.allclose(p1, p2):
        return SweepSurface(lift(p1[None, :]))

    dmap = fast_march(WeightField(floored, floor), [p1])
    path = backtrack_point(dmap, p2, step=step)
    # orient rows from c2 down to c1 and clamp the lift into the box
    lat = np.clip(lift(path.points), 0.0, 1.0)
    return SweepSurface(lat)
