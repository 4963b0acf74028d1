"""Fast-marching solver for the weighted eikonal equation |grad d| = omega.

The front is expanded on the plain (non-wrapping) box even though fields
are stored periodically: geodesics of interest stay inside the domain and
periodic shortcuts would be unphysical. Sources may be points or discrete
curves; nodes closer than one cell to the source geometry are seeded with
the weighted sub-grid distance.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import NumericalError
from .grid import GridSpec, ScalarField

_SEED_SAMPLE_FRACTION = 0.25  # curve sources are densified to h/4 spacing


@dataclass(frozen=True)
class WeightField:
    """Strictly positive front speed; `floor` is the guaranteed lower bound."""

    field: ScalarField
    floor: float

    def __post_init__(self):
        if self.floor <= 0:
            raise ValueError("weight floor must be positive")
        if self.field.min() < self.floor - 1e-15:
            raise ValueError("weight field drops below its declared floor")


@dataclass(frozen=True)
class DistanceMap:
    """FMM output: d >= 0 everywhere, minimal on the seeded source nodes."""

    spec: GridSpec
    values: np.ndarray
    source_indices: np.ndarray  # flat indices of seeded nodes
    source_points: np.ndarray  # dense geometry samples, shape (m, dim)
    gradient: np.ndarray  # (dim, *shape), central differences

    def distance_to_source(self, points: np.ndarray) -> np.ndarray:
        """Euclidean distance from query points to the source geometry."""
        pts = np.atleast_2d(points)
        diff = pts[:, None, :] - self.source_points[None, :, :]
        return np.sqrt((diff**2).sum(axis=2)).min(axis=1)


@njit(cache=True)
def _march(d, state, omega, nx, ny, nz, h, seed_idx, seed_val):
    """Single-pass causal expansion; returns the worst acceptance-order slip."""
    heap = [(0.0, 0)]
    heap.pop()
    for s in range(seed_idx.shape[0]):
        i = seed_idx[s]
        if seed_val[s] < d[i]:
            d[i] = seed_val[s]
            state[i] = 1
            heapq.heappush(heap, (d[i], i))

    nxy = nx * ny
    last = -1.0e300
    worst_slip = 0.0
    while len(heap) > 0:
        v, i = heapq.heappop(heap)
        if state[i] == 2:
            continue
        state[i] = 2
        if v < last:
            slip = last - v
            if slip > worst_slip:
                worst_slip = slip
        else:
            last = v

        iz = i // nxy
        rem = i - iz * nxy
        iy = rem // nx
        ix = rem - iy * nx

        for axis in range(3):
            for sgn in (-1, 1):
                jx, jy, jz = ix, iy, iz
                if axis == 0:
                    jx += sgn
                    if jx < 0 or jx >= nx:
                        continue
                elif axis == 1:
                    jy += sgn
                    if jy < 0 or jy >= ny:
                        continue
                else:
                    if nz == 1:
                        continue
                    jz += sgn
                    if jz < 0 or jz >= nz:
                        continue
                j = jx + nx * (jy + ny * jz)
                if state[j] == 2:
                    continue

                # upwind axis minima among accepted neighbours
                a0 = 1.0e300
                if jx > 0 and state[j - 1] == 2 and d[j - 1] < a0:
                    a0 = d[j - 1]
                if jx < nx - 1 and state[j + 1] == 2 and d[j + 1] < a0:
                    a0 = d[j + 1]
                a1 = 1.0e300
                if jy > 0 and state[j - nx] == 2 and d[j - nx] < a1:
                    a1 = d[j - nx]
                if jy < ny - 1 and state[j + nx] == 2 and d[j + nx] < a1:
                    a1 = d[j + nx]
                a2 = 1.0e300
                if nz > 1:
                    if jz > 0 and state[j - nxy] == 2 and d[j - nxy] < a2:
                        a2 = d[j - nxy]
                    if jz < nz - 1 and state[j + nxy] == 2 and d[j + nxy] < a2:
                        a2 = d[j + nxy]

                # sort the finite minima ascending
                if a1 < a0:
                    a0, a1 = a1, a0
                if a2 < a1:
                    a1, a2 = a2, a1
                if a1 < a0:
                    a0, a1 = a1, a0
                if a0 >= 1.0e300:
                    continue

                f = omega[j] * h
                m = 1
                if a1 < 1.0e300:
                    m = 2
                if a2 < 1.0e300:
                    m = 3
                t = 0.0
                while True:
                    if m == 1:
                        t = a0 + f
                        break
                    if m == 2:
                        sa = a0 + a1
                        disc = 0.5 * sa * sa - (a0 * a0 + a1 * a1 - f * f)
                        if disc >= 0.0:
                            t = 0.5 * sa + 0.5 * np.sqrt(2.0 * disc)
                            if t >= a1:
                                break
                        m = 1  # drop the largest contributing axis
                        continue
                    sa = a0 + a1 + a2
                    qs = a0 * a0 + a1 * a1 + a2 * a2
                    disc = sa * sa - 3.0 * (qs - f * f)
                    if disc >= 0.0:
                        t = (sa + np.sqrt(disc)) / 3.0
                        if t >= a2:
                            break
                    m = 2
                if t < d[j] - 1e-15:
                    d[j] = t
                    state[j] = 1
                    heapq.heappush(heap, (t, j))
    return worst_slip


def _source_samples(source, h: float) -> np.ndarray:
    """Dense point samples of one source (point, Polyline, or ClosedCurve)."""
    if hasattr(source, "samples"):  # closed curve
        pts = np.asarray(source.samples, dtype=np.float64)
        closed = True
    elif hasattr(source, "points"):  # polyline
        pts = np.asarray(source.points, dtype=np.float64)
        closed = bool(getattr(source, "closed", False))
    else:
        p = np.asarray(source, dtype=np.float64).reshape(1, -1)
        return p
    if len(pts) == 1:
        return pts
    step = _SEED_SAMPLE_FRACTION * h
    ends = np.vstack([pts[1:], pts[:1]]) if closed else pts[1:]
    starts = pts if closed else pts[:-1]
    out = [pts]
    for a, b in zip(starts, ends):
        ln = float(np.linalg.norm(b - a))
        k = int(np.ceil(ln / step))
        if k > 1:
            ts = np.arange(1, k)[:, None] / k
            out.append(a[None, :] + ts * (b - a)[None, :])
    return np.vstack(out)


def _seed_nodes(spec: GridSpec, samples: np.ndarray, omega: np.ndarray):
    """Seed every node strictly within one cell of the source samples.

    Seed value is omega(node) * distance(node, source), clamped to >= 0.
    """
    n, h, dim = spec.n, spec.h, spec.dim
    offs = np.stack(
        np.meshgrid(*([np.arange(-1, 3)] * dim), indexing="ij"), axis=-1
    ).reshape(-1, dim)
    base = np.floor(samples / h).astype(np.int64)
    nodes = base[:, None, :] + offs[None, :, :]  # (S, 4^dim, dim)
    inside = np.all((nodes >= 0) & (nodes < n), axis=2)
    coords = nodes * h
    dist = np.sqrt(((coords - samples[:, None, :]) ** 2).sum(axis=2))
    keep = inside & (dist < h)
    if not keep.any():
        raise ValueError("source lies outside the box")
    nodes = nodes[keep]
    dist = dist[keep]
    if dim == 2:
        flat = nodes[:, 0] + n * nodes[:, 1]
    else:
        flat = nodes[:, 0] + n * (nodes[:, 1] + n * nodes[:, 2])
    full = np.full(n**dim, np.inf)
    np.fmin.at(full, flat, dist)
    idx = np.flatnonzero(np.isfinite(full))
    vals = np.maximum(full[idx] * omega[idx], 0.0)
    return idx.astype(np.int64), vals


def fast_march(omega, sources, check_monotone: bool = False) -> DistanceMap:
    """Weighted distance from the source set, first-order upwind FMM.

    `omega` is a WeightField (or a strictly positive ScalarField);
    `sources` is a list whose items are points, Polylines or ClosedCurves.
    """
    if isinstance(omega, WeightField):
        field = omega.field
    else:
        field = omega
        if field.min() <= 0:
            raise ValueError("weight must be strictly positive for causal marching")
    spec = field.spec
    if not sources:
        raise ValueError("source list is empty")

    samples = np.vstack([_source_samples(s, spec.h) for s in sources])
    if samples.shape[1] != spec.dim:
        raise ValueError("source dimension does not match the grid")
    if samples.min() < 0.0 or samples.max() > 1.0:
        raise ValueError("source lies outside the unit box")

    # x-fastest flat layout shared with the marching kernel
    omega_flat = np.ravel(field.values, order="F")
    seed_idx, seed_val = _seed_nodes(spec, samples, omega_flat)

    d = np.full(spec.n**spec.dim, np.inf)
    state = np.zeros(d.shape[0], dtype=np.uint8)
    nz = spec.n if spec.dim == 3 else 1
    slip = _march(d, state, omega_flat, spec.n, spec.n, nz, spec.h, seed_idx, seed_val)
    if check_monotone and slip > 1e-9 * max(d.max(), 1.0):
        raise NumericalError(f"acceptance order regressed by {slip:.3e}")
    if not np.isfinite(d).all():
        raise NumericalError("front did not reach the whole box")

    values = d.reshape(spec.shape, order="F")
    grad = _distance_gradient(spec, values, seed_idx)
    return DistanceMap(
        spec=spec,
        values=values,
        source_indices=seed_idx,
        source_points=samples,
        gradient=grad,
    )


def _distance_gradient(spec: GridSpec, values: np.ndarray, seed_idx: np.ndarray):
    """Central-difference gradient, one-sided next to seeds, zero on seeds."""
    h = spec.h
    grads = np.stack(np.gradient(values, h), axis=0)

    src = np.zeros(spec.shape, dtype=bool)
    src[np.unravel_index(seed_idx, spec.shape, order="F")] = True

    for ax in range(spec.dim):
        fwd = (np.roll(values, -1, axis=ax) - values) / h
        bwd = (values - np.roll(values, 1, axis=ax)) / h
        left_src = np.roll(src, 1, axis=ax)
        right_src = np.roll(src, -1, axis=ax)
        first = [slice(None)] * spec.dim
        last = [slice(None)] * spec.dim
        first[ax] = 0
        last[ax] = spec.n - 1
        left_src[tuple(first)] = False
        right_src[tuple(last)] = False
        fwd[tuple(last)] = grads[ax][tuple(last)]
        bwd[tuple(first)] = grads[ax][tuple(first)]
        use_fwd = left_src & ~right_src & ~src
        use_bwd = right_src & ~left_src & ~src
        grads[ax] = np.where(use_fwd, fwd, np.where(use_bwd, bwd, grads[ax]))
        grads[ax][src] = 0.0
    return grads


def gradient_at(d: DistanceMap, x: np.ndarray) -> np.ndarray:
    """Interpolated gradient of the distance map at box points.

    Accepts one point (dim,) or a batch (m, dim); returns matching shape.
    """
    pts = np.asarray(x, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)
    spec = d.spec
    xg = np.clip(pts * spec.n, 0.0, spec.n - 1.0)
    base = np.floor(xg).astype(np.int64)
    frac = xg - base
    out = np.zeros((len(pts), spec.dim))
    for corner in range(2**spec.dim):
        idx = []
        w = np.ones(len(pts))
        for ax in range(spec.dim):
            bit = (corner >> ax) & 1
            idx.append(np.clip(base[:, ax] + bit, 0, spec.n - 1))
            w = w * (frac[:, ax] if bit else 1.0 - frac[:, ax])
        for ax in range(spec.dim):
            out[:, ax] += w * d.gradient[(ax, *idx)]
    return out[0] if single else out
