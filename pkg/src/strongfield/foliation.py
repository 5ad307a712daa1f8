"""Constant-rank regions, null-foliation leaves and the EOM residual."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from ._labeling import label_equal_rank
from .errors import (AmbiguousNullSpaceError, ChartError, DegeneratePathError,
                     RankRefusalError)
from .geometry import (DEFAULT_RANK_TOL, ChartPoint, PotentialSpec, batch_ranks,
                       field_strength, null_space, rank_f)

EXCLUDED = -1


@dataclass(frozen=True)
class GridSpec:
    """Axis-aligned box split into ``shape`` cells.

    Cells whose center lies within ``exclude_radius`` of the origin are
    marked excluded (used to cut out the monopole singularity).
    """

    lo: tuple
    hi: tuple
    shape: tuple
    exclude_radius: float = 0.0

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        shape = tuple(int(v) for v in self.shape)
        if not (len(lo) == len(hi) == len(shape)):
            raise ValueError("lo, hi and shape must have the same length")
        for a, b, m in zip(lo, hi, shape):
            if not a < b:
                raise ValueError(f"empty axis [{a}, {b}]")
            if m < 2:
                raise ValueError(f"resolution must be at least 2, got {m}")
        if self.exclude_radius < 0:
            raise ValueError("exclude_radius must be nonnegative")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "shape", shape)
        object.__setattr__(self, "exclude_radius", float(self.exclude_radius))

    @classmethod
    def uniform(cls, lo, hi, cells, dim, exclude_radius=0.0):
        return cls((lo,) * dim, (hi,) * dim, (cells,) * dim, exclude_radius)

    @classmethod
    def parse(cls, axes, dim, exclude_radius=0.0):
        """Build from ``min:max:cells`` strings; one string applies to every axis."""
        parsed = []
        for ax in axes:
            parts = ax.split(":")
            if len(parts) != 3:
                raise ValueError(f"grid axis {ax!r} is not of the form min:max:cells")
            parsed.append((float(parts[0]), float(parts[1]), int(parts[2])))
        if len(parsed) == 1:
            parsed *= dim
        if len(parsed) != dim:
            raise ValueError(f"expected 1 or {dim} grid axes, got {len(parsed)}")
        lo, hi, shape = zip(*parsed)
        return cls(lo, hi, shape, exclude_radius)

    @property
    def dim(self) -> int:
        return len(self.shape)

    def centers(self) -> np.ndarray:
        axes = [a + (np.arange(m) + 0.5) * (b - a) / m
                for a, b, m in zip(self.lo, self.hi, self.shape)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack(mesh, axis=-1)


@dataclass
class RegionMap:
    grid: GridSpec
    chart: str
    ranks: np.ndarray
    labels: np.ndarray
    regions: list = field(default_factory=list)

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    def touches_boundary(self, label: int) -> bool:
        mask = self.labels == label
        for ax, m in enumerate(self.labels.shape):
            if np.take(mask, 0, axis=ax).any() or np.take(mask, m - 1, axis=ax).any():
                return True
        return False

    def summary(self) -> dict:
        return {"regions": [dict(r) for r in self.regions]}

    def to_csv(self, fh=None) -> str:
        """Row-major cell table ``i,j[,k],x,y[,z],rank,region``."""
        n = self.grid.dim
        idx_names = list("ijk") if n <= 3 else [f"i{d}" for d in range(n)]
        coord_names = list("xyz") if n <= 3 else [f"x{d}" for d in range(n)]
        buf = io.StringIO() if fh is None else fh
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(idx_names[:n] + coord_names[:n] + ["rank", "region"])
        centers = self.grid.centers()
        for index in np.ndindex(*self.grid.shape):
            writer.writerow([*index, *(repr(float(c)) for c in centers[index]),
                             int(self.ranks[index]), int(self.labels[index])])
        return buf.getvalue() if fh is None else ""


def rank_map(spec: PotentialSpec, grid: GridSpec, tol=DEFAULT_RANK_TOL, chart=None,
             use_numba=None) -> RegionMap:
    """Rank of the exact F at every cell center, then face-connected regions.

    Cells outside the chart or inside the excluded ball get rank and label
    ``-1`` and take no part in the connectivity.
    """
    chart = spec.default_chart if chart is None else chart
    if grid.dim != spec.dim:
        raise ValueError(f"grid dimension {grid.dim} does not match potential dimension {spec.dim}")
    centers = grid.centers()
    valid = spec.valid_mask(centers, chart)
    if grid.exclude_radius > 0:
        valid &= np.linalg.norm(centers, axis=-1) > grid.exclude_radius
    ranks = np.full(grid.shape, EXCLUDED, dtype=np.int64)
    if valid.any():
        F = spec.field(centers[valid], chart)
        ranks[valid] = batch_ranks(F, tol)
    labels = label_equal_rank(ranks, use_numba=use_numba)
    regions = []
    flat_labels = labels.ravel()
    flat_ranks = ranks.ravel()
    counts = np.bincount(flat_labels[flat_labels >= 0], minlength=0)
    for lab in range(len(counts)):
        first = int(np.argmax(flat_labels == lab))
        regions.append({"label": lab, "rank": int(flat_ranks[first]), "cells": int(counts[lab])})
    return RegionMap(grid, chart, ranks, labels, regions)


def leaf_space_summary(region_map: RegionMap) -> dict:
    """Image of each region in the space of leaves.

    A region of rank ``2k`` contributes a ``2k``-dimensional piece; rank-0
    regions collapse to a point. In two dimensions, a single rank-0 region
    that reaches the grid edge and surrounds every nonzero-rank region is
    the one-point compactification of the rest, i.e. a topological sphere.
    Homotopy type is not computed beyond that case.
    """
    entries = []
    for reg in region_map.regions:
        item = {"label": reg["label"], "rank": reg["rank"], "cells": reg["cells"],
                "dimension": reg["rank"]}
        if reg["rank"] == 0:
            item["note"] = "collapses to a point"
        entries.append(item)
    zero = [r for r in entries if r["rank"] == 0]
    nonzero = [r for r in entries if r["rank"] > 0]
    if not nonzero:
        topology = "every region collapses to a point"
    elif (region_map.grid.dim == 2 and len(zero) == 1
          and region_map.touches_boundary(zero[0]["label"])
          and not any(region_map.touches_boundary(r["label"]) for r in nonzero)):
        topology = "plane with one region pinched to a point => topological sphere"
    else:
        dims = sorted({r["dimension"] for r in nonzero}, reverse=True)
        topology = (f"{len(nonzero)} region(s) of leaf-space dimension "
                    f"{'/'.join(map(str, dims))}; {len(zero)} region(s) collapse to points")
    return {"regions": entries, "rank_zero_regions": len(zero), "topology": topology}


# ----------------------------------------------------------------------------
# leaves

@dataclass
class LeafPath:
    coords: np.ndarray
    chart: str
    step: float
    reason: str

    @property
    def points(self) -> list:
        return [ChartPoint(c, self.chart) for c in self.coords]

    def __len__(self):
        return len(self.coords)


class _Stop(Exception):
    def __init__(self, reason):
        self.reason = reason


def _null_direction(spec, x, chart, prev, rank0, tol):
    """Unit null vector at ``x`` closest to ``prev``."""
    p = ChartPoint(x, chart)
    try:
        F = field_strength(spec, p)
    except ChartError:
        raise _Stop("chart_boundary") from None
    if rank_f(F, tol) != rank0:
        raise _Stop("rank_change")
    basis = null_space(F, tol)
    v = basis.T @ (basis @ prev)
    norm = np.linalg.norm(v)
    if norm < 1e-12:
        raise _Stop("rank_change")
    return v / norm


def trace_leaf(spec: PotentialSpec, start: ChartPoint, h=1e-2, max_steps=100,
               tol=DEFAULT_RANK_TOL, direction=None) -> LeafPath:
    """Follow the unit null direction of F from ``start`` with fixed-step RK4.

    Orientation starts from the null vector whose last nonzero component is
    positive (or from ``direction`` when given) and is continued by maximal
    overlap with the previous tangent. Tracing stops when the rank of F
    changes, the chart is left, or ``max_steps`` steps were taken.
    """
    if not h > 0:
        raise ValueError("step must be positive")
    F0 = field_strength(spec, start)
    rank0 = rank_f(F0, tol)
    n = start.dim
    if rank0 == 0:
        raise RankRefusalError("F vanishes at the start point: every direction is null "
                               "and there is no canonical leaf curve")
    basis = null_space(F0, tol)
    if len(basis) == 0:
        raise RankRefusalError(f"F has full rank {rank0} at the start point: the only "
                               "solution through it is the constant path")
    if direction is None:
        if len(basis) > 1:
            raise AmbiguousNullSpaceError(
                f"null space has dimension {len(basis)}; pass an initial direction")
        tangent = basis[0]
    else:
        d = np.asarray(direction, dtype=float)
        if d.shape != (n,):
            raise ValueError(f"direction must have {n} components")
        tangent = basis.T @ (basis @ d)
        if np.linalg.norm(tangent) < 1e-12:
            raise ValueError("direction is orthogonal to the null space")
        tangent /= np.linalg.norm(tangent)

    x = start.array
    pts = [x.copy()]
    reason = "max_steps"
    for _ in range(max_steps):
        try:
            k1 = _null_direction(spec, x, start.chart, tangent, rank0, tol)
            k2 = _null_direction(spec, x + 0.5 * h * k1, start.chart, k1, rank0, tol)
            k3 = _null_direction(spec, x + 0.5 * h * k2, start.chart, k2, rank0, tol)
            k4 = _null_direction(spec, x + h * k3, start.chart, k3, rank0, tol)
            x_new = x + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            tangent = _null_direction(spec, x_new, start.chart, k4, rank0, tol)
        except _Stop as stop:
            reason = stop.reason
            break
        x = x_new
        pts.append(x.copy())
    return LeafPath(np.array(pts), start.chart, float(h), reason)


def eom_residual(spec: PotentialSpec, path: LeafPath) -> float:
    """max over interior points of ``|F xdot| / (|F| |xdot|)``.

    ``xdot`` is the central difference of neighboring points and ``|F|``
    the spectral norm. Points where F vanishes contribute zero.
    """
    pts = np.asarray(path.coords)
    if len(pts) < 3:
        raise DegeneratePathError("need at least three points")
    worst = 0.0
    for k in range(1, len(pts) - 1):
        xdot = (pts[k + 1] - pts[k - 1]) / 2.0
        speed = np.linalg.norm(xdot)
        if speed == 0.0:
            raise DegeneratePathError(f"repeated points around index {k}")
        F = field_strength(spec, ChartPoint(pts[k], path.chart)).entries
        fnorm = np.linalg.norm(F, 2)
        if fnorm == 0.0:
            continue
        worst = max(worst, float(np.linalg.norm(F @ xdot) / (fnorm * speed)))
    return worst


def path_from_points(points, chart="cartesian", step=None) -> LeafPath:
    """Wrap arbitrary coordinates (e.g. a test curve) as a LeafPath."""
    pts = np.asarray(points, dtype=float)
    if step is None:
        step = float(np.max(np.linalg.norm(np.diff(pts, axis=0), axis=1)))
    return LeafPath(pts, chart, step, "max_steps")


def region_summary_json(region_map: RegionMap) -> str:
    doc = region_map.summary()
    doc["leaf_space"] = leaf_space_summary(region_map)
    return json.dumps(doc, indent=2, sort_keys=True)
