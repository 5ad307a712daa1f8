"""Gauge potentials, field strength, rank, null space and pseudo-inverse.

Conventions
-----------
``A`` is a covector ``A_i`` in the coordinates of the point's chart. The
Jacobian is stored as ``J[i, j] = d_i A_j`` and the field strength is
``F_ij = d_i A_j - d_j A_i = J - J.T``.

For the monopole, ``F_ij = (N/2) eps_ijk x^k / r**3`` in Cartesian charts.
This is the normalization for which the spherical component is
``F_{theta phi} = (N/2) sin(theta)`` and which equals the curl of the Dirac
potentials, so exact and finite-difference fields agree.

All closed forms are vectorized over leading axes so that grids can be
evaluated in one call.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import ChartBoundaryError, ChartError, ExcludedPointError, UnknownPresetError

DEFAULT_RANK_TOL = 1e-8


@dataclass(frozen=True)
class ChartPoint:
    """Coordinates of a configuration-space point together with its chart."""

    coords: tuple
    chart: str = "cartesian"

    def __post_init__(self):
        coords = tuple(float(c) for c in np.ravel(self.coords))
        if len(coords) < 2:
            raise ValueError("configuration space needs at least two coordinates")
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"non-finite coordinates {coords}")
        object.__setattr__(self, "coords", coords)

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coords)

    def complex_view(self) -> np.ndarray:
        """Pairs ``(x^1, x^2), (x^3, x^4), ...`` combined into ``x + iy``."""
        arr = self.array
        m = len(arr) // 2
        return arr[0:2 * m:2] + 1j * arr[1:2 * m:2]

    def shifted(self, delta) -> "ChartPoint":
        return ChartPoint(self.array + np.asarray(delta, dtype=float), self.chart)


def _finite_mask(x):
    return np.all(np.isfinite(x), axis=-1)


class PotentialSpec:
    """Base class for gauge potentials.

    Subclasses implement the vectorized closed forms ``_values``,
    ``_jacobian`` and (optionally) ``_field`` for each chart they support,
    and ``_valid`` returning a boolean mask of points inside the chart.
    """

    kind = "abstract"
    charts: tuple = ("cartesian",)

    def __init__(self, dim: int):
        self.dim = int(dim)

    @property
    def default_chart(self) -> str:
        return self.charts[0]

    def params(self) -> dict:
        return {}

    def describe(self) -> dict:
        return {"kind": self.kind, "dimension": self.dim, **self.params()}

    def _check_chart(self, chart):
        if chart not in self.charts:
            raise ChartError(f"{self.kind} potential has no chart {chart!r}; "
                             f"available: {', '.join(self.charts)}")

    def _as_array(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.dim:
            raise ValueError(f"{self.kind} potential lives in dimension {self.dim}, "
                             f"got points of dimension {x.shape[-1]}")
        return x

    def valid_mask(self, x, chart) -> np.ndarray:
        self._check_chart(chart)
        x = self._as_array(x)
        return _finite_mask(x) & self._valid(x, chart)

    def _valid(self, x, chart):
        return np.ones(x.shape[:-1], dtype=bool)

    def check(self, point: ChartPoint) -> None:
        """Raise :class:`ChartError` unless ``point`` lies inside its chart."""
        if not bool(self.valid_mask(point.array, point.chart)):
            raise ExcludedPointError(
                f"point {point.coords} is on the excluded set of chart "
                f"{point.chart!r} for the {self.kind} potential")

    def values(self, x, chart) -> np.ndarray:
        self._check_chart(chart)
        return self._values(self._as_array(x), chart)

    def jacobian(self, x, chart) -> np.ndarray:
        """``J[..., i, j] = d_i A_j`` in closed form."""
        self._check_chart(chart)
        return self._jacobian(self._as_array(x), chart)

    def field(self, x, chart) -> np.ndarray:
        self._check_chart(chart)
        return self._field(self._as_array(x), chart)

    def _field(self, x, chart):
        J = self._jacobian(x, chart)
        return J - np.swapaxes(J, -1, -2)


# ----------------------------------------------------------------------------
# presets

class DiscPotential(PotentialSpec):
    """``A = rho(r) dphi`` inside ``r <= r0`` and zero outside.

    The profile is ``rho(r) = scale * r**power / power`` with an even
    ``power >= 2``; the default gives ``rho = r**2 / 2``, i.e. ``F = dx^dy``
    inside the disc. Even powers keep the Cartesian potential polynomial.
    """

    kind = "disc"
    charts = ("cartesian", "polar")

    def __init__(self, r0: float = 1.0, power: int = 2, scale: float = 1.0):
        super().__init__(2)
        if not r0 > 0:
            raise ValueError(f"disc radius must be positive, got {r0}")
        if power < 2 or power % 2:
            raise ValueError(f"profile power must be an even integer >= 2, got {power}")
        if scale == 0:
            raise ValueError("profile scale must be nonzero")
        self.r0 = float(r0)
        self.power = int(power)
        self.scale = float(scale)

    def params(self):
        return {"r0": self.r0, "power": self.power, "scale": self.scale}

    def rho(self, r):
        return self.scale * np.asarray(r, dtype=float) ** self.power / self.power

    def drho(self, r):
        return self.scale * np.asarray(r, dtype=float) ** (self.power - 1)

    def _valid(self, x, chart):
        if chart == "polar":
            return x[..., 0] > 0
        return np.ones(x.shape[:-1], dtype=bool)

    def _inside(self, x, chart):
        if chart == "polar":
            return x[..., 0] <= self.r0
        return x[..., 0] ** 2 + x[..., 1] ** 2 <= self.r0 ** 2

    def _g(self, r2):
        # rho(r) / r**2 and its derivative factor, both polynomial in r2
        k = self.power
        g = self.scale / k * r2 ** ((k - 2) // 2)
        dg = self.scale / k * (k - 2) * r2 ** ((k - 4) // 2) if k >= 4 else np.zeros_like(r2)
        return g, dg

    def _values(self, x, chart):
        out = np.zeros_like(x)
        inside = self._inside(x, chart)
        if chart == "polar":
            out[..., 1] = np.where(inside, self.rho(x[..., 0]), 0.0)
            return out
        r2 = x[..., 0] ** 2 + x[..., 1] ** 2
        g, _ = self._g(r2)
        g = np.where(inside, g, 0.0)
        out[..., 0] = -x[..., 1] * g
        out[..., 1] = x[..., 0] * g
        return out

    def _jacobian(self, x, chart):
        J = np.zeros(x.shape + (2,))
        inside = self._inside(x, chart)
        if chart == "polar":
            J[..., 0, 1] = np.where(inside, self.drho(x[..., 0]), 0.0)
            return J
        X, Y = x[..., 0], x[..., 1]
        g, dg = self._g(X ** 2 + Y ** 2)
        g = np.where(inside, g, 0.0)
        dg = np.where(inside, dg, 0.0)
        # d_i g = dg * x_i
        J[..., 0, 0] = -Y * dg * X
        J[..., 1, 0] = -Y * dg * Y - g
        J[..., 0, 1] = X * dg * X + g
        J[..., 1, 1] = X * dg * Y
        return J

    def _field(self, x, chart):
        F = np.zeros(x.shape + (2,))
        inside = self._inside(x, chart)
        if chart == "polar":
            val = np.where(inside, self.drho(x[..., 0]), 0.0)
        else:
            r2 = x[..., 0] ** 2 + x[..., 1] ** 2
            # rho'(r) / r
            val = np.where(inside, self.scale * r2 ** ((self.power - 2) // 2), 0.0)
        F[..., 0, 1] = val
        F[..., 1, 0] = -val
        return F


class DarbouxPotential(PotentialSpec):
    """Constant ``F = sum_k dx^k ^ dy^k`` with ``A_j = F_ij x^i / 2``.

    Coordinates are ordered ``(x^1, y^1, ..., x^p, y^p, z^1, ...)``.
    """

    kind = "darboux"

    def __init__(self, p: int, n: int):
        super().__init__(n)
        if n < 2 or p < 0 or 2 * p > n:
            raise ValueError(f"darboux preset needs 0 <= 2p <= n and n >= 2, got p={p}, n={n}")
        self.p = int(p)

    def params(self):
        return {"p": self.p, "n": self.dim}

    def field_matrix(self) -> np.ndarray:
        F = np.zeros((self.dim, self.dim))
        for k in range(self.p):
            F[2 * k, 2 * k + 1] = 1.0
            F[2 * k + 1, 2 * k] = -1.0
        return F

    def _values(self, x, chart):
        return 0.5 * x @ self.field_matrix()

    def _jacobian(self, x, chart):
        return np.broadcast_to(0.5 * self.field_matrix(), x.shape + (self.dim,)).copy()

    def _field(self, x, chart):
        return np.broadcast_to(self.field_matrix(), x.shape + (self.dim,)).copy()


class StackPotential(DarbouxPotential):
    """``A = -(y/2) dx + (x/2) dy`` in three dimensions: a stack of planes."""

    kind = "stack"

    def __init__(self):
        super().__init__(1, 3)

    def params(self):
        return {}


class MonopolePotential(PotentialSpec):
    """Dirac potentials of a monopole of integer charge ``N``.

    Charts ``north``/``south`` are Cartesian and carry ``A_+``/``A_-``,
    excluding the negative/positive z half-axis respectively. The charts
    ``spherical``/``spherical_south`` use ``(r, theta, phi)`` with
    ``A = (N/2)(+-1 - cos theta) dphi``.
    """

    kind = "monopole"
    charts = ("north", "south", "spherical", "spherical_south")

    def __init__(self, N: int):
        super().__init__(3)
        if N != int(N) or int(N) == 0:
            raise ValueError(f"monopole charge must be a nonzero integer, got {N}")
        self.N = int(N)

    def params(self):
        return {"N": self.N}

    @staticmethod
    def _sign(chart):
        return 1.0 if chart in ("north", "spherical") else -1.0

    def _valid(self, x, chart):
        if chart in ("spherical", "spherical_south"):
            r, th = x[..., 0], x[..., 1]
            ok = (r > 0) & (th >= 0) & (th <= math.pi)
            if chart == "spherical":
                return ok & (th < math.pi)
            return ok & (th > 0)
        r = np.sqrt(np.sum(x * x, axis=-1))
        sgn = self._sign(chart)
        return (r > 0) & (sgn * (x[..., 2] + sgn * r) > 0)

    def _values(self, x, chart):
        out = np.zeros_like(x)
        s = self._sign(chart)
        if chart.startswith("spherical"):
            out[..., 2] = 0.5 * self.N * (s - np.cos(x[..., 1]))
            return out
        r = np.sqrt(np.sum(x * x, axis=-1))
        h = 0.5 * self.N / (r * (x[..., 2] + s * r))
        out[..., 0] = -x[..., 1] * h
        out[..., 1] = x[..., 0] * h
        return out

    def _jacobian(self, x, chart):
        J = np.zeros(x.shape + (3,))
        s = self._sign(chart)
        if chart.startswith("spherical"):
            J[..., 1, 2] = 0.5 * self.N * np.sin(x[..., 1])
            return J
        X, Y, Z = x[..., 0], x[..., 1], x[..., 2]
        r = np.sqrt(X * X + Y * Y + Z * Z)
        D = r * (Z + s * r)
        h = 0.5 * self.N / D
        # d_i D = z x_i / r + r delta_iz + 2 s x_i
        dD = (Z / r)[..., None] * x + 2 * s * x
        dD[..., 2] += r
        dh = -(0.5 * self.N / (D * D))[..., None] * dD
        J[..., :, 0] = -Y[..., None] * dh
        J[..., 1, 0] -= h
        J[..., :, 1] = X[..., None] * dh
        J[..., 0, 1] += h
        return J

    def _field(self, x, chart):
        F = np.zeros(x.shape + (3,))
        if chart.startswith("spherical"):
            val = 0.5 * self.N * np.sin(x[..., 1])
            F[..., 1, 2] = val
            F[..., 2, 1] = -val
            return F
        r = np.sqrt(np.sum(x * x, axis=-1))
        b = (0.5 * self.N / r ** 3)[..., None] * x
        F[..., 0, 1] = b[..., 2]
        F[..., 1, 0] = -b[..., 2]
        F[..., 1, 2] = b[..., 0]
        F[..., 2, 1] = -b[..., 0]
        F[..., 2, 0] = b[..., 1]
        F[..., 0, 2] = -b[..., 1]
        return F


@dataclass
class Monomial:
    exponents: tuple
    coeff: float


class PolynomialPotential(PotentialSpec):
    """User potential with each ``A_i`` a sum of monomials in Cartesian coordinates."""

    kind = "custom"

    def __init__(self, dimension: int, components):
        super().__init__(dimension)
        if len(components) != self.dim:
            raise ValueError(f"expected {self.dim} components, got {len(components)}")
        self.components = []
        for comp in components:
            terms = []
            for term in comp:
                if isinstance(term, Monomial):
                    exps, coeff = term.exponents, term.coeff
                else:
                    exps, coeff = term["exponents"], term["coeff"]
                exps = tuple(int(e) for e in exps)
                if len(exps) != self.dim or any(e < 0 for e in exps):
                    raise ValueError(f"bad exponent vector {exps} for dimension {self.dim}")
                coeff = float(coeff)
                if not math.isfinite(coeff):
                    raise ValueError("monomial coefficient must be finite")
                terms.append(Monomial(exps, coeff))
            self.components.append(terms)

    @classmethod
    def from_json(cls, doc) -> "PolynomialPotential":
        if isinstance(doc, (str, bytes)):
            doc = json.loads(doc)
        unknown = set(doc) - {"dimension", "components"}
        if unknown:
            raise ValueError(f"unknown keys in potential document: {sorted(unknown)}")
        return cls(doc["dimension"], doc["components"])

    @classmethod
    def from_file(cls, path) -> "PolynomialPotential":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def to_json(self) -> dict:
        return {
            "dimension": self.dim,
            "components": [[{"exponents": list(t.exponents), "coeff": t.coeff} for t in comp]
                           for comp in self.components],
        }

    def params(self):
        return {"components": self.to_json()["components"]}

    def _eval_terms(self, x, terms, skip=None):
        out = np.zeros(x.shape[:-1])
        for t in terms:
            exps = list(t.exponents)
            coeff = t.coeff
            if skip is not None:
                e = exps[skip]
                if e == 0:
                    continue
                coeff *= e
                exps[skip] = e - 1
            mono = np.full(x.shape[:-1], coeff)
            for i, e in enumerate(exps):
                if e:
                    mono = mono * x[..., i] ** e
            out = out + mono
        return out

    def _values(self, x, chart):
        return np.stack([self._eval_terms(x, comp) for comp in self.components], axis=-1)

    def _jacobian(self, x, chart):
        J = np.zeros(x.shape + (self.dim,))
        for j, comp in enumerate(self.components):
            for i in range(self.dim):
                J[..., i, j] = self._eval_terms(x, comp, skip=i)
        return J


def zero_potential(dim: int = 2) -> PolynomialPotential:
    return PolynomialPotential(dim, [[] for _ in range(dim)])


PRESETS = {
    "disc": DiscPotential,
    "stack": StackPotential,
    "monopole": MonopolePotential,
    "darboux": DarbouxPotential,
}


def make_potential(kind: str, **params) -> PotentialSpec:
    """Build a preset by name. ``custom`` takes ``file`` or ``document``."""
    if kind == "custom":
        if "file" in params:
            return PolynomialPotential.from_file(params["file"])
        if "document" in params:
            return PolynomialPotential.from_json(params["document"])
        raise ValueError("custom potential needs a 'file' or 'document'")
    try:
        cls = PRESETS[kind]
    except KeyError:
        raise UnknownPresetError(f"unknown preset {kind!r}; choose from "
                                 f"{', '.join(sorted(PRESETS) + ['custom'])}") from None
    return cls(**params)


# ----------------------------------------------------------------------------
# pointwise operations

@dataclass(frozen=True)
class FieldStrengthMatrix:
    entries: np.ndarray
    point: ChartPoint
    method: str = "exact"
    step: float | None = None

    @property
    def dim(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True)
class ThetaMatrix:
    """Pseudo-inverse of F on its symplectic block."""

    entries: np.ndarray
    rank_used: int
    tolerance: float
    degenerate: bool = False


def evaluate_potential(spec: PotentialSpec, p: ChartPoint) -> np.ndarray:
    spec.check(p)
    return spec.values(p.array, p.chart)


def default_step(p: ChartPoint) -> float:
    return 1e-5 * (1.0 + float(np.linalg.norm(p.array)))


def _antisymmetrize(M):
    return 0.5 * (M - np.swapaxes(M, -1, -2))


def potential_jacobian(spec: PotentialSpec, p: ChartPoint, method="exact", h=None) -> np.ndarray:
    """``d_i A_j`` at ``p``, exactly or by central differences."""
    spec.check(p)
    if method == "exact":
        return spec.jacobian(p.array, p.chart)
    if method not in ("finite_difference", "fd"):
        raise ValueError(f"unknown derivative method {method!r}")
    h = default_step(p) if h is None else float(h)
    if not h > 0:
        raise ValueError("finite-difference step must be positive")
    n = p.dim
    x = p.array
    offsets = np.concatenate([np.eye(n) * s for s in (h, -h, 2 * h, -2 * h)])
    stencil = x + offsets
    if not np.all(spec.valid_mask(stencil, p.chart)):
        raise ChartBoundaryError(f"finite-difference stencil of radius {2 * h:g} around "
                                 f"{p.coords} leaves chart {p.chart!r}")
    vals = spec.values(stencil[:2 * n], p.chart)
    return (vals[:n] - vals[n:2 * n]) / (2 * h)


def field_strength(spec: PotentialSpec, p: ChartPoint, method="exact", h=None) -> FieldStrengthMatrix:
    """``F_ij = d_i A_j - d_j A_i`` at a point.

    ``method="exact"`` uses the preset's closed form; ``"finite_difference"``
    takes central differences of :func:`evaluate_potential` with step ``h``
    (default ``1e-5 * (1 + |p|)``). Near the disc boundary the piecewise
    field makes differences within ``2h`` of ``r0`` meaningless.
    """
    if method == "exact":
        spec.check(p)
        F = spec.field(p.array, p.chart)
        return FieldStrengthMatrix(_antisymmetrize(F), p, "exact", None)
    h = default_step(p) if h is None else float(h)
    J = potential_jacobian(spec, p, method, h)
    return FieldStrengthMatrix(_antisymmetrize(J - J.T), p, "finite_difference", h)


def _entries(F):
    return F.entries if isinstance(F, FieldStrengthMatrix) else np.asarray(F, dtype=float)


def rank_from_singular_values(sv, tol=DEFAULT_RANK_TOL):
    """Even rank from singular values; works on stacks of shape (..., n)."""
    sv = np.asarray(sv)
    smax = sv.max(axis=-1, initial=0.0)
    thresh = tol * np.maximum(1.0, smax)
    count = np.sum(sv > thresh[..., None], axis=-1)
    return count - count % 2


def rank_f(F, tol=DEFAULT_RANK_TOL) -> int:
    """Number of singular values above ``tol * max(1, sigma_max)``, rounded down to even."""
    sv = np.linalg.svd(_entries(F), compute_uv=False)
    return int(rank_from_singular_values(sv, tol))


def batch_ranks(F_stack, tol=DEFAULT_RANK_TOL) -> np.ndarray:
    sv = np.linalg.svd(np.asarray(F_stack), compute_uv=False)
    return rank_from_singular_values(sv, tol)


def orient(v, eps=1e-12):
    """Flip ``v`` so that its last component with ``|c| > eps*|v|`` is positive."""
    v = np.asarray(v, dtype=float)
    big = np.flatnonzero(np.abs(v) > eps * max(1.0, np.abs(v).max()))
    if big.size and v[big[-1]] < 0:
        return -v
    return v


def null_space(F, tol=DEFAULT_RANK_TOL) -> np.ndarray:
    """Orthonormal null-space basis as rows, in a reproducible order.

    The basis does not depend on how the SVD happens to rotate the null
    space: coordinate axes are projected onto it, taken in order of
    decreasing projection length (ties by axis index), Gram-Schmidt
    orthonormalized, and each vector is flipped so that its last nonzero
    component is positive.
    """
    M = _entries(F)
    n = M.shape[0]
    rank = rank_f(M, tol)
    k = n - rank
    if k == 0:
        return np.zeros((0, n))
    _, _, vt = np.linalg.svd(M)
    V = vt[rank:]
    P = V.T @ V
    overlap = np.linalg.norm(P, axis=0)
    order = sorted(range(n), key=lambda i: (-round(overlap[i], 12), i))
    basis = []
    for i in order:
        v = P[:, i].copy()
        for b in basis:
            v -= (b @ v) * b
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
        if len(basis) == k:
            break
    return np.array([orient(b) for b in basis])


def pseudo_inverse_theta(F, tol=DEFAULT_RANK_TOL) -> ThetaMatrix:
    """Inverse of F on its rank-``2p`` block, zero on the null space."""
    M = _entries(F)
    rank = rank_f(M, tol)
    if rank == 0:
        return ThetaMatrix(np.zeros_like(M), 0, tol, degenerate=True)
    u, s, vt = np.linalg.svd(M)
    theta = (vt[:rank].T / s[:rank]) @ u[:, :rank].T
    return ThetaMatrix(_antisymmetrize(theta), rank, tol)
