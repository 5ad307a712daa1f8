"""Primary constraints ``kappa_i = p_i - A_i``, their classification and Dirac brackets.

The coordinate Dirac brackets are

    {x^i, x^j}_DB = theta^ij
    {x^i, p_j}_DB = delta^i_j + theta^ik d_j A_k
    {p_i, p_j}_DB = theta^kl d_i A_k d_j A_l

with ``theta`` the pseudo-inverse of ``F`` (not of ``-F``). With the
canonical bracket ``{x^i, p_j} = delta^i_j`` this is what the projector
formula for second-class constraints gives, e.g. ``L = x ydot`` yields
``{y, x} = 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import ChartError, RankBoundaryError
from .geometry import (DEFAULT_RANK_TOL, ChartPoint, DarbouxPotential, PotentialSpec,
                       ThetaMatrix, default_step, evaluate_potential, field_strength,
                       null_space, potential_jacobian, pseudo_inverse_theta, rank_f)

_CHART_NAMES = {
    "polar": ("r", "phi"),
    "spherical": ("r", "theta", "phi"),
    "spherical_south": ("r", "theta", "phi"),
}


def coordinate_names(spec: PotentialSpec, chart: str) -> tuple:
    if chart in _CHART_NAMES:
        return _CHART_NAMES[chart]
    if isinstance(spec, DarbouxPotential) and spec.kind == "darboux":
        names = []
        for k in range(spec.p):
            names += [f"x{k + 1}", f"y{k + 1}"]
        names += [f"z{k + 1}" for k in range(spec.dim - 2 * spec.p)]
        return tuple(names)
    if spec.dim <= 3:
        return ("x", "y", "z")[:spec.dim]
    return tuple(f"x{k + 1}" for k in range(spec.dim))


@dataclass(frozen=True)
class PhasePoint:
    position: ChartPoint
    momentum: tuple

    def __post_init__(self):
        mom = tuple(float(v) for v in np.ravel(self.momentum))
        if len(mom) != self.position.dim:
            raise ValueError(f"momentum has {len(mom)} components, position {self.position.dim}")
        object.__setattr__(self, "momentum", mom)


@dataclass(frozen=True)
class ConstraintClassification:
    rank: int
    second_class: int
    first_class: int
    gauge_directions: np.ndarray

    def to_dict(self) -> dict:
        return {"second_class": self.second_class, "first_class": self.first_class}


@dataclass(frozen=True)
class DiracBracketTable:
    theta: ThetaMatrix
    xp: np.ndarray
    pp: np.ndarray
    point: ChartPoint
    classification: ConstraintClassification
    names: tuple
    degenerate: bool = False

    @property
    def xx(self) -> np.ndarray:
        return self.theta.entries

    def _index(self, name):
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no coordinate {name!r}; chart has {self.names}") from None

    def coordinate_bracket(self, a: str, b: str) -> float:
        """``{a, b}_DB`` for two coordinate names, e.g. ``("phi", "theta")``."""
        return float(self.xx[self._index(a), self._index(b)])

    def to_dict(self) -> dict:
        return {
            "point": list(self.point.coords),
            "chart": self.point.chart,
            "coordinates": list(self.names),
            "theta": self.xx.tolist(),
            "xp": self.xp.tolist(),
            "pp": self.pp.tolist(),
            "classification": self.classification.to_dict(),
            "degenerate": self.degenerate,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def constraint_values(spec: PotentialSpec, pp: PhasePoint) -> np.ndarray:
    """``kappa_i = p_i - A_i(x)``."""
    return np.asarray(pp.momentum) - evaluate_potential(spec, pp.position)


def constraint_bracket_matrix(spec: PotentialSpec, x: ChartPoint) -> np.ndarray:
    """``{kappa_i, kappa_j}`` in the sign of the displayed constraint algebra, ``-F_ij``.

    Evaluating the bracket directly with ``{x, p} = +1`` gives ``+F_ij``;
    only the rank enters the classification, so the sign is immaterial there.
    """
    return -field_strength(spec, x).entries


def classify_constraints(spec: PotentialSpec, x: ChartPoint, tol=DEFAULT_RANK_TOL
                         ) -> ConstraintClassification:
    F = field_strength(spec, x)
    rank = rank_f(F, tol)
    return ConstraintClassification(rank, rank, spec.dim - rank, null_space(F, tol))


def near_rank_jump(spec: PotentialSpec, x: ChartPoint, rank: int, h: float, tol) -> bool:
    """True if moving ``10 h`` along any axis changes the rank of F.

    Perturbed points that leave the chart are skipped.
    """
    for axis in range(x.dim):
        for sgn in (1.0, -1.0):
            delta = np.zeros(x.dim)
            delta[axis] = sgn * 10.0 * h
            q = x.shifted(delta)
            try:
                r = rank_f(field_strength(spec, q), tol)
            except ChartError:
                continue
            if r != rank:
                return True
    return False


def dirac_bracket_table(spec: PotentialSpec, x: ChartPoint, tol=DEFAULT_RANK_TOL, h=None,
                        derivative="exact") -> DiracBracketTable:
    """Dirac brackets of coordinates and momenta at ``x``, in ``x``'s chart.

    Raises :class:`RankBoundaryError` when the rank of F jumps within
    ``10 h`` of the point (theta diverges there). At rank 0 away from any
    jump the table is the plain Poisson bracket and ``degenerate`` is set.
    """
    spec.check(x)
    h = default_step(x) if h is None else float(h)
    F = field_strength(spec, x)
    rank = rank_f(F, tol)
    if near_rank_jump(spec, x, rank, h, tol):
        raise RankBoundaryError(f"rank of F changes within {10 * h:g} of {x.coords}; "
                                "the Dirac bracket is undefined there")
    classification = ConstraintClassification(rank, rank, spec.dim - rank, null_space(F, tol))
    names = coordinate_names(spec, x.chart)
    n = spec.dim
    theta = pseudo_inverse_theta(F, tol)
    if theta.degenerate:
        return DiracBracketTable(theta, np.eye(n), np.zeros((n, n)), x, classification,
                                 names, degenerate=True)
    J = potential_jacobian(spec, x, derivative, h)
    th = theta.entries
    xp = np.eye(n) + th @ J.T
    pp = J @ th @ J.T
    pp = 0.5 * (pp - pp.T)
    if not (np.all(np.isfinite(th)) and np.all(np.isfinite(xp)) and np.all(np.isfinite(pp))):
        raise RankBoundaryError(f"non-finite Dirac bracket at {x.coords}")
    return DiracBracketTable(theta, xp, pp, x, classification, names)


def darboux_bracket_table(p: int, n: int, x) -> DiracBracketTable:
    """Closed-form brackets for the Darboux preset: theta = F^-1, xp = 1/2, pp = -F/4."""
    if p < 1:
        raise ValueError("darboux brackets need at least one symplectic pair (p >= 1)")
    spec = DarbouxPotential(p, n)
    point = x if isinstance(x, ChartPoint) else ChartPoint(x)
    if point.dim != n:
        raise ValueError(f"point has dimension {point.dim}, expected {n}")
    F = spec.field_matrix()
    # the Darboux matrix is orthogonal on its block, so its inverse is its transpose
    theta = ThetaMatrix(F.T.copy(), 2 * p, DEFAULT_RANK_TOL)
    block = np.zeros(n)
    block[:2 * p] = 1.0
    xp = np.diag(1.0 - 0.5 * block)
    pp = -0.25 * F
    gauge = np.eye(n)[2 * p:]
    classification = ConstraintClassification(2 * p, 2 * p, n - 2 * p, gauge)
    return DiracBracketTable(theta, xp, pp, point, classification, coordinate_names(spec, "cartesian"))


def jacobi_residual(spec: PotentialSpec, x: ChartPoint, tol=DEFAULT_RANK_TOL, h=1e-4) -> float:
    """max |theta^il d_l theta^jk + cyclic| with derivatives by central differences."""
    n = spec.dim
    th0 = pseudo_inverse_theta(field_strength(spec, x), tol).entries
    dth = np.zeros((n, n, n))
    for l in range(n):
        e = np.zeros(n)
        e[l] = h
        tp = pseudo_inverse_theta(field_strength(spec, x.shifted(e)), tol).entries
        tm = pseudo_inverse_theta(field_strength(spec, x.shifted(-e)), tol).entries
        dth[l] = (tp - tm) / (2 * h)
    # S[i,j,k] = theta^il d_l theta^jk
    S = np.einsum("il,ljk->ijk", th0, dth)
    cyc = S + np.transpose(S, (1, 2, 0)) + np.transpose(S, (2, 0, 1))
    return float(np.abs(cyc).max())
