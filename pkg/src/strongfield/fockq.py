"""Weighted Fock spaces for radially symmetric Kahler potentials.

With ``x = a abar`` the monomials ``a**n`` are orthogonal and

    <a**n, a**m> = pi delta_nm c_n,   c_n = int_0^inf x**n w(x) dx,

where ``w = exp(-2 phi / hbar)``. The presets are

* ``plane``    ``w = exp(-x/hbar)``                    ``c_n = n! hbar**(n+1)``
* ``disc``     the same weight cut off at ``x = r0**2`` ``c_n = hbar**(n+1) gamma(n+1, r0**2/hbar)``
* ``monopole`` ``w = (1+x)**-M``, ``M = N/hbar``        ``c_n = B(n+1, M-n-1)``, finite for ``n < M-1``

Operators are matrices on ``span{phi_0, ..., phi_K}``. Anything the raising
operator would push past ``phi_K`` is dropped, so identities are only
asserted on indices the truncation cannot reach.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import specfun
from .errors import CrossCheckError, DivergentIntegralError, NoLambdaFoundError
from .quadrature import DEFAULT_ABSTOL, DEFAULT_MAXDEPTH, DEFAULT_RELTOL, integrate_moment

KINDS = ("plane", "disc", "monopole")
DEFAULT_K = 32


@dataclass(frozen=True)
class KahlerWeight:
    kind: str
    hbar: float = 1.0
    r0: float | None = None
    M: float | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight {self.kind!r}; choose from {', '.join(KINDS)}")
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar}")
        if self.kind == "disc" and not (self.r0 is not None and self.r0 > 0):
            raise ValueError("disc weight needs r0 > 0")
        if self.kind == "monopole":
            # M > 1 keeps c_0 finite; smaller spaces are rejected where they are used
            if self.M is None or not self.M > 1:
                raise ValueError("monopole weight needs M > 1 (no normalizable state otherwise)")

    @classmethod
    def plane(cls, hbar=1.0):
        return cls("plane", hbar)

    @classmethod
    def disc(cls, r0, hbar=1.0):
        return cls("disc", hbar, r0=r0)

    @classmethod
    def monopole(cls, M, hbar=1.0):
        return cls("monopole", hbar, M=M)

    def moment_params(self, k=0):
        """``(lin, pw, upper)`` for ``int x**s exp(-lin x) (1+x)**-(pw) dx``."""
        if self.kind == "monopole":
            return 0.0, self.M + k, math.inf
        upper = self.r0 ** 2 if self.kind == "disc" else math.inf
        return 1.0 / self.hbar, float(k), upper

    def converges(self, s, k=0) -> bool:
        if s <= -1:
            return False
        if self.kind == "monopole":
            return s < self.M + k - 1
        return True

    @property
    def k_max(self):
        """Largest index with a finite ``c_n``; ``None`` when unbounded."""
        if self.kind != "monopole":
            return None
        return math.ceil(self.M) - 2

    def to_dict(self) -> dict:
        out = {"kind": self.kind, "hbar": self.hbar}
        if self.r0 is not None:
            out["r0"] = self.r0
        if self.M is not None:
            out["M"] = self.M
        return out


def _require_convergent(weight, s, k=0):
    if not weight.converges(s, k):
        raise DivergentIntegralError(
            f"moment of order {s} diverges for the {weight.kind} weight"
            + (f" with M={weight.M}" if weight.M is not None else "")
            + (f" and extra (1+x)^-{k}" if k else ""))


def cn_quadrature(weight: KahlerWeight, n, k=0, abstol=DEFAULT_ABSTOL, reltol=DEFAULT_RELTOL,
                  maxdepth=DEFAULT_MAXDEPTH) -> float:
    """``int x**n w(x) (1+x)**-k dx`` by adaptive Gauss-Kronrod.

    ``n`` may be any real ``> -1``. Divergence is decided from the tail
    exponent before integrating.
    """
    _require_convergent(weight, n, k)
    lin, pw, upper = weight.moment_params(k)
    value, _ = integrate_moment(n, lin, pw, upper, abstol, reltol, maxdepth)
    return value


def cn_closed_form(weight: KahlerWeight, n) -> float:
    _require_convergent(weight, n)
    h = weight.hbar
    if weight.kind == "plane":
        if n + 1 < 171:
            # Gamma is exact on small integers, exp(lgamma) is not
            return specfun.gamma(n + 1) * h ** (n + 1)
        return math.exp(specfun.log_gamma(n + 1) + (n + 1) * math.log(h))
    if weight.kind == "disc":
        return h ** (n + 1) * specfun.lower_incomplete_gamma(n + 1, weight.r0 ** 2 / h)
    return specfun.beta(n + 1, weight.M - n - 1)


def moment_closed_form(weight: KahlerWeight, s, k=0):
    """Closed form of the generalized moment, or ``None`` if there is none."""
    if k == 0:
        return cn_closed_form(weight, s)
    if weight.kind == "monopole":
        _require_convergent(weight, s, k)
        return specfun.beta(s + 1, weight.M + k - s - 1)
    return None


@dataclass
class WeightedFockSpace:
    weight: KahlerWeight
    K: int
    c: np.ndarray
    methods: tuple
    quadrature: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.K + 1

    def c_next(self):
        """``c_{K+1}`` if it is finite, else ``None``."""
        if not self.weight.converges(self.K + 1):
            return None
        return cn_closed_form(self.weight, self.K + 1)

    def table_rows(self):
        """Rows ``(n, c_n, method, commutator entry or None)``."""
        comm = commutator_diagonal(self, include_last=True)
        rows = []
        for n in range(self.dim):
            entry = float(comm[n]) if n < len(comm) else None
            rows.append((n, float(self.c[n]), self.methods[n], entry))
        return rows


def build_space(weight: KahlerWeight, K=None, rtol=1e-8, check=True, perturb=0.0
                ) -> WeightedFockSpace:
    """Fill ``c_0..c_K`` from closed forms, cross-checked against quadrature.

    ``perturb`` scales ``c_n`` by ``1 + perturb * (-1)**n`` after the
    cross-check; it exists only to test that downstream checks notice.
    """
    kmax = weight.k_max
    if K is None:
        K = DEFAULT_K if kmax is None else kmax
    K = int(K)
    if K < 0:
        if kmax is not None:
            raise DivergentIntegralError(f"no normalizable state for M={weight.M}")
        raise ValueError("K must be nonnegative")
    if kmax is not None and K > kmax:
        raise DivergentIntegralError(
            f"K={K} exceeds the largest convergent index {kmax} for M={weight.M}")
    c = np.array([cn_closed_form(weight, n) for n in range(K + 1)])
    quad = None
    if check:
        quad = np.array([cn_quadrature(weight, n) for n in range(K + 1)])
        rel = np.abs(quad - c) / np.abs(c)
        bad = np.flatnonzero(rel > rtol)
        if bad.size:
            lines = [f"n={n}: closed form {c[n]!r}, quadrature {quad[n]!r}" for n in bad]
            raise CrossCheckError("c_n cross-check failed:\n" + "\n".join(lines))
    if np.any(~np.isfinite(c)) or np.any(c <= 0):
        raise CrossCheckError("c_n must be finite and positive")
    if perturb:
        c = c * (1.0 + perturb * (-1.0) ** np.arange(K + 1))
    return WeightedFockSpace(weight, K, c, ("closed_form",) * (K + 1), quad)


# ----------------------------------------------------------------------------
# operators

@dataclass(frozen=True)
class OperatorMatrix:
    label: str
    matrix: np.ndarray

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def to_dict(self) -> dict:
        m = np.asarray(self.matrix, dtype=complex)
        return {"label": self.label, "dim": self.dim, "re": m.real.tolist(), "im": m.imag.tolist()}


def raising_matrix(space: WeightedFockSpace) -> OperatorMatrix:
    """``a phi_n = sqrt(c_{n+1}/c_n) phi_{n+1}``; the image of ``phi_K`` is dropped."""
    c = space.c
    R = np.zeros((space.dim, space.dim), dtype=complex)
    idx = np.arange(space.K)
    R[idx + 1, idx] = np.sqrt(c[1:] / c[:-1])
    return OperatorMatrix("raising", R)


def lowering_matrix(space: WeightedFockSpace) -> OperatorMatrix:
    return OperatorMatrix("lowering", raising_matrix(space).matrix.conj().T)


def commutator_diagonal(space: WeightedFockSpace, include_last=False) -> np.ndarray:
    """``[a, a^dagger]`` eigenvalues ``c_n/c_{n-1} - c_{n+1}/c_n`` from the weights.

    Entries ``n = 0..K-1``; entry ``K`` needs ``c_{K+1}`` and is appended
    only with ``include_last`` when that moment is finite.
    """
    c = space.c
    up = c[1:] / c[:-1]                    # c_{n+1}/c_n, n = 0..K-1
    down = np.concatenate([[0.0], up[:-1]]) if space.K > 0 else np.zeros(0)
    out = down - up
    if include_last and space.K >= 0:
        nxt = space.c_next()
        if nxt is not None:
            last_down = up[-1] if space.K > 0 else 0.0
            out = np.append(out, last_down - nxt / c[-1])
    return out


def commutator_matrix(space: WeightedFockSpace) -> OperatorMatrix:
    """Matrix product ``[a, a^dagger]``; its last diagonal entry is a truncation artifact."""
    R = raising_matrix(space).matrix
    return OperatorMatrix("commutator", R @ R.conj().T - R.conj().T @ R)


def toeplitz_matrix(space: WeightedFockSpace, p=0, q=0, radial_power=0, method="quadrature"
                    ) -> OperatorMatrix:
    """Matrix of multiplication by ``a**p abar**q (1 + a abar)**-radial_power``.

    The angular integral keeps only ``n + q = m + p``; the radial part is the
    moment of order ``s = n + q`` with the extra ``(1+x)**-radial_power``.
    """
    if min(p, q, radial_power) < 0:
        raise ValueError("exponents must be nonnegative")
    D = space.dim
    Q = np.zeros((D, D), dtype=complex)
    for n in range(D):
        m = n + q - p
        if not 0 <= m < D:
            continue
        s = n + q
        _require_convergent(space.weight, s, radial_power)
        if method == "quadrature":
            mom = cn_quadrature(space.weight, s, radial_power)
        elif method == "closed_form":
            mom = moment_closed_form(space.weight, s, radial_power)
            if mom is None:
                mom = cn_quadrature(space.weight, s, radial_power)
        else:
            raise ValueError(f"unknown method {method!r}")
        Q[n, m] = mom / math.sqrt(space.c[n] * space.c[m])
    label = f"toeplitz(a^{p} abar^{q} (1+a abar)^-{radial_power})"
    return OperatorMatrix(label, Q)


def sphere_coordinates(space: WeightedFockSpace, method="quadrature"):
    """Toeplitz images of x, y, z on the unit sphere through ``a = (x+iy)/(r+z)``."""
    A = toeplitz_matrix(space, 1, 0, 1, method).matrix
    Abar = toeplitz_matrix(space, 0, 1, 1, method).matrix
    R = toeplitz_matrix(space, 0, 0, 1, method).matrix
    X = A + Abar
    Y = -1j * (A - Abar)
    Z = 2 * R - np.eye(space.dim)
    return X, Y, Z


# ----------------------------------------------------------------------------
# fuzzy sphere

def _maxabs(M):
    return float(np.abs(M).max()) if M.size else 0.0


def _su2_residuals(Jp, Jm, Jz, spin):
    D = Jz.shape[0]
    cas = Jz @ Jz + 0.5 * (Jp @ Jm + Jm @ Jp)
    return {
        "jz_ladder": max(_maxabs(Jz @ Jp - Jp @ Jz - Jp), _maxabs(Jz @ Jm - Jm @ Jz + Jm)),
        "ladder_commutator": _maxabs(Jp @ Jm - Jm @ Jp - 2 * Jz),
        "casimir": _maxabs(cas - spin * (spin + 1) * np.eye(D)),
    }


@dataclass
class Su2Report:
    dimension: int
    spin: float
    lam_fit: float
    lam_nominal: float
    residuals_fit: dict
    residuals_nominal: dict
    element_error_fit: float
    ladder_ratio_nominal_error: float
    dimension_law_holds: bool
    identification_nominal: float = field(default=0.0)

    @property
    def max_residual_fit(self) -> float:
        return max(self.residuals_fit.values())

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "spin": self.spin,
            "lambda_fit": self.lam_fit,
            "lambda_nominal": self.lam_nominal,
            "residuals_fit": self.residuals_fit,
            "residuals_nominal": self.residuals_nominal,
            "element_error_fit": self.element_error_fit,
            "ladder_ratio_nominal_error": self.ladder_ratio_nominal_error,
            "dimension_law_holds": self.dimension_law_holds,
            "two_j_plus_one_vs_M": self.identification_nominal,
        }


def su2_report(space: WeightedFockSpace, fit_tol=1e-6) -> Su2Report:
    """Spin-J ladder operators ``lam a^dagger (1 + a a^dagger)^-1`` and ``lam (1 + a a^dagger)^-1 a``.

    ``J_z = diag(J - n)`` fixes the grading. The prefactor is fitted by least
    squares on ``[J+, J-] = 2 J_z`` and reported next to ``lam = M``
    together with all three su(2) residuals (max-abs entry norms).
    """
    w = space.weight
    if w.kind != "monopole":
        raise ValueError("su(2) report needs a monopole space")
    if float(w.M) != int(w.M):
        raise ValueError("su(2) report needs integer M (finite-dimensional branch)")
    D = space.dim
    if D < 2:
        raise ValueError("a single state carries no ladder")
    spin = (D - 1) / 2
    R = raising_matrix(space).matrix
    Rh = R.conj().T
    kinv = np.linalg.inv(np.eye(D) + R @ Rh)
    jp_unit = Rh @ kinv
    jm_unit = kinv @ R
    Jz = np.diag(spin - np.arange(D)).astype(complex)
    C = jp_unit @ jm_unit - jm_unit @ jp_unit
    lam2 = float(np.real(np.vdot(C, 2 * Jz)) / np.real(np.vdot(C, C)))
    if not lam2 > 0:
        raise NoLambdaFoundError("least-squares prefactor is not positive")
    lam = math.sqrt(lam2)
    res_fit = _su2_residuals(lam * jp_unit, lam * jm_unit, Jz, spin)
    if max(res_fit.values()) > fit_tol:
        raise NoLambdaFoundError(f"best prefactor {lam!r} leaves su(2) residual "
                                 f"{max(res_fit.values())!r}")
    lam_nominal = float(w.M)
    res_nominal = _su2_residuals(lam_nominal * jp_unit, lam_nominal * jm_unit, Jz, spin)

    # J+ phi_n = sqrt(J(J+1) - m(m+1)) phi_{n-1} with m = J - n
    m = spin - np.arange(D)
    expect = np.zeros((D, D))
    for n in range(1, D):
        expect[n - 1, n] = math.sqrt(spin * (spin + 1) - m[n] * (m[n] + 1))
    element_error = _maxabs(lam * jp_unit - expect)

    nominal_ratio = np.array([math.sqrt((n + 1) / (w.M - (n + 1))) for n in range(D - 1)])
    actual_ratio = np.sqrt(space.c[1:] / space.c[:-1])
    return Su2Report(
        dimension=D,
        spin=spin,
        lam_fit=lam,
        lam_nominal=lam_nominal,
        residuals_fit=res_fit,
        residuals_nominal=res_nominal,
        element_error_fit=element_error,
        ladder_ratio_nominal_error=float(np.abs(nominal_ratio - actual_ratio).max()) if D > 1 else 0.0,
        dimension_law_holds=D == int(w.M) - 1,
        identification_nominal=float(2 * spin + 1 - w.M),
    )


# ----------------------------------------------------------------------------
# classical limit

@dataclass
class SemiclassicalReport:
    kind: str
    passed: bool
    details: dict

    def to_dict(self) -> dict:
        return {"kind": self.kind, "passed": self.passed, **self.details}


def _commutator_coefficient(A, B, C):
    """Least-squares ``kappa`` in ``[A, B] = i kappa C`` and the relative residual."""
    comm = A @ B - B @ A
    kappa = float(np.real(np.vdot(1j * C, comm) / np.vdot(C, C)))
    scale = _maxabs(comm)
    resid = _maxabs(comm - 1j * kappa * C) / scale if scale else 0.0
    return kappa, resid


def _monopole_closure(M, method):
    space = build_space(KahlerWeight.monopole(M), check=False)
    X, Y, Z = sphere_coordinates(space, method)
    pairs = [(X, Y, Z), (Y, Z, X), (Z, X, Y)]
    coeffs = [_commutator_coefficient(*t) for t in pairs]
    radius_defect = _maxabs(X @ X + Y @ Y + Z @ Z - np.eye(space.dim))
    one = toeplitz_matrix(space, method=method).matrix
    const_comm = max(_maxabs(one @ T - T @ one) for T in (X, Y, Z))
    return {
        "M": M,
        "kappa": [k for k, _ in coeffs],
        "proportionality_residual": max(r for _, r in coeffs),
        "closure_deviation": radius_defect,
        "constant_commutator": const_comm,
    }


def semiclassical_check(space: WeightedFockSpace, spec=None, hbars=(1.0, 0.5, 0.1),
                        method="quadrature") -> SemiclassicalReport:
    """First-order agreement between operator commutators and Dirac brackets.

    plane
        ``[a, a^dagger] / hbar`` must equal ``-1`` for every ``hbar`` in
        ``hbars`` (deviation < 1e-12). The sign is compared with the Dirac
        bracket ``{x, y}`` of the constant-field potential.
    monopole
        The Toeplitz images X, Y, Z of the sphere coordinates must satisfy
        ``[X, Y] = i kappa Z`` cyclically, with ``kappa`` equal to
        ``hbar {x, y}_DB / z`` at the north pole. The deviation of
        ``X^2 + Y^2 + Z^2`` from the identity is the first-order correction;
        it must shrink by a factor in ``[0.3, 0.7]`` when ``M`` doubles.
    """
    from .constraints import dirac_bracket_table
    from .geometry import ChartPoint, MonopolePotential, StackPotential

    w = space.weight
    if w.kind == "plane":
        ratios = {}
        for h in hbars:
            sp = build_space(KahlerWeight.plane(h), space.K, check=False)
            ratios[h] = (commutator_diagonal(sp) / h).tolist()
        deviation = max(abs(r + 1.0) for vals in ratios.values() for r in vals)
        spec = StackPotential() if spec is None else spec
        db = dirac_bracket_table(spec, ChartPoint(np.zeros(spec.dim)))
        db_xy = db.coordinate_bracket("x", "y")
        details = {"ratios": {repr(h): v for h, v in ratios.items()},
                   "max_deviation": deviation, "dirac_xy": db_xy,
                   "sign_consistent": db_xy < 0}
        return SemiclassicalReport("plane", deviation < 1e-12 and db_xy < 0, details)

    if w.kind == "monopole":
        M = int(w.M)
        spec = MonopolePotential(M) if spec is None else spec
        db = dirac_bracket_table(spec, ChartPoint([0.0, 0.0, 1.0], "north"))
        # hbar {x, y}_DB / z at the north pole, with N = M hbar
        kappa_db = db.coordinate_bracket("x", "y") * spec.N / M
        lo = _monopole_closure(M, method)
        hi = _monopole_closure(2 * M, method)
        ratio = hi["closure_deviation"] / lo["closure_deviation"]
        kappa_err = max(abs(k - kappa_db) / abs(kappa_db) for k in lo["kappa"])
        passed = (lo["proportionality_residual"] < 1e-8 and kappa_err < 1e-8
                  and 0.3 <= ratio <= 0.7 and lo["constant_commutator"] < 1e-10)
        details = {"low": lo, "high": hi, "closure_ratio": ratio,
                   "kappa_dirac": kappa_db, "kappa_relative_error": kappa_err}
        return SemiclassicalReport("monopole", passed, details)

    raise ValueError("semiclassical check covers plane and monopole spaces")
