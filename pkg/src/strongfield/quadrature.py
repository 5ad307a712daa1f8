"""Globally adaptive 15-point Gauss-Kronrod quadrature.

Two entry points:

``integrate``
    General callables on finite or semi-infinite intervals. Pure numpy.
``integrate_moment``
    The radial moments ``int x**s exp(-lin*x) (1+x)**(-pw) dx`` that build
    every Fock weight. This is the hot path; it runs as a numba kernel unless
    ``STRONGFIELD_NUMBA=0``, in which case a vectorized numpy loop with the
    same refinement order is used.

Semi-infinite ranges are mapped to ``[0, 1)`` through ``x = t / (1 - t)``;
weak power-law tails get a further ``1 - t = (1 - w)**m`` (see
:func:`_tail_power`).
The error estimate of a panel is ``|K15 - G7|``. The panel with the largest
estimate is bisected until the summed estimate drops below
``max(abstol, reltol * |I|)``.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit
from .errors import QuadratureError

# Kronrod abscissae on [0, 1]; the odd-indexed ones are the Gauss points.
XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

# Full 15-node rule on [-1, 1].
NODES = np.concatenate([-XGK[:-1], XGK[::-1]])
KRONROD_W = np.concatenate([WGK[:-1], WGK[::-1]])
_gauss_full = np.zeros(15)
_gauss_full[[1, 3, 5]] = WG[:3]
_gauss_full[7] = WG[3]
_gauss_full[[9, 11, 13]] = WG[2::-1]
GAUSS_W = _gauss_full

DEFAULT_ABSTOL = 1e-13
DEFAULT_RELTOL = 1e-10
DEFAULT_MAXDEPTH = 60
MAX_PANELS = 20_000

_STATUS_MESSAGES = {
    1: "panel depth limit reached",
    2: "panel budget exhausted",
}


def gk15_panel(f, a, b):
    """Kronrod estimate and |K15 - G7| on one panel for a vectorized ``f``."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    y = f(mid + half * NODES)
    k = half * float(KRONROD_W @ y)
    g = half * float(GAUSS_W @ y)
    return k, abs(k - g)


def integrate(f, a, b=math.inf, abstol=DEFAULT_ABSTOL, reltol=DEFAULT_RELTOL,
              maxdepth=DEFAULT_MAXDEPTH):
    """Integrate a vectorized callable over ``[a, b]``; ``b`` may be ``inf``.

    Returns ``(value, error_estimate)``. Raises :class:`QuadratureError` when
    a panel would exceed ``maxdepth`` bisections.
    """
    if b == math.inf:
        def g(t):
            one_minus = 1.0 - t
            return f(a + t / one_minus) / (one_minus * one_minus)
        lo, hi = 0.0, 1.0
    else:
        g, lo, hi = f, a, b

    val, err = gk15_panel(g, lo, hi)
    panels = [(lo, hi, val, err, 0)]
    while True:
        total = sum(p[2] for p in panels)
        total_err = sum(p[3] for p in panels)
        if total_err <= max(abstol, reltol * abs(total)):
            return total, total_err
        worst = max(range(len(panels)), key=lambda i: panels[i][3])
        pa, pb, _, _, depth = panels.pop(worst)
        if depth >= maxdepth:
            raise QuadratureError(
                f"adaptive quadrature did not converge within depth {maxdepth}: "
                f"value {total!r}, error estimate {total_err!r}"
            )
        if len(panels) >= MAX_PANELS:
            raise QuadratureError("adaptive quadrature exhausted its panel budget")
        pm = 0.5 * (pa + pb)
        for qa, qb in ((pa, pm), (pm, pb)):
            v, e = gk15_panel(g, qa, qb)
            panels.append((qa, qb, v, e, depth + 1))


# ----------------------------------------------------------------------------
# Radial moment kernel

@njit
def _moment_integrand_scalar(w, s, lin, pw, mapped):
    # mapped = m > 0: t = 1 - (1-w)**m, then x = t / (1-t)
    if mapped:
        v = 1.0 - w
        if v <= 0.0:
            # w rounds to 1 on tiny panels; a single point carries no weight
            return 0.0
        one_minus = v ** mapped
        x = -math.expm1(mapped * math.log1p(-w)) / one_minus
        jac = mapped * v ** (mapped - 1) / (one_minus * one_minus)
    else:
        x = w
        jac = 1.0
    if x <= 0.0:
        return jac if s == 0.0 else 0.0
    return jac * math.exp(s * math.log(x) - lin * x - pw * math.log1p(x))


@njit
def _moment_panel(a, b, s, lin, pw, mapped, nodes, wk, wg):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    k = 0.0
    g = 0.0
    for i in range(15):
        y = _moment_integrand_scalar(mid + half * nodes[i], s, lin, pw, mapped)
        k += wk[i] * y
        g += wg[i] * y
    return half * k, abs(half * (k - g))


@njit
def _moment_adaptive_numba(s, lin, pw, upper, abstol, reltol, maxdepth, mapped, nodes, wk, wg):
    hi = 1.0 if mapped else upper
    cap = 4096
    pa = np.empty(cap)
    pb = np.empty(cap)
    pv = np.empty(cap)
    pe = np.empty(cap)
    pd = np.empty(cap, dtype=np.int64)
    v, e = _moment_panel(0.0, hi, s, lin, pw, mapped, nodes, wk, wg)
    pa[0] = 0.0
    pb[0] = hi
    pv[0] = v
    pe[0] = e
    pd[0] = 0
    count = 1
    while True:
        total = 0.0
        total_err = 0.0
        worst = 0
        for i in range(count):
            total += pv[i]
            total_err += pe[i]
            if pe[i] > pe[worst]:
                worst = i
        if total_err <= max(abstol, reltol * abs(total)):
            return total, total_err, 0
        if pd[worst] >= maxdepth:
            return total, total_err, 1
        if count >= cap:
            return total, total_err, 2
        a0 = pa[worst]
        b0 = pb[worst]
        m0 = 0.5 * (a0 + b0)
        d0 = pd[worst] + 1
        v1, e1 = _moment_panel(a0, m0, s, lin, pw, mapped, nodes, wk, wg)
        v2, e2 = _moment_panel(m0, b0, s, lin, pw, mapped, nodes, wk, wg)
        pb[worst] = m0
        pv[worst] = v1
        pe[worst] = e1
        pd[worst] = d0
        pa[count] = m0
        pb[count] = b0
        pv[count] = v2
        pe[count] = e2
        pd[count] = d0
        count += 1


def _moment_integrand_numpy(t, s, lin, pw, mapped):
    if mapped:
        v = 1.0 - t
        inside = v > 0.0
        v = np.where(inside, v, 1.0)
        one_minus = v ** mapped
        x = np.where(inside, -np.expm1(mapped * np.log(v)) / one_minus, 0.0)
        jac = np.where(inside, mapped * v ** (mapped - 1) / (one_minus * one_minus), 0.0)
    else:
        x = t
        jac = np.ones_like(t)
    out = np.zeros_like(t)
    pos = x > 0
    xp = x[pos]
    out[pos] = jac[pos] * np.exp(s * np.log(xp) - lin * xp - pw * np.log1p(xp))
    if s == 0.0:
        out[~pos] = jac[~pos]
    return out


def _moment_adaptive_numpy(s, lin, pw, upper, abstol, reltol, maxdepth, mapped):
    hi = 1.0 if mapped else upper
    cap = 4096
    pa = np.empty(cap)
    pb = np.empty(cap)
    pv = np.empty(cap)
    pe = np.empty(cap)
    pd = np.empty(cap, dtype=np.int64)

    def panels(a, b):
        # evaluates a batch of panels in one call
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        t = mid[:, None] + half[:, None] * NODES[None, :]
        y = _moment_integrand_numpy(t.ravel(), s, lin, pw, mapped).reshape(t.shape)
        k = half * (y @ KRONROD_W)
        g = half * (y @ GAUSS_W)
        return k, np.abs(k - g)

    v, e = panels(np.array([0.0]), np.array([hi]))
    pa[0], pb[0], pv[0], pe[0], pd[0] = 0.0, hi, v[0], e[0], 0
    count = 1
    while True:
        total = pv[:count].sum()
        total_err = pe[:count].sum()
        if total_err <= max(abstol, reltol * abs(total)):
            return total, total_err, 0
        worst = int(np.argmax(pe[:count]))
        if pd[worst] >= maxdepth:
            return total, total_err, 1
        if count >= cap:
            return total, total_err, 2
        a0, b0 = pa[worst], pb[worst]
        m0 = 0.5 * (a0 + b0)
        v, e = panels(np.array([a0, m0]), np.array([m0, b0]))
        d0 = pd[worst] + 1
        pb[worst], pv[worst], pe[worst], pd[worst] = m0, v[0], e[0], d0
        pa[count], pb[count], pv[count], pe[count], pd[count] = m0, b0, v[1], e[1], d0
        count += 1


def _tail_power(s, lin, pw, upper):
    """Exponent ``m`` of the endpoint substitution; 0 for finite intervals.

    Under ``x = t/(1-t)`` a pure power tail ``x**(s-pw)`` becomes
    ``(1-t)**(beta-1)`` with ``beta = pw - s - 1``, singular for ``beta < 1``.
    Writing ``1 - t = (1-w)**m`` with ``m = ceil(1/beta)`` leaves
    ``(1-w)**(m beta - 1)``, which is bounded.
    """
    if upper != math.inf:
        return 0
    if lin > 0:
        return 1
    beta = pw - s - 1.0
    if beta <= 0:
        return 1  # divergent; the refinement budget runs out and reports it
    return max(1, min(64, math.ceil(1.0 / beta - 1e-12)))


def integrate_moment(s, lin=0.0, pw=0.0, upper=math.inf, abstol=DEFAULT_ABSTOL,
                     reltol=DEFAULT_RELTOL, maxdepth=DEFAULT_MAXDEPTH, use_numba=None):
    """``int_0^upper x**s * exp(-lin*x) * (1+x)**(-pw) dx``.

    Convergence must be checked by the caller; a divergent tail surfaces here
    only as a :class:`QuadratureError`.

    Returns ``(value, error_estimate)``.
    """
    if use_numba is None:
        use_numba = USE_NUMBA
    args = (float(s), float(lin), float(pw), float(upper), float(abstol), float(reltol),
            int(maxdepth), _tail_power(s, lin, pw, upper))
    if use_numba:
        val, err, status = _moment_adaptive_numba(*args, NODES, KRONROD_W, GAUSS_W)
    else:
        val, err, status = _moment_adaptive_numpy(*args)
    if status:
        raise QuadratureError(
            f"moment s={s} did not converge ({_STATUS_MESSAGES[status]}): "
            f"value {val!r}, error estimate {err!r}"
        )
    return float(val), float(err)
