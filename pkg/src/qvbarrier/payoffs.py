"""European-style image payoffs replicating barrier claims.

Knock-out claims are replicated by reflected ("image") payoffs that have
zero value whenever the log price sits at the barrier; knock-in and rebate
claims by exponential payoffs built from the characteristic roots.  All
constructors return plain functions of the terminal pair (x, v) =
(log price, quadratic variation).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .charfun import Branch, root_u, root_u_dual, root_v
from .dual import Dual2
from .errors import NonfiniteTerm
from .quadrature import adaptive_quad_vec

__all__ = [
    "PayoffFn", "BarrierSpec", "QuadratureSpec", "Side",
    "powerexp_payoff", "sbko_image", "sbko_image_upper", "dbko_image",
    "dbko_image_term", "ski_psi", "ski_psi_derivs", "ski_psi_payoff",
    "rebate_psi", "frac_ki_payoff", "ratio_ki_payoff", "ratio_dpsi_dp",
    "frac_ki_payoff_fn", "ratio_ki_payoff_fn",
]


@dataclass(frozen=True)
class PayoffFn:
    """Terminal payoff g(x, v) with evaluation metadata.

    eval is vectorized over x (1-D array) with v scalar or broadcastable;
    breakpoints lists the x values where the payoff is non-smooth, so that
    quadratures can split panels there.  v_independent marks payoffs of x
    alone, letting mixture pricing collapse to one density integral.
    """

    eval: Callable
    description: str = ""
    support_hint: Optional[tuple] = None
    breakpoints: tuple = ()
    v_independent: bool = False

    def __call__(self, x, v):
        return self.eval(np.asarray(x, dtype=float), v)


@dataclass(frozen=True)
class BarrierSpec:
    """Barrier levels on the log scale, validated against the start point."""

    x0: float
    lower: Optional[float] = None
    upper: Optional[float] = None

    def __post_init__(self):
        if self.lower is None and self.upper is None:
            raise ValueError("at least one barrier level is required")
        if self.lower is not None and not self.lower < self.x0:
            raise ValueError("lower barrier must lie below the start point")
        if self.upper is not None and not self.upper > self.x0:
            raise ValueError("upper barrier must lie above the start point")


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_panels: int = 4096


class Side:
    LOWER = "lower"
    UPPER = "upper"


def powerexp_payoff(j: int, k: int, p: complex, s: complex) -> PayoffFn:
    """phi(x, v) = x^j v^k exp(i p x + i s v)."""

    def _eval(x, v):
        x = np.asarray(x, dtype=float)
        return (x ** j) * (np.asarray(v) ** k) * np.exp(1j * p * x + 1j * s * np.asarray(v))

    return PayoffFn(_eval, description=f"powerexp(j={j},k={k},p={p},s={s})")


# ----------------------------------------------------------------------
# knock-out reflections
# ----------------------------------------------------------------------

def sbko_image(phi: PayoffFn, L: float) -> PayoffFn:
    """Lower-barrier knock-out image: keeps phi above L, subtracts the
    exponentially tilted reflection below L.  Vanishes at x = L."""

    def _eval(x, v):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        above = x > L
        below = x < L
        if np.any(above):
            out[above] = np.asarray(phi.eval(x[above], v), dtype=complex)
        if np.any(below):
            xb = x[below]
            out[below] = -np.exp(xb - L) * np.asarray(phi.eval(2.0 * L - xb, v), dtype=complex)
        return out

    return PayoffFn(_eval, description=f"sbko_image(L={L})",
                    breakpoints=(L,) + tuple(phi.breakpoints))


def sbko_image_upper(phi: PayoffFn, U: float) -> PayoffFn:
    """Upper-barrier mirror of sbko_image."""

    def _eval(x, v):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        below = x < U
        above = x > U
        if np.any(below):
            out[below] = np.asarray(phi.eval(x[below], v), dtype=complex)
        if np.any(above):
            xa = x[above]
            out[above] = -np.exp(xa - U) * np.asarray(phi.eval(2.0 * U - xa, v), dtype=complex)
        return out

    return PayoffFn(_eval, description=f"sbko_image_upper(U={U})",
                    breakpoints=(U,) + tuple(phi.breakpoints))


def dbko_image(phi: PayoffFn, L: float, U: float, q: int = 5) -> PayoffFn:
    """Double-barrier knock-out image series, truncated at |n| <= q.

    Each image n carries weight e^{-n delta}; the direct term restricts phi
    to (L, U), the reflected term tilts by e^{x-L}.  Terms decay like
    e^{-|n| delta} on bounded evaluation windows.
    """
    if not L < U:
        raise ValueError("need L < U")
    delta = U - L

    def _restricted(y, v):
        y = np.asarray(y)
        inside = (y > L) & (y < U)
        out = np.zeros(y.shape, dtype=complex)
        if np.any(inside):
            out[inside] = np.asarray(phi.eval(y[inside], v), dtype=complex)
        return out

    def _eval(x, v):
        x = np.asarray(x, dtype=float)
        total = np.zeros(x.shape, dtype=complex)
        for n in range(-q, q + 1):
            shift = 2.0 * n * delta
            direct = _restricted(shift + x, v)
            refl = _restricted(shift + 2.0 * L - x, v)
            tilt = np.where(refl != 0, np.exp(np.minimum(x - L, 700.0)), 0.0)
            term = math.exp(-n * delta) * (direct - tilt * refl)
            if not np.all(np.isfinite(term)):
                raise NonfiniteTerm(f"image term n={n} is non-finite")
            total += term
        return total

    breaks = []
    for n in range(-q, q + 1):
        shift = 2.0 * n * delta
        breaks += [L - shift, U - shift, shift + 2.0 * L - U, shift + L]
    return PayoffFn(_eval, description=f"dbko_image(L={L},U={U},q={q})",
                    breakpoints=tuple(sorted(set(breaks))))


def dbko_image_term(phi: PayoffFn, L: float, U: float, n: int) -> PayoffFn:
    """Single image term (index n) of the double-barrier series, for
    truncation diagnostics and the tail-bound check."""
    delta = U - L

    def _restricted(y, v):
        y = np.asarray(y)
        inside = (y > L) & (y < U)
        out = np.zeros(y.shape, dtype=complex)
        if np.any(inside):
            out[inside] = np.asarray(phi.eval(y[inside], v), dtype=complex)
        return out

    def _eval(x, v):
        x = np.asarray(x, dtype=float)
        shift = 2.0 * n * delta
        direct = _restricted(shift + x, v)
        refl = _restricted(shift + 2.0 * L - x, v)
        tilt = np.where(refl != 0, np.exp(np.minimum(x - L, 700.0)), 0.0)
        return math.exp(-n * delta) * (direct - tilt * refl)

    return PayoffFn(_eval, description=f"dbko_image_term(n={n})")


# ----------------------------------------------------------------------
# knock-in psi payoffs
# ----------------------------------------------------------------------

def ski_psi(x, H: float, omega: complex, s: complex, side: str = Side.LOWER,
            branch: Branch = Branch.PLUS):
    """Knock-in exponential payoff.

    Lower side: 1{x<H} e^{(1-iu)(x-H)} + 1{x<=H} e^{iu(x-H)};
    upper side mirrors with 1{x>H}, 1{x>=H}.  Vanishes on the un-knocked
    side of the barrier.
    """
    u = root_u(omega, s, branch).value
    x = np.asarray(x, dtype=float)
    d = x - H
    if side == Side.LOWER:
        ind1, ind2 = d < 0, d <= 0
    elif side == Side.UPPER:
        ind1, ind2 = d > 0, d >= 0
    else:
        raise ValueError(f"unknown side {side!r}")
    out = np.zeros(x.shape, dtype=complex)
    if np.any(ind1):
        out[ind1] += np.exp((1.0 - 1j * u) * d[ind1])
    if np.any(ind2):
        out[ind2] += np.exp(1j * u * d[ind2])
    return out


def ski_psi_derivs(n: int, m: int, x, H: float, omega: complex, s: complex,
                   side: str = Side.LOWER, branch: Branch = Branch.PLUS):
    """(-i d/domega)^n (-i d/ds)^m of ski_psi, n + m <= 2."""
    x = np.asarray(x, dtype=float)
    d = x - H
    if side == Side.LOWER:
        ind1, ind2 = d < 0, d <= 0
    else:
        ind1, ind2 = d > 0, d >= 0
    u = root_u_dual(Dual2.var_a(complex(omega)), Dual2.var_b(complex(s)), branch)
    # zero the exponent outside each indicator so masked points cannot overflow
    d1 = Dual2.const(np.where(ind1, d, 0.0))
    d2 = Dual2.const(np.where(ind2, d, 0.0))
    psi = (Dual2.const(np.where(ind1, 1.0, 0.0)) * ((1.0 - 1j * u) * d1).exp()
           + Dual2.const(np.where(ind2, 1.0, 0.0)) * (1j * u * d2).exp())
    return psi.op_partial(n, m)


def ski_psi_payoff(n: int, m: int, H: float, omega: complex, s: complex,
                   side: str = Side.LOWER, branch: Branch = Branch.PLUS) -> PayoffFn:
    """European payoff replicating the knock-in power-exponential claim."""

    def _eval(x, v):
        return ski_psi_derivs(n, m, x, H, omega, s, side, branch)

    return PayoffFn(_eval, description=f"ski_psi(n={n},m={m},H={H})",
                    breakpoints=(H,))


# ----------------------------------------------------------------------
# rebate payoff
# ----------------------------------------------------------------------

def rebate_psi(x, qv, H: float, s: complex, branch: Branch = Branch.PLUS):
    """Rebate replication payoff exp(i v(s) (x - H) + i s qv)."""
    vr = root_v(s, branch).value
    x = np.asarray(x, dtype=float)
    return np.exp(1j * vr * (x - H) + 1j * s * np.asarray(qv))


# ----------------------------------------------------------------------
# fractional-power QV knock-in payoff
# ----------------------------------------------------------------------

def _w_of_z(z):
    """w(z) = 1/2 - sqrt(1/4 - 2z), cancellation-free for small real z >= 0."""
    z = np.asarray(z, dtype=float)
    w = np.empty(z.shape, dtype=complex)
    lo = z <= 0.125
    if np.any(lo):
        rt = np.sqrt(1.0 - 8.0 * z[lo])
        w[lo] = 4.0 * z[lo] / (1.0 + rt)
    hi = ~lo
    if np.any(hi):
        w[hi] = 0.5 - 1j * np.sqrt(2.0 * z[hi] - 0.25)
    return w


def _frac_integrand(z, delta):
    """z^{-(r+1)}-free part: psi(x;0,0) - psi(x;0,iz) for x - L = delta < 0."""
    w = _w_of_z(z)
    wd = w * delta
    out = np.empty(np.shape(z), dtype=complex)
    small = np.asarray(z) <= 0.125
    if np.any(small):
        wr = wd[small].real
        out[small] = -math.exp(delta) * np.expm1(-wr) - np.expm1(wr)
    big = ~small
    if np.any(big):
        out[big] = (-math.exp(delta) * (np.exp(-wd[big]) - 1.0)
                    - (np.exp(wd[big]) - 1.0))
    return out.real


def _rotated_cos_tail(Y: float, c: float, r: float, quad: QuadratureSpec) -> float:
    """int_Y^inf phi(y) cos(c y) dy with phi(y) = y ((y^2+1/4)/2)^(-(r+1)).

    Computed on the upward-rotated ray y = Y + i t, where the oscillation
    becomes e^{-c t} damping; the integrand also decays algebraically, so the
    truncation point only needs min(40/c, cap).
    """
    t_max = min(40.0 / max(c, 1e-12), 1e8)

    def _f(t):
        y = Y + 1j * t
        phi = y * np.exp(-(r + 1.0) * np.log(0.5 * (y * y + 0.25)))
        return phi * np.exp(-c * t)

    val, _ = adaptive_quad_vec(_f, 0.0, t_max, rel_tol=quad.rel_tol,
                               abs_tol=quad.abs_tol,
                               breakpoints=[min(1.0, t_max / 2), min(Y, t_max / 2)],
                               max_panels=quad.max_panels)
    full = 1j * np.exp(1j * c * Y) * val
    return float(np.real(full))


def frac_ki_payoff(x: float, L: float, r: float,
                   quad: QuadratureSpec = QuadratureSpec()) -> float:
    """European payoff pricing the knock-in fractional QV claim (power r).

    Returns g(x) = r/Gamma(1-r) * int_0^inf dz z^{-(r+1)}
    (psi(x;0,0) - psi(x;0,iz)); zero for x >= L.  The z-integral is split at
    a point Z beyond which the integrand is A - 2B cos(c y(z)): the constant
    part integrates in closed form and the cosine part on a rotated contour.
    """
    if not 0.0 < r < 1.0:
        raise ValueError("need 0 < r < 1")
    delta = float(x) - L
    if delta >= 0.0:
        return 0.0
    c = -delta

    # main region [0, Z]; substitution z = t^(1/(1-r)) removes the z->0 edge
    Z = float(np.clip(0.5 * (40.0 / c) ** 2, 200.0, 1e12))
    one_m_r = 1.0 - r
    t_hi = Z ** one_m_r
    t_break = 0.125 ** one_m_r

    def _f(t):
        z = t ** (1.0 / one_m_r)
        return (1.0 / one_m_r) * t ** (-1.0 / one_m_r) * _frac_integrand(z, delta)

    breaks = [t_break] + [t_break * (2.0 ** j) for j in range(1, 40)
                          if t_break * 2.0 ** j < t_hi]
    main, _ = adaptive_quad_vec(_f, 0.0, t_hi, rel_tol=quad.rel_tol,
                                abs_tol=quad.abs_tol, breakpoints=breaks,
                                max_panels=quad.max_panels)
    # tail z > Z: integrand = A - 2 B cos(c y(z)), A = 1 + e^delta, B = e^(delta/2)
    A = 1.0 + math.exp(delta)
    B = math.exp(0.5 * delta)
    Y = math.sqrt(2.0 * Z - 0.25)
    tail = A * Z ** (-r) / r - 2.0 * B * _rotated_cos_tail(Y, c, r, quad)
    return r / math.gamma(1.0 - r) * (float(np.real(main)) + tail)


# ----------------------------------------------------------------------
# ratio (Sharpe-style) knock-in payoff
# ----------------------------------------------------------------------

def ratio_dpsi_dp(x, L: float, p: complex, w, branch: Branch = Branch.PLUS):
    """(-i d/dp) psi(x; p, i w) in closed form.

    Equals (-1{x<L} e^{(1-iu)(x-L)} + 1{x<=L} e^{iu(x-L)}) du/dp (x-L) with
    du/dp = +-(1 - 2ip)/sqrt(1 - 4p(p+i) - 8w).
    """
    x = np.asarray(x, dtype=float)
    d = x - L
    w = np.asarray(w, dtype=complex)
    disc = 0.25 - p * p - 1j * p - 2.0 * w
    u = 1j * (-0.5 + branch.value * np.sqrt(disc))
    dpu = branch.value * (1.0 - 2j * p) / np.sqrt(1.0 - 4.0 * p * (p + 1j) - 8.0 * w)
    ind1 = np.where(d < 0, 1.0, 0.0)
    ind2 = np.where(d <= 0, 1.0, 0.0)
    core = (-ind1 * np.exp((1.0 - 1j * u) * d) + ind2 * np.exp(1j * u * d))
    return core * dpu * d


def ratio_ki_payoff(x: float, L: float, r: float, eps: float, p: complex = 0.0,
                    quad: QuadratureSpec = QuadratureSpec(),
                    branch: Branch = Branch.PLUS) -> complex:
    """European payoff pricing the knock-in ratio claim
    (X-increment) e^{i p (X-increment)} / (QV-increment + eps)^r.

    Integrates (1/Gamma(r)) w^{r-1} e^{-w eps} (-i d/dp) psi(x; p, i w) over
    w in (0, inf); the integrable 1/sqrt singularity at w* =
    (1 - 4p(p+i))/8 is removed by a square-root substitution around it.
    """
    if r <= 0 or eps <= 0:
        raise ValueError("need r > 0 and eps > 0")
    delta = float(x) - L
    if delta > 0.0:
        return 0.0 + 0.0j
    W = min(45.0 / eps, 1e9)
    gamma_r = math.gamma(r)

    def _f(w):
        w = np.asarray(w, dtype=float)
        return (w ** (r - 1.0)) * np.exp(-w * eps) * ratio_dpsi_dp(x, L, p, w, branch)

    wstar = (1.0 - 4.0 * p * (p + 1j)) / 8.0
    total = 0.0 + 0.0j
    if abs(complex(wstar).imag) < 1e-12 and complex(wstar).real > 1e-10:
        ws = complex(wstar).real
        # left of the singularity: w = ws - xi^2
        def _left(xi):
            return _f(ws - xi * xi) * 2.0 * xi

        # right: w = ws + xi^2
        def _right(xi):
            return _f(ws + xi * xi) * 2.0 * xi

        v1, _ = adaptive_quad_vec(_left, 0.0, math.sqrt(ws), rel_tol=quad.rel_tol,
                                  abs_tol=quad.abs_tol, max_panels=quad.max_panels)
        v2, _ = adaptive_quad_vec(_right, 0.0, math.sqrt(max(W - ws, 1e-30)),
                                  rel_tol=quad.rel_tol, abs_tol=quad.abs_tol,
                                  breakpoints=[1.0] if W - ws > 1.0 else (),
                                  max_panels=quad.max_panels)
        total = v1 + v2
    else:
        brk = [b for b in (0.125, 1.0, 10.0) if 0.0 < b < W]
        total, _ = adaptive_quad_vec(_f, 0.0, W, rel_tol=quad.rel_tol,
                                     abs_tol=quad.abs_tol, breakpoints=brk,
                                     max_panels=quad.max_panels)
    return complex(total) / gamma_r


def frac_ki_payoff_fn(L: float, r: float,
                      quad: QuadratureSpec = QuadratureSpec()) -> PayoffFn:
    def _eval(x, v):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([frac_ki_payoff(float(xi), L, r, quad) for xi in x],
                        dtype=complex)

    return PayoffFn(_eval, description=f"frac_ki(L={L},r={r})", breakpoints=(L,),
                    support_hint=(-np.inf, L), v_independent=True)


def ratio_ki_payoff_fn(L: float, r: float, eps: float, p: complex = 0.0,
                       quad: QuadratureSpec = QuadratureSpec()) -> PayoffFn:
    def _eval(x, v):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return np.array([ratio_ki_payoff(float(xi), L, r, eps, p, quad) for xi in x],
                        dtype=complex)

    return PayoffFn(_eval, description=f"ratio_ki(L={L},r={r},eps={eps})",
                    breakpoints=(L,), support_hint=(-np.inf, L), v_independent=True)
