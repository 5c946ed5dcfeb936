"""Contour-integral pricing of barrier claims and payoff pricing under terminal laws.

The barrier formulas express each price as integrals along horizontal
contours of kernel * exp-prefactor * E e^{i u(omega,s) X_T}.  The smoothed
Heaviside kernel csch-decays in Re(omega); panel layouts refine dyadically
near the kernel peak and the whole integrand is evaluated as a second-order
jet in the frequency pair so power orders come out of one pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .charfun import Branch, discriminant_zeros, root_u_dual, root_v_dual
from .dual import Dual2
from .errors import ContourViolation, KernelPole, QuadratureFailure
from .payoffs import PayoffFn
from .quadrature import adaptive_quad_vec, dyadic_edges, panel_nodes_weights

__all__ = [
    "ContourSpec", "SmoothingSpec", "MixtureLaw", "EmpiricalLaw", "TargetGrid",
    "PriceResult", "heaviside_kernel", "price_sbko_powerexp",
    "price_dbko_powerexp", "price_rebate_powerexp", "price_powerexp_european",
    "price_european_style", "price_payoff_under_law", "law_from_qv_samples",
]

_EDGE_RATIO = 1e-10
_MAX_DOUBLINGS = 8


@dataclass(frozen=True)
class SmoothingSpec:
    """Heaviside smoothing parameter; the formulas hold in the n -> inf limit."""

    n: int = 25

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("smoothing parameter must be >= 1")


@dataclass(frozen=True)
class ContourSpec:
    """Horizontal integration contour omega = omega_r + i omega_i."""

    omega_i: float
    half_width: float
    nodes: int = 32
    rule: str = "gauss_legendre_panels"

    def __post_init__(self):
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")
        if self.nodes < 16:
            raise ValueError("need at least 16 quadrature nodes")


@dataclass(frozen=True)
class PriceResult:
    price: complex
    diagnostics: dict = field(default_factory=dict)


# ----------------------------------------------------------------------
# terminal laws
# ----------------------------------------------------------------------

class MixtureLaw:
    """X_T as a mixture of conditional Gaussians indexed by total QV.

    Component v has mean x0 - v/2 and variance v; weights sum to 1.
    """

    kind = "mixture"

    def __init__(self, x0: float, weights, qvs):
        w = np.asarray(weights, dtype=float)
        v = np.asarray(qvs, dtype=float)
        if w.shape != v.shape or w.ndim != 1:
            raise ValueError("weights and qvs must be matching 1-D arrays")
        if np.any(v < 0) or abs(w.sum() - 1.0) > 1e-10:
            raise ValueError("weights must sum to 1 and qvs be non-negative")
        self.x0 = float(x0)
        self.weights = w
        self.qvs = v

    def charfun_dual(self, u: Dual2) -> Dual2:
        """E e^{i u X_T} as a jet; node-shaped u must carry a trailing axis."""
        v = Dual2.const(self.qvs)
        expo = 1j * u * self.x0 - 0.5 * (u * u + 1j * u) * v
        comp = expo.exp()
        return Dual2(*(np.sum(np.asarray(c) * self.weights, axis=-1) for c in
                       (comp.f, comp.fa, comp.fb, comp.faa, comp.fab, comp.fbb)))

    def charfun(self, u: complex) -> complex:
        return complex(np.sum(self.weights * np.exp(
            1j * u * self.x0 - 0.5 * (u * u + 1j * u) * self.qvs)))


class EmpiricalLaw:
    """Finite sample of terminal states (x, qv).

    Contour pricing scales with nodes x samples; collapse large QV samples
    to a MixtureLaw (law_from_qv_samples) instead of pricing against tens of
    thousands of raw points.
    """

    kind = "empirical"

    def __init__(self, xs, qvs=None):
        self.xs = np.asarray(xs, dtype=float)
        self.qvs = np.zeros_like(self.xs) if qvs is None else np.asarray(qvs, dtype=float)
        if self.xs.ndim != 1 or self.xs.shape != self.qvs.shape:
            raise ValueError("samples must be matching 1-D arrays")

    def charfun_dual(self, u: Dual2) -> Dual2:
        # block over samples so node-grid x sample buffers stay bounded
        n = len(self.xs)
        n_nodes = max(int(np.asarray(u.f).size), 1)
        block = max(1, (1 << 21) // n_nodes)
        acc = None
        for i0 in range(0, n, block):
            expo = (1j * u * Dual2.const(self.xs[i0:i0 + block])).exp()
            part = Dual2(*(np.sum(np.asarray(c), axis=-1) for c in
                           (expo.f, expo.fa, expo.fb, expo.faa, expo.fab, expo.fbb)))
            acc = part if acc is None else acc + part
        return acc * (1.0 / n)

    def charfun(self, u: complex) -> complex:
        return complex(np.mean(np.exp(1j * u * self.xs)))


class TargetGrid:
    """Pseudo-law evaluating the European payoff function on a grid of x.

    Replaces E e^{i u X_T} by pointwise e^{i u x}: the contour integral then
    returns the payoff-curve values g(x) instead of a price.
    """

    kind = "targets"

    def __init__(self, xs):
        self.xs = np.atleast_1d(np.asarray(xs, dtype=float))

    def charfun_dual(self, u: Dual2) -> Dual2:
        return (1j * u * Dual2.const(self.xs)).exp()


def law_from_qv_samples(x0: float, qv_samples, bins: int = 512) -> MixtureLaw:
    """Collapse total-QV samples to an equal-weight quantile-bin mixture."""
    v = np.sort(np.asarray(qv_samples, dtype=float))
    bins = min(bins, len(v))
    groups = np.array_split(v, bins)
    qvs = np.array([g.mean() for g in groups])
    w = np.array([len(g) for g in groups], dtype=float)
    return MixtureLaw(x0, w / w.sum(), qvs)


# ----------------------------------------------------------------------
# smoothed-Heaviside kernel
# ----------------------------------------------------------------------

def _kernel_pole_distance(omega, n: int):
    """Distance from omega to the nearest csch pole 2 n i k, k integer."""
    om = np.asarray(omega, dtype=complex)
    k = np.round(om.imag / (2.0 * n))
    return np.abs(om - 2.0 * n * 1j * k)


def heaviside_kernel(omega, n: int):
    """Fourier kernel of the smoothed Heaviside: (-i/4n) csch(pi omega / 2n).

    Decays like e^{-pi |Re omega| / 2n}; poles at omega = 2 n i k.
    """
    if np.any(_kernel_pole_distance(omega, n) < 1e-10):
        raise KernelPole("kernel evaluated within 1e-10 of a csch pole")
    return (-0.25j / n) / np.sinh(np.pi * np.asarray(omega, dtype=complex) / (2.0 * n))


def _heaviside_kernel_dual(omega: Dual2, n: int) -> Dual2:
    if np.any(_kernel_pole_distance(omega.f, n) < 1e-10):
        raise KernelPole("kernel evaluated within 1e-10 of a csch pole")
    return (-0.25j / n) * ((np.pi / (2.0 * n)) * omega).sinh().reciprocal()


# ----------------------------------------------------------------------
# contour construction
# ----------------------------------------------------------------------

def _default_height(lo: float, hi: float, zeros: Sequence[complex]) -> float:
    """Contour height near the real axis, inside (lo, hi), away from zeros.

    Near-axis placement keeps |e^{i omega x}|-type factors O(1); strip
    midpoints at large n would amplify cancellation like e^{omega_i^2 v/2}.
    """
    if hi - lo <= 0.5:
        raise ContourViolation(f"strip ({lo:g},{hi:g}) too narrow")
    h = float(np.clip(-0.25, lo + 0.25, hi - 0.25))
    for z in zeros:
        if abs(h - z.imag) < 0.1:
            for cand in (z.imag + 0.25, z.imag - 0.25, z.imag + 0.45):
                if lo + 0.2 < cand < hi - 0.2 and all(abs(cand - zz.imag) >= 0.1 for zz in zeros):
                    h = cand
                    break
    return h


def _validate_height(h: float, lo: float, hi: float, zeros: Sequence[complex]):
    if not lo < h < hi:
        raise ContourViolation(f"contour height {h:g} outside admissible strip ({lo:g},{hi:g})")
    for z in zeros:
        if abs(h - z.imag) < 1e-6:
            raise ContourViolation(f"contour height {h:g} passes through a discriminant zero")


def _auto_contour(lo: float, hi: float, zeros, n: int,
                  override: Optional[ContourSpec]) -> ContourSpec:
    if override is not None:
        _validate_height(override.omega_i, lo, hi, zeros)
        return override
    h = _default_height(lo, hi, zeros)
    half_width = 40.0 * (2.0 * n / math.pi)
    return ContourSpec(omega_i=h, half_width=half_width)


def _contour_integral(f_dual, contour: ContourSpec, center: float,
                      min_w: float, max_w: float, n_out: int = 0,
                      chunk: int = 2048):
    """Integrate a Dual2-valued integrand along the contour.

    f_dual(omega_nodes) returns a jet whose components have node axis 0 and
    optionally a target axis 1.  The half-width doubles (up to 8 times) while
    the integrand magnitude at the truncation edge exceeds 1e-10 of its peak.
    """
    W = contour.half_width
    for _ in range(_MAX_DOUBLINGS + 1):
        if contour.rule == "trapezoid":
            m = max(contour.nodes, int(2 * W / min(min_w, max_w) )) | 1
            nodes = np.linspace(center - W, center + W, m)
            weights = np.full(m, nodes[1] - nodes[0])
            weights[0] *= 0.5
            weights[-1] *= 0.5
        else:
            edges = dyadic_edges(center, W, min_w, max_w)
            nodes, weights = panel_nodes_weights(edges, contour.nodes)
        shape = (n_out,) if n_out else ()
        acc = Dual2(*(np.zeros(shape, dtype=complex) for _ in range(6)))
        peak = 0.0
        edge_mag = 0.0
        for i0 in range(0, len(nodes), chunk):
            sl = slice(i0, min(i0 + chunk, len(nodes)))
            om = nodes[sl] + 1j * contour.omega_i
            val = f_dual(om)
            w = weights[sl]
            comps = []
            for c in (val.f, val.fa, val.fb, val.faa, val.fab, val.fbb):
                c = np.asarray(c)
                if c.ndim == 0:
                    comps.append(c * w.sum())
                else:
                    comps.append(np.tensordot(w, c, axes=(0, 0)))
            acc = acc + Dual2(*comps)
            mags = np.abs(np.asarray(val.f))
            mags = mags if mags.ndim == 1 else mags.max(axis=-1)
            peak = max(peak, float(mags.max()))
            if i0 == 0:
                edge_mag = max(edge_mag, float(mags[0]))
            if sl.stop == len(nodes):
                edge_mag = max(edge_mag, float(mags[-1]))
        if peak == 0.0 or edge_mag <= _EDGE_RATIO * peak:
            return acc
        W *= 2.0
    raise QuadratureFailure(
        f"integrand not decayed at truncation edge after {_MAX_DOUBLINGS} doublings")


def _osc_scale(*xs) -> float:
    return max(1.0, *(abs(float(x)) for x in xs))


def _widths(contour: ContourSpec, n: int, kernel_im_dist: float, osc: float):
    min_w = float(np.clip(abs(kernel_im_dist) * 0.5, 0.05, 1.0))
    max_w = float(np.clip(60.0 / osc, 2 * min_w, 2.0 * n / math.pi))
    return min_w, max_w


# ----------------------------------------------------------------------
# pricing formulas
# ----------------------------------------------------------------------

def _as_smoothing(n) -> int:
    return n.n if isinstance(n, SmoothingSpec) else int(n)


def _check_x0(law, x0: float):
    law_x0 = getattr(law, "x0", None)
    if law_x0 is not None and abs(law_x0 - x0) > 1e-12:
        raise ValueError(f"law x0 {law_x0:g} differs from pricing x0 {x0:g}")


def _targets(law) -> int:
    return len(law.xs) if isinstance(law, TargetGrid) else 0


def price_sbko_powerexp(law, x0: float, L: float, j: int, k: int,
                        p: complex, s: complex, smoothing=SmoothingSpec(25),
                        contour_g: Optional[ContourSpec] = None,
                        contour_h: Optional[ContourSpec] = None,
                        branch: Branch = Branch.PLUS) -> PriceResult:
    """Single-barrier (lower) knock-out power-exponential price at finite smoothing.

    Evaluates E[g_n(X_T) - h_n(X_T)] under ``law`` for the claim
    1{tau_L > T} X_T^j <X>_T^k e^{i p X_T + i s <X>_T}; j + k <= 2.
    """
    n = _as_smoothing(smoothing)
    if j + k > 2:
        raise ValueError("derivative orders limited to j + k <= 2")
    if not L < x0:
        raise ValueError("lower barrier must lie below the start point")
    _check_x0(law, x0)
    zeros = discriminant_zeros(s)
    pi_ = complex(p).imag
    cg = _auto_contour(-2.0 * n + pi_, pi_, zeros, n, contour_g)
    ch = _auto_contour(-1.0 - pi_, 2.0 * n - 1.0 - pi_, zeros, n, contour_h)
    osc = _osc_scale(L, x0, *(law.xs if isinstance(law, TargetGrid) else (x0,)))

    def integrand(kernel_shift_i: float):
        # kernel argument: omega - p for g, -i - omega - p for h
        def f(om):
            pd = Dual2.var_a(complex(p))
            sd = Dual2.var_b(complex(s))
            omc = Dual2.const(om)
            u = root_u_dual(omc, sd, branch)
            karg = (omc - pd) if kernel_shift_i == 0 else (-1j - omc - pd)
            kern = _heaviside_kernel_dual(karg, n)
            pref = ((-1j) * (omc - pd) * L).exp() * ((1j * (omc - u)) * x0).exp()
            return _terminal_factor(kern * pref, u, law)
        return f

    mg, Mg = _widths(cg, n, cg.omega_i - pi_, osc)
    mh, Mh = _widths(ch, n, -1.0 - ch.omega_i - pi_, osc)
    gi = _contour_integral(integrand(0), cg, complex(p).real, mg, Mg, _targets(law))
    hi = _contour_integral(integrand(1), ch, -complex(p).real, mh, Mh, _targets(law))
    total = (gi - hi).op_partial(j, k)
    price = total if isinstance(law, TargetGrid) else complex(total)
    return PriceResult(price, {"n": n, "contour_g": cg, "contour_h": ch})


def _expand(d: Dual2) -> Dual2:
    """Trailing axis on node-shaped jets, for broadcasting inside the laws."""
    return Dual2(*(np.asarray(c)[:, None] if np.ndim(c) == 1 else c
                   for c in (d.f, d.fa, d.fb, d.faa, d.fab, d.fbb)))


def _terminal_factor(head: Dual2, u: Dual2, law) -> Dual2:
    """head * E e^{i u X_T}; target grids keep their per-x axis."""
    phi = law.charfun_dual(_expand(u))
    if isinstance(law, TargetGrid):
        return _expand(head) * phi
    return head * phi


def price_dbko_powerexp(law, x0: float, L: float, U: float, j: int, k: int,
                        p: complex, s: complex, smoothing=SmoothingSpec(25),
                        q: int = 5,
                        contour_g: Optional[ContourSpec] = None,
                        contour_h: Optional[ContourSpec] = None,
                        branch: Branch = Branch.PLUS,
                        last_term_diag: bool = False) -> PriceResult:
    """Double-barrier knock-out power-exponential price, image series |n| <= q.

    The h-part prefactor is e^{(1-i omega)(2 n delta + 2L) - L}, which reduces
    to the single-barrier formula as U -> inf (checked in the test suite).
    """
    m = _as_smoothing(smoothing)
    if j + k > 2:
        raise ValueError("derivative orders limited to j + k <= 2")
    if not L < U:
        raise ValueError("need L < U")
    if not L < x0 < U:
        raise ValueError("need L < x0 < U")
    _check_x0(law, x0)
    delta = U - L
    zeros = discriminant_zeros(s)
    pi_ = complex(p).imag
    cg = _auto_contour(-2.0 * m + pi_, pi_, zeros, m, contour_g)
    ch = _auto_contour(-1.0 - pi_, 2.0 * m - 1.0 - pi_, zeros, m, contour_h)
    osc = _osc_scale(L, U, x0, 2 * q * delta,
                     *(law.xs if isinstance(law, TargetGrid) else (x0,)))

    def make_g(ns):
        def g_f(om):
            pd = Dual2.var_a(complex(p))
            sd = Dual2.var_b(complex(s))
            omc = Dual2.const(om)
            u = root_u_dual(omc, sd, branch)
            kern = _heaviside_kernel_dual(omc - pd, m)
            barrier = ((-1j) * (omc - pd) * L).exp() - ((-1j) * (omc - pd) * U).exp()
            # sum_n e^{-n delta} e^{i omega 2 n delta}
            series = Dual2.const(np.sum(np.exp(
                (2j * om[:, None] - 1.0) * delta * ns[None, :]), axis=1))
            pref = ((1j * (omc - u)) * x0).exp()
            return _terminal_factor(series * kern * barrier * pref, u, law)
        return g_f

    def make_h(ns):
        def h_f(om):
            pd = Dual2.var_a(complex(p))
            sd = Dual2.var_b(complex(s))
            omc = Dual2.const(om)
            u = root_u_dual(omc, sd, branch)
            beta = -1j - pd - omc
            kern = _heaviside_kernel_dual(beta, m)
            barrier = ((-1j) * beta * L).exp() - ((-1j) * beta * U).exp()
            # sum_n e^{(1 - i omega) 2 n delta} e^{-n delta}
            series = Dual2.const(np.sum(np.exp(
                ((1.0 - 1j * om[:, None]) * 2.0 - 1.0) * delta * ns[None, :]), axis=1))
            tilt = Dual2.const(np.exp((1.0 - 1j * om) * 2.0 * L - L))
            pref = ((1j * (omc - u)) * x0).exp()
            return _terminal_factor(series * kern * barrier * tilt * pref, u, law)
        return h_f

    mg, Mg = _widths(cg, m, cg.omega_i - pi_, osc)
    mh, Mh = _widths(ch, m, -1.0 - ch.omega_i - pi_, osc)

    def run(ns):
        gi = _contour_integral(make_g(ns), cg, complex(p).real, mg, Mg, _targets(law))
        hi = _contour_integral(make_h(ns), ch, -complex(p).real, mh, Mh, _targets(law))
        return (gi - hi).op_partial(j, k)

    total = run(np.arange(-q, q + 1))
    price = total if isinstance(law, TargetGrid) else complex(total)
    diag = {"m": m, "q": q, "last_image_weight": math.exp(-q * delta),
            "contour_g": cg, "contour_h": ch}
    if last_term_diag:
        edge = run(np.unique(np.array([-q, q])))
        diag["last_image_term_magnitude"] = float(np.max(np.abs(edge)))
    return PriceResult(price, diag)


def price_rebate_powerexp(law, x0: float, H: float, k: int, s: complex,
                          smoothing=SmoothingSpec(25), side: str = "lower",
                          contour_g: Optional[ContourSpec] = None,
                          contour_h: Optional[ContourSpec] = None,
                          branch: Branch = Branch.PLUS) -> PriceResult:
    """Single-barrier rebate power-exponential price E[g_n + h_n].

    Prices 1{tau_H <= T} <X>_{tau*}^k e^{i s <X>_{tau*}} paid at passage;
    the upper side swaps the kernel arguments and reflects the strips.
    """
    n = _as_smoothing(smoothing)
    if k > 2:
        raise ValueError("rebate order limited to k <= 2")
    _check_x0(law, x0)
    v0 = root_v_dual(Dual2.var_b(complex(s)), branch)
    iv = complex(v0.f).imag
    rv = complex(v0.f).real
    zeros = discriminant_zeros(s)
    if side == "lower":
        strips = ((iv, 2.0 * n + iv), (-1.0 - iv, 2.0 * n - 1.0 - iv))
        centers = (rv, -rv)
    elif side == "upper":
        strips = ((-2.0 * n + iv, iv), (-2.0 * n - 1.0 - iv, -1.0 - iv))
        centers = (rv, -rv)
    else:
        raise ValueError(f"unknown side {side!r}")
    cg = _auto_contour(*strips[0], zeros, n, contour_g)
    ch = _auto_contour(*strips[1], zeros, n, contour_h)
    osc = _osc_scale(H, x0, *(law.xs if isinstance(law, TargetGrid) else (x0,)))

    def integrand(which: str):
        def f(om):
            sd = Dual2.var_b(complex(s))
            omc = Dual2.const(om)
            u = root_u_dual(omc, sd, branch)
            v = root_v_dual(sd, branch)
            if side == "lower":
                karg = (v - omc) if which == "g" else (-1j - v - omc)
            else:
                karg = (omc - v) if which == "g" else (omc + 1j + v)
            kern = _heaviside_kernel_dual(karg, n)
            pref = ((-1j) * omc * H).exp() * ((1j * (omc - u)) * x0).exp()
            return _terminal_factor(kern * pref, u, law)
        return f

    mg, Mg = _widths(cg, n, cg.omega_i - iv, osc)
    mh, Mh = _widths(ch, n, ch.omega_i + 1.0 + iv, osc)
    gi = _contour_integral(integrand("g"), cg, centers[0], mg, Mg, _targets(law))
    hi = _contour_integral(integrand("h"), ch, centers[1], mh, Mh, _targets(law))
    total = (gi + hi).op_partial(0, k)
    price = total if isinstance(law, TargetGrid) else complex(total)
    return PriceResult(price, {"n": n, "side": side, "contour_g": cg, "contour_h": ch})


def price_powerexp_european(law, x0: float, j: int, k: int, p: complex,
                            s: complex, branch: Branch = Branch.PLUS) -> complex:
    """E X_T^j <X>_T^k e^{i p X_T + i s <X>_T} through the root identity."""
    if j + k > 2:
        raise ValueError("derivative orders limited to j + k <= 2")
    pd = Dual2.var_a(complex(p))
    sd = Dual2.var_b(complex(s))
    u = root_u_dual(pd, sd, branch)
    pref = ((1j * (pd - u)) * x0).exp()
    val = pref * law.charfun_dual(u)
    return complex(val.op_partial(j, k))


def price_european_style(law, x0: float, f_hat, contour: ContourSpec,
                         m: int = 0, s: complex = 0.0,
                         branch: Branch = Branch.PLUS) -> complex:
    """Price of f(X_T) <X>_T^m e^{i s <X>_T} from the transform f_hat.

    f_hat(omega) must be integrable along the contour; the integrand is
    f_hat(omega) (-i d/ds)^m [e^{i(omega-u) x0} E e^{i u X_T}].
    """
    if m > 2:
        raise ValueError("QV order limited to m <= 2")

    def f(om):
        sd = Dual2.var_b(complex(s))
        omc = Dual2.const(om)
        u = root_u_dual(omc, sd, branch)
        fh = Dual2.const(np.asarray([complex(f_hat(o)) for o in om]))
        pref = ((1j * (omc - u)) * x0).exp()
        return _terminal_factor(fh * pref, u, law)

    val = _contour_integral(f, contour, 0.0, 0.25, 4.0, 0)
    return complex(val.op_partial(0, m))


# ----------------------------------------------------------------------
# payoff pricing under a law
# ----------------------------------------------------------------------

def price_payoff_under_law(payoff: PayoffFn, law, z_max: float = 10.0,
                           rel_tol: float = 1e-9, abs_tol: float = 1e-13) -> complex:
    """E payoff(X_T, <X>_T) under a mixture or empirical law.

    Mixture components integrate the payoff against their conditional normal
    density with Gauss-Legendre panels split at the payoff breakpoints;
    empirical laws take the sample mean.
    """
    if isinstance(law, EmpiricalLaw):
        return complex(np.mean(payoff(law.xs, law.qvs)))
    if not isinstance(law, MixtureLaw):
        raise TypeError("law must be MixtureLaw or EmpiricalLaw")
    if payoff.v_independent:
        return _price_x_payoff_mixture(payoff, law, z_max, rel_tol, abs_tol)
    total = 0.0 + 0.0j
    for w, v in zip(law.weights, law.qvs):
        if v <= 1e-300:
            total += w * complex(np.asarray(payoff(np.array([law.x0]), 0.0))[0])
            continue
        mu = law.x0 - 0.5 * v
        sd = math.sqrt(v)
        lo, hi = mu - z_max * sd, mu + z_max * sd
        brk = [b for b in payoff.breakpoints if lo < b < hi]

        def f(x):
            dens = np.exp(-0.5 * ((x - mu) / sd) ** 2) / (sd * math.sqrt(2.0 * math.pi))
            return np.asarray(payoff(x, v)) * dens

        val, _ = adaptive_quad_vec(f, lo, hi, rel_tol=rel_tol, abs_tol=abs_tol,
                                   breakpoints=brk)
        total += w * complex(val)
    return total


def _price_x_payoff_mixture(payoff: PayoffFn, law: MixtureLaw, z_max: float,
                            rel_tol: float, abs_tol: float) -> complex:
    """One quadrature of payoff(x) against the whole mixture density."""
    pos = law.qvs > 1e-300
    mu = law.x0 - 0.5 * law.qvs[pos]
    sd = np.sqrt(law.qvs[pos])
    w = law.weights[pos]
    lo = float(np.min(mu - z_max * sd))
    hi = float(np.max(mu + z_max * sd))
    if payoff.support_hint is not None:
        lo = max(lo, payoff.support_hint[0])
        hi = min(hi, payoff.support_hint[1])
    total = 0.0 + 0.0j
    if np.any(~pos):
        w0 = float(law.weights[~pos].sum())
        total += w0 * complex(np.asarray(payoff(np.array([law.x0]), 0.0))[0])
    if hi <= lo:
        return total

    def f(x):
        dens = (w[:, None] * np.exp(-0.5 * ((x[None, :] - mu[:, None]) / sd[:, None]) ** 2)
                / (sd[:, None] * math.sqrt(2.0 * math.pi))).sum(axis=0)
        return np.asarray(payoff(x, 0.0)) * dens

    brk = [b for b in payoff.breakpoints if lo < b < hi]
    val, _ = adaptive_quad_vec(f, lo, hi, rel_tol=rel_tol, abs_tol=abs_tol,
                               breakpoints=brk)
    return total + complex(val)
