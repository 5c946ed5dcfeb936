"""Complex roots of the characteristic exponent and conditional-Gaussian identities.

The log price X with independent volatility satisfies, conditional on the
realized quadratic variation v over a window, X-increment ~ N(-v/2, v).
The frequency substitution u(omega, s) collapses a joint frequency pair
(omega for X, s for <X>) into a single X-frequency; root_u/root_v compute
the two branches of that substitution with exact derivative jets.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .dual import Dual2
from .errors import BranchPoint, DegenerateDiscriminant

__all__ = [
    "Branch", "CharRoot", "RebateRoot",
    "root_u", "root_u_dual", "root_v", "root_v_dual",
    "conditional_charfun", "charfun_identity_rhs", "discriminant_zeros",
]

DISCRIMINANT_TOL = 1e-14
BRANCH_POINT_TOL = 1e-12


class Branch(enum.Enum):
    PLUS = 1
    MINUS = -1


@dataclass(frozen=True)
class CharRoot:
    """One branch of u(omega, s) with first and second derivative table."""

    omega: complex
    s: complex
    branch: Branch
    value: complex
    d_omega: complex
    d_s: complex
    higher: dict = field(default_factory=dict)


@dataclass(frozen=True)
class RebateRoot:
    """One branch of the rebate root v(s)."""

    s: complex
    branch: Branch
    value: complex
    d_s: complex


def _discriminant_scale(omega, s):
    ao = np.abs(omega)
    return np.maximum(1.0, ao * ao + ao + 2.0 * np.abs(s))


def root_u_dual(omega: Dual2, s: Dual2, branch: Branch) -> Dual2:
    """u(omega, s) = i(-1/2 +- sqrt(1/4 - omega^2 - i omega + 2 i s)) as a jet.

    omega and s may be Dual2 jets (scalar or array components); the guard on
    the discriminant uses primal values only.
    """
    if not isinstance(omega, Dual2) and not isinstance(s, Dual2):
        omega = Dual2.const(omega)
    disc = 0.25 - omega * omega - 1j * omega + 2j * s
    bad = np.abs(disc.f) <= DISCRIMINANT_TOL * _discriminant_scale(
        omega.f if isinstance(omega, Dual2) else omega,
        s.f if isinstance(s, Dual2) else s)
    if np.any(bad):
        raise DegenerateDiscriminant(
            "discriminant 1/4 - omega^2 - i*omega + 2i*s vanishes")
    return 1j * (-0.5 + branch.value * disc.sqrt())


def root_u(omega: complex, s: complex, branch: Branch = Branch.PLUS) -> CharRoot:
    """Root of the characteristic-exponent quadratic, with derivatives in (omega, s)."""
    u = root_u_dual(Dual2.var_a(complex(omega)), Dual2.var_b(complex(s)), branch)
    higher = {(2, 0): u.faa, (1, 1): u.fab, (0, 2): u.fbb}
    return CharRoot(omega=complex(omega), s=complex(s), branch=branch,
                    value=u.f, d_omega=u.fa, d_s=u.fb, higher=higher)


def root_v_dual(s: Dual2, branch: Branch) -> Dual2:
    """v(s) = i(-1/2 +- sqrt(1/4 - 2 i s)) as a jet; s != -i/8."""
    if not isinstance(s, Dual2):
        s = Dual2.const(s)
    disc = 0.25 - 2j * s
    sval = s.f if isinstance(s, Dual2) else s
    bad = np.abs(np.asarray(sval) + 0.125j) <= BRANCH_POINT_TOL * np.maximum(1.0, np.abs(sval))
    if np.any(bad):
        raise BranchPoint("rebate root has a branch point at s = -i/8")
    return 1j * (-0.5 + branch.value * disc.sqrt())


def root_v(s: complex, branch: Branch = Branch.PLUS) -> RebateRoot:
    v = root_v_dual(Dual2.var_b(complex(s)), branch)
    return RebateRoot(s=complex(s), branch=branch, value=v.f, d_s=v.fb)


def conditional_charfun(omega, s, v):
    """E[e^{i omega dX + i s dQV} | dQV = v] = exp(i s v - (omega^2 + i omega) v / 2).

    Accepts scalars or arrays; v >= 0 is the integrated variance of the window.
    """
    v = np.asarray(v, dtype=float) if np.ndim(v) else float(v)
    if np.any(np.asarray(v) < 0):
        raise ValueError("integrated variance must be non-negative")
    out = np.exp(1j * s * v - 0.5 * (omega * omega + 1j * omega) * v)
    return out


def charfun_identity_rhs(omega: complex, s: complex, x0: float, qv0: float,
                         branch: Branch = Branch.PLUS) -> tuple[complex, complex]:
    """Factor the joint characteristic function through the single-frequency root.

    Returns (prefactor, inner_freq) with
    E e^{i omega X_T + i s <X>_T} = prefactor * E e^{i inner_freq X_T},
    prefactor = exp(i (omega - u) x0 + i s qv0), evaluated at stopping state
    (x0, qv0).
    """
    u = root_u(omega, s, branch)
    pref = np.exp(1j * (omega - u.value) * x0 + 1j * s * qv0)
    return complex(pref), u.value


def discriminant_zeros(s: complex) -> tuple[complex, complex]:
    """The two omega values where 1/4 - omega^2 - i omega + 2 i s = 0.

    Horizontal pricing contours must keep |Im(contour) - Im(zero)| away from
    these points.
    """
    rad = np.sqrt(8j * complex(s))
    return (-1j + rad) / 2.0, (-1j - rad) / 2.0
