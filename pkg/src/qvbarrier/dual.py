"""Forward-mode differentiation in two complex variables, up to total order 2.

A ``Dual2`` carries a primal value together with the partial derivatives
(1,0), (0,1), (2,0), (1,1), (0,2) with respect to two formal variables
``a`` and ``b``.  Components may be complex scalars or numpy arrays of a
common shape, so a single expression evaluates a whole grid of points with
derivative tracking.  Derivatives are exact (closed-form chain rules), not
finite differences.
"""

from __future__ import annotations

import numpy as np

__all__ = ["Dual2", "const", "var_a", "var_b"]

_MINUS_I = -1j


class Dual2:
    """Second-order jet in two complex variables.

    Attributes f, fa, fb, faa, fab, fbb hold the primal value and the raw
    partial derivatives d/da, d/db, d2/da2, d2/dadb, d2/db2.
    """

    __slots__ = ("f", "fa", "fb", "faa", "fab", "fbb")

    def __init__(self, f, fa=0.0, fb=0.0, faa=0.0, fab=0.0, fbb=0.0):
        self.f = f
        self.fa = fa
        self.fb = fb
        self.faa = faa
        self.fab = fab
        self.fbb = fbb

    # -- construction -------------------------------------------------

    @staticmethod
    def const(value):
        return Dual2(value)

    @staticmethod
    def var_a(value):
        return Dual2(value, fa=1.0 + 0.0j)

    @staticmethod
    def var_b(value):
        return Dual2(value, fb=1.0 + 0.0j)

    def _coerce(self, other):
        if isinstance(other, Dual2):
            return other
        return Dual2(other)

    # -- ring operations ----------------------------------------------

    def __add__(self, other):
        o = self._coerce(other)
        return Dual2(self.f + o.f, self.fa + o.fa, self.fb + o.fb,
                     self.faa + o.faa, self.fab + o.fab, self.fbb + o.fbb)

    __radd__ = __add__

    def __neg__(self):
        return Dual2(-self.f, -self.fa, -self.fb, -self.faa, -self.fab, -self.fbb)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        return Dual2(
            self.f * o.f,
            self.fa * o.f + self.f * o.fa,
            self.fb * o.f + self.f * o.fb,
            self.faa * o.f + 2.0 * self.fa * o.fa + self.f * o.faa,
            self.fab * o.f + self.fa * o.fb + self.fb * o.fa + self.f * o.fab,
            self.fbb * o.f + 2.0 * self.fb * o.fb + self.f * o.fbb,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self * self._coerce(other).reciprocal()

    def __rtruediv__(self, other):
        return self._coerce(other) * self.reciprocal()

    # -- chain rule for h(self) given h' and h'' ------------------------

    def _compose(self, h, dh, d2h):
        fa, fb = self.fa, self.fb
        return Dual2(
            h,
            dh * fa,
            dh * fb,
            d2h * fa * fa + dh * self.faa,
            d2h * fa * fb + dh * self.fab,
            d2h * fb * fb + dh * self.fbb,
        )

    def reciprocal(self):
        inv = 1.0 / self.f
        return self._compose(inv, -inv * inv, 2.0 * inv * inv * inv)

    def exp(self):
        e = np.exp(self.f)
        return self._compose(e, e, e)

    def sqrt(self):
        r = np.sqrt(self.f + 0.0j)
        return self._compose(r, 0.5 / r, -0.25 / (r * self.f))

    def sinh(self):
        sh, ch = np.sinh(self.f), np.cosh(self.f)
        return self._compose(sh, ch, sh)

    def cosh(self):
        sh, ch = np.sinh(self.f), np.cosh(self.f)
        return self._compose(ch, sh, ch)

    def pow_int(self, k: int):
        if k < 0:
            return self.reciprocal().pow_int(-k)
        out = Dual2(np.ones_like(np.asarray(self.f)) if isinstance(self.f, np.ndarray) else 1.0 + 0.0j)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    # -- extraction -----------------------------------------------------

    def partial(self, j: int, k: int):
        """Raw partial derivative d^j/da^j d^k/db^k (j + k <= 2)."""
        table = {(0, 0): self.f, (1, 0): self.fa, (0, 1): self.fb,
                 (2, 0): self.faa, (1, 1): self.fab, (0, 2): self.fbb}
        try:
            return table[(j, k)]
        except KeyError:
            raise ValueError(f"partial ({j},{k}) outside tracked order 2") from None

    def op_partial(self, j: int, k: int):
        """(-i d/da)^j (-i d/db)^k applied to the jet."""
        return _MINUS_I ** (j + k) * self.partial(j, k)

    def __repr__(self):
        return f"Dual2(f={self.f!r}, fa={self.fa!r}, fb={self.fb!r})"


def const(value) -> Dual2:
    return Dual2.const(value)


def var_a(value) -> Dual2:
    return Dual2.var_a(value)


def var_b(value) -> Dual2:
    return Dual2.var_b(value)
