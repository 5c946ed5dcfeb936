"""Static replication of terminal payoffs with bond, forward, calls and puts.

A difference-of-convex payoff f(S_T) decomposes into f(kappa), a forward
leg weighted f'(kappa), and a strike strip weighted by the curvature f''(K):
puts below the expansion point, calls above.  Kinks contribute discrete
weights equal to the slope jump; value jumps are carried by a call spread
on the two enclosing strikes, which keeps the reconstruction exact at every
grid node.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidGrid
from .payoffs import PayoffFn

__all__ = ["SpanningPortfolio", "span_payoff", "price_space_payoff"]

# relative step for the local second-difference stencil; balances the
# h^2 truncation against eps/h^2 roundoff near 1e-10 absolute accuracy
_H_REL = 2e-4
_KINK_TOL = 1e-6


@dataclass(frozen=True)
class SpanningPortfolio:
    kappa: float
    bond_weight: float
    forward_weight: float
    put_strikes: np.ndarray
    put_weights: np.ndarray
    call_strikes: np.ndarray
    call_weights: np.ndarray
    # strike-cell widths used for the curvature weights (0 at kink strikes)
    put_cells: np.ndarray = None
    call_cells: np.ndarray = None

    def payoff(self, s) -> np.ndarray:
        """Reconstructed payoff of the portfolio at terminal price(s) s."""
        s = np.asarray(s, dtype=float)
        out = np.full(s.shape, self.bond_weight)
        out = out + self.forward_weight * (np.maximum(s - self.kappa, 0.0)
                                           - np.maximum(self.kappa - s, 0.0))
        if len(self.put_strikes):
            out = out + (self.put_weights[:, None]
                         * np.maximum(self.put_strikes[:, None] - s[None, :], 0.0)).sum(axis=0)
        if len(self.call_strikes):
            out = out + (self.call_weights[:, None]
                         * np.maximum(s[None, :] - self.call_strikes[:, None], 0.0)).sum(axis=0)
        return out

    def payoff_fn(self) -> PayoffFn:
        """Portfolio payoff as a log-price PayoffFn (v ignored)."""
        breaks = tuple(sorted({math.log(k) for k in
                               (*self.put_strikes, self.kappa, *self.call_strikes)}))

        def _eval(x, v):
            return self.payoff(np.exp(np.asarray(x, dtype=float))).astype(complex)

        return PayoffFn(_eval, description="spanning portfolio", breakpoints=breaks)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["instrument_type", "strike", "weight"])
            w.writerow(["bond", f"{self.kappa:.12g}", f"{self.bond_weight:.12g}"])
            w.writerow(["forward", f"{self.kappa:.12g}", f"{self.forward_weight:.12g}"])
            for K, wt in zip(self.put_strikes, self.put_weights):
                w.writerow(["put", f"{K:.12g}", f"{wt:.12g}"])
            for K, wt in zip(self.call_strikes, self.call_weights):
                w.writerow(["call", f"{K:.12g}", f"{wt:.12g}"])


def price_space_payoff(payoff: PayoffFn, v: float):
    """Compose a log-price payoff with exp: returns (f, kink abscissas)."""

    def f(s):
        return float(np.real(payoff(np.array([math.log(s)]), v)[0]))

    return f, tuple(math.exp(b) for b in payoff.breakpoints)


def span_payoff(f, kappa: float, strike_grid, kinks=()) -> SpanningPortfolio:
    """Decompose f into bond/forward plus a discrete strip of calls and puts.

    Curvature weights are f''(K) dK with a local second-difference stencil
    (midpoint cells, end half-cells folded inward).  Nodes where one-sided
    slopes jump become discrete weights.  ``kinks`` lists known off-grid
    non-smooth abscissas: slope jumps there split onto the two enclosing
    strikes, value jumps become a call spread between them.
    """
    K = np.asarray(strike_grid, dtype=float)
    if K.ndim != 1 or len(K) < 3 or np.any(np.diff(K) <= 0) or K[0] <= 0:
        raise InvalidGrid("strike grid must be sorted, positive, length >= 3")
    if kappa <= 0 or not K[0] < kappa < K[-1]:
        raise InvalidGrid("expansion point must be interior to the grid")

    bond = float(f(kappa))
    h_k = min(_H_REL * kappa, 0.25 * float(np.min(np.diff(K))))
    # second-order one-sided stencil for the left derivative
    forward = (float(f(kappa - 2 * h_k)) - 4.0 * float(f(kappa - h_k)) + 3.0 * bond) / (2.0 * h_k)

    # midpoint cells tiling [K_0, K_-1], re-partitioned exactly at kappa so
    # no cell carries curvature mass across the put/call split
    m = len(K)
    edge = np.empty(m)
    edge[1] = K[0]
    edge[2:m - 1] = 0.5 * (K[1:m - 2] + K[2:m - 1])
    edge[m - 1] = K[-1]
    cell_lo = edge[1:m - 1].copy()
    cell_hi = edge[2:m].copy()
    for i in range(1, m - 1):
        lo, hi = cell_lo[i - 1], cell_hi[i - 1]
        if lo < kappa < hi:
            if K[i] < kappa:
                cell_hi[i - 1] = kappa
                if i + 1 <= m - 2:
                    cell_lo[i] = kappa
            else:
                cell_lo[i - 1] = kappa
                if i - 1 >= 1:
                    cell_hi[i - 2] = kappa
            break
    cells = np.zeros(m)
    cells[1:m - 1] = np.maximum(cell_hi - cell_lo, 0.0)

    extra = {}

    def add_weight(strike, w):
        extra[strike] = extra.get(strike, 0.0) + w

    handled = []
    for a in kinks:
        a = float(a)
        if not K[0] < a < K[-1]:
            continue
        i = int(np.searchsorted(K, a)) - 1
        h = min(_H_REL * a, 0.1 * (K[i + 1] - K[i]))
        if min(a - K[i], K[i + 1] - a) < 2.0 * h:
            continue  # effectively on a node; the node test below catches it
        jump = float(f(a + h)) - float(f(a - h))
        slope_r = (float(f(a + 2 * h)) - float(f(a + h))) / h
        slope_l = (float(f(a - h)) - float(f(a - 2 * h))) / h
        dK = K[i + 1] - K[i]
        theta = (a - K[i]) / dK
        if abs(jump) > _KINK_TOL * max(1.0, abs(float(f(a + h)))):
            add_weight(K[i], jump / dK)
            add_weight(K[i + 1], -jump / dK)
        dslope = slope_r - slope_l
        if abs(dslope) > _KINK_TOL * max(1.0, abs(slope_l), abs(slope_r)):
            add_weight(K[i], dslope * (1.0 - theta))
            add_weight(K[i + 1], dslope * theta)
        handled.append(a)

    strikes, weights, widths = [], [], []
    for i in range(1, len(K) - 1):
        h = min(_H_REL * K[i], 0.25 * min(K[i] - K[i - 1], K[i + 1] - K[i]))
        fk = float(f(K[i]))
        jump_h = (float(f(K[i] + h)) - fk) / h - (fk - float(f(K[i] - h))) / h
        jump_h2 = ((float(f(K[i] + 0.5 * h)) - fk)
                   - (fk - float(f(K[i] - 0.5 * h)))) / (0.5 * h)
        scale = max(1.0, abs(fk) / max(K[i], 1.0))
        # a genuine kink keeps its slope jump as the stencil halves;
        # smooth curvature halves it
        if abs(jump_h) > _KINK_TOL * scale and abs(jump_h2) > 0.75 * abs(jump_h):
            w, width = jump_h2, 0.0
        else:
            w, width = jump_h / h * cells[i], cells[i]
        strikes.append(K[i])
        weights.append(w + extra.pop(K[i], 0.0))
        widths.append(width)

    for strike, w in extra.items():
        strikes.append(strike)
        weights.append(w)
        widths.append(0.0)
    order = np.argsort(strikes)
    strikes = np.asarray(strikes)[order]
    weights = np.asarray(weights)[order]
    widths = np.asarray(widths)[order]

    put_side = strikes < kappa
    return SpanningPortfolio(
        kappa=float(kappa), bond_weight=bond, forward_weight=float(forward),
        put_strikes=strikes[put_side], put_weights=weights[put_side],
        call_strikes=strikes[~put_side], call_weights=weights[~put_side],
        put_cells=widths[put_side], call_cells=widths[~put_side],
    )
