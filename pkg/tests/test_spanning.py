import math

import numpy as np
import pytest

from qvbarrier.errors import InvalidGrid
from qvbarrier.payoffs import PayoffFn, sbko_image
from qvbarrier.pricer import MixtureLaw, price_payoff_under_law
from qvbarrier.spanning import price_space_payoff, span_payoff

S0 = 100.0
GRID = np.linspace(50.0, 200.0, 200)


def qv_payoff():
    return PayoffFn(lambda x, v: np.broadcast_to(
        np.asarray(v, dtype=complex), np.shape(x)).copy(), "qv")


class TestWeights:
    def test_call_on_grid_is_single_point_mass(self):
        K0 = GRID[120]
        pf = span_payoff(lambda s: max(s - K0, 0.0), S0, GRID)
        w = dict(zip(pf.call_strikes, pf.call_weights))
        assert w[K0] == pytest.approx(1.0, abs=1e-10)
        others = [abs(wt) for k, wt in zip(
            np.concatenate([pf.put_strikes, pf.call_strikes]),
            np.concatenate([pf.put_weights, pf.call_weights])) if k != K0]
        assert max(others) < 1e-12

    def test_log_contract_weights(self):
        pf = span_payoff(lambda s: -2.0 * math.log(s / S0), S0, GRID)
        assert pf.bond_weight == pytest.approx(0.0, abs=1e-14)
        assert pf.forward_weight == pytest.approx(-2.0 / S0, abs=1e-7)
        K = np.concatenate([pf.put_strikes, pf.call_strikes])
        w = np.concatenate([pf.put_weights, pf.call_weights])
        c = np.concatenate([pf.put_cells, pf.call_cells])
        mask = c > 0
        assert np.max(np.abs(w[mask] / c[mask] - 2.0 / K[mask] ** 2)) < 1e-10

    def test_grid_validation(self):
        with pytest.raises(InvalidGrid):
            span_payoff(lambda s: s, S0, [-1.0, 1.0, 2.0])
        with pytest.raises(InvalidGrid):
            span_payoff(lambda s: s, S0, [1.0, 3.0, 2.0])
        with pytest.raises(InvalidGrid):
            span_payoff(lambda s: s, 500.0, GRID)


class TestReconstruction:
    def test_piecewise_linear_exact_at_nodes(self):
        kink1, kink2 = GRID[100], GRID[50]
        f = lambda s: abs(s - kink1) + 0.5 * max(s - kink2, 0.0)
        pf = span_payoff(f, S0, GRID)
        got = pf.payoff(GRID[1:-1])
        want = np.array([f(s) for s in GRID[1:-1]])
        np.testing.assert_allclose(got, want, atol=1e-6)

    @pytest.mark.parametrize("f", [
        lambda s: (math.log(s / S0)) ** 2,
        lambda s: (s / S0 - 1.0) ** 2,
        lambda s: math.sqrt(s),
    ], ids=["log-squared", "quadratic", "sqrt"])
    def test_second_order_convergence(self, f):
        def max_err(n):
            g = np.linspace(50.0, 200.0, n)
            p = span_payoff(f, S0, g)
            test = np.linspace(60.0, 150.0, 901)
            return np.max(np.abs(p.payoff(test) - np.array([f(s) for s in test])))

        ratio = max_err(100) / max_err(199)
        assert 3.5 <= ratio <= 4.5

    def test_image_payoff_reconstruction(self):
        img = sbko_image(qv_payoff(), math.log(90.0))
        f, kinks = price_space_payoff(img, 0.1)
        pf = span_payoff(f, 110.0, GRID, kinks=kinks)
        nodes = GRID[(GRID >= 60.0) & (GRID <= 150.0)]
        err = np.max(np.abs(pf.payoff(nodes) - np.array([f(s) for s in nodes])))
        assert err < 1e-3


class TestPortfolioValue:
    def test_value_matches_payoff_pricing(self):
        # portfolio priced under a law equals the payoff priced directly,
        # within the spanning reconstruction error
        law = MixtureLaw(math.log(S0), [0.6, 0.4], [0.02, 0.08])
        f = lambda s: (math.log(s / S0)) ** 2
        pf = span_payoff(f, S0, np.linspace(40.0, 260.0, 400))
        direct = PayoffFn(lambda x, v: np.array([(xi - math.log(S0)) ** 2
                                                 for xi in np.atleast_1d(x)],
                                                dtype=complex), "log^2")
        got = price_payoff_under_law(pf.payoff_fn(), law)
        want = price_payoff_under_law(direct, law)
        assert abs(got - want) < 5e-4

    def test_csv_export(self, tmp_path):
        pf = span_payoff(lambda s: -2.0 * math.log(s / S0), S0, GRID)
        out = tmp_path / "portfolio.csv"
        pf.to_csv(out)
        lines = out.read_text().strip().splitlines()
        assert lines[0] == "instrument_type,strike,weight"
        kinds = {row.split(",")[0] for row in lines[1:]}
        assert kinds == {"bond", "forward", "put", "call"}
