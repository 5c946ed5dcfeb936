import math

import numpy as np
import pytest

from qvbarrier.errors import QuadratureFailure
from qvbarrier.quadrature import adaptive_quad_vec, dyadic_edges, panel_nodes_weights


def test_panel_rule_integrates_polynomials_exactly():
    nodes, weights = panel_nodes_weights([0.0, 0.5, 2.0], n=16)
    got = np.sum(weights * nodes ** 7)
    assert abs(got - 2.0 ** 8 / 8.0) < 1e-12


def test_dyadic_edges_cover_and_refine():
    e = dyadic_edges(1.0, 10.0, 0.25, 4.0)
    assert e[0] == pytest.approx(-9.0) and e[-1] == pytest.approx(11.0)
    widths = np.diff(e)
    assert widths.min() >= 0.25 - 1e-12
    assert widths.max() <= 4.0 + 1e-12
    # narrowest panels sit at the center
    mid = np.argmin(np.abs(0.5 * (e[:-1] + e[1:]) - 1.0))
    assert widths[mid] == pytest.approx(0.25)


def test_adaptive_quad_vector_outputs():
    # rows integrate sin(kx) over [0, pi]
    ks = np.array([1.0, 2.0, 3.0])

    def f(x):
        return np.sin(ks[:, None] * x[None, :])

    val, err = adaptive_quad_vec(f, 0.0, math.pi, rel_tol=1e-10)
    want = (1.0 - np.cos(ks * math.pi)) / ks
    np.testing.assert_allclose(val, want, atol=1e-10)
    assert err < 1e-8


def test_adaptive_quad_breakpoints_handle_kinks():
    val, _ = adaptive_quad_vec(lambda x: np.abs(x), -1.0, 2.0, breakpoints=[0.0])
    assert abs(val - 2.5) < 1e-10


def test_adaptive_quad_raises_on_hopeless_budget():
    # highly oscillatory with a panel budget of 1 cannot converge
    with pytest.raises(QuadratureFailure):
        adaptive_quad_vec(lambda x: np.sin(2000.0 * x) * 1e6, 0.0, 50.0,
                          rel_tol=1e-14, abs_tol=1e-16, max_panels=1)
