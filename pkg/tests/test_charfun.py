import numpy as np
import pytest

from qvbarrier.charfun import (Branch, charfun_identity_rhs, conditional_charfun,
                               discriminant_zeros, root_u, root_v)
from qvbarrier.errors import BranchPoint, DegenerateDiscriminant


def test_root_u_trivial_values():
    assert root_u(0, 0, Branch.PLUS).value == 0
    assert root_u(0, 0, Branch.MINUS).value == -1j
    assert abs(root_u(0, 0, Branch.PLUS).d_s - (-2.0)) < 1e-14


def test_root_u_defining_quadratic():
    rng = np.random.default_rng(5)
    for _ in range(100):
        w = complex(rng.normal(), rng.normal())
        s = complex(rng.normal(), rng.normal())
        for br in (Branch.PLUS, Branch.MINUS):
            u = root_u(w, s, br).value
            residual = -(u * u + 1j * u) / 2 - (1j * s - (w * w + 1j * w) / 2)
            assert abs(residual) < 1e-12 * max(1.0, abs(u) ** 2)


def test_branch_sums():
    rng = np.random.default_rng(6)
    for _ in range(50):
        w = complex(rng.normal(), rng.normal())
        s = complex(rng.normal(), rng.normal())
        assert abs(root_u(w, s, Branch.PLUS).value
                   + root_u(w, s, Branch.MINUS).value + 1j) < 1e-14
        assert abs(root_v(s, Branch.PLUS).value
                   + root_v(s, Branch.MINUS).value + 1j) < 1e-14


def test_degenerate_discriminant_guard():
    # 1/4 - w^2 - iw + 2is = 0 at w = -i/2 for s = 0
    with pytest.raises(DegenerateDiscriminant):
        root_u(-0.5j, 0.0, Branch.PLUS)


def test_root_v_values_and_guard():
    assert root_v(0, Branch.PLUS).value == 0
    assert root_v(0, Branch.MINUS).value == -1j
    rng = np.random.default_rng(8)
    for _ in range(50):
        s = complex(rng.normal(), rng.normal())
        v = root_v(s, Branch.PLUS).value
        assert abs(-0.5j * v + 1j * s - 0.5 * v * v) < 1e-12 * max(1.0, abs(v) ** 2)
    with pytest.raises(BranchPoint):
        root_v(-0.125j, Branch.PLUS)


def test_derivatives_match_finite_differences():
    rng = np.random.default_rng(9)
    h = 1e-5
    count = 0
    while count < 100:
        w = complex(rng.normal(), 0.3 * rng.normal())
        s = complex(rng.normal(), 0.3 * rng.normal())
        if abs(0.25 - w * w - 1j * w + 2j * s) < 0.05:
            continue
        count += 1
        cr = root_u(w, s, Branch.PLUS)
        fd_w = (root_u(w + h, s).value - root_u(w - h, s).value) / (2 * h)
        fd_s = (root_u(w, s + h).value - root_u(w, s - h).value) / (2 * h)
        # second partials: central differences of the exact first partials,
        # avoiding the 1e-5 roundoff floor of double-differenced values
        fd_ww = (root_u(w + h, s).d_omega - root_u(w - h, s).d_omega) / (2 * h)
        fd_ss = (root_u(w, s + h).d_s - root_u(w, s - h).d_s) / (2 * h)
        fd_ws = (root_u(w, s + h).d_omega - root_u(w, s - h).d_omega) / (2 * h)
        assert abs(cr.d_omega - fd_w) <= 1e-6 * max(1.0, abs(fd_w))
        assert abs(cr.d_s - fd_s) <= 1e-6 * max(1.0, abs(fd_s))
        assert abs(cr.higher[(2, 0)] - fd_ww) <= 1e-6 * max(1.0, abs(fd_ww))
        assert abs(cr.higher[(0, 2)] - fd_ss) <= 1e-6 * max(1.0, abs(fd_ss))
        assert abs(cr.higher[(1, 1)] - fd_ws) <= 1e-6 * max(1.0, abs(fd_ws))


def test_conditional_charfun_values():
    assert conditional_charfun(0.0, 0.0, 0.04) == 1.0
    want = np.exp(-(1 + 1j) * 0.02)
    assert abs(conditional_charfun(1.0, 0.0, 0.04) - want) < 1e-15
    with pytest.raises(ValueError):
        conditional_charfun(0.0, 0.0, -0.1)


def test_root_property_over_grid():
    rng = np.random.default_rng(10)
    vgrid = np.linspace(0.0, 1.0, 21)
    for _ in range(50):
        w = complex(rng.normal(), 0.3 * rng.normal())
        s = complex(rng.normal(), 0.3 * rng.normal())
        for br in (Branch.PLUS, Branch.MINUS):
            u = root_u(w, s, br).value
            err = np.max(np.abs(conditional_charfun(u, 0.0, vgrid)
                                - conditional_charfun(w, s, vgrid)))
            assert err < 1e-12


def test_identity_rhs():
    pref, inner = charfun_identity_rhs(0.0, 0.0, 4.7, 0.0, Branch.PLUS)
    assert pref == 1.0 and inner == 0.0
    # at s=0 the plus root is u = omega for real omega, so the prefactor is 1
    pref, inner = charfun_identity_rhs(0.8, 0.0, 4.7, 0.0, Branch.PLUS)
    assert abs(inner - 0.8) < 1e-14 and abs(pref - 1.0) < 1e-13


def test_discriminant_zeros_solve_quadratic():
    for s in (0.0, 0.3 - 0.2j, 1.0j):
        for z in discriminant_zeros(s):
            assert abs(0.25 - z * z - 1j * z + 2j * s) < 1e-12
