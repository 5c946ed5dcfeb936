import numpy as np
import pytest

from qvbarrier.dual import Dual2


def random_jet(rng):
    return Dual2(*(complex(rng.normal(), rng.normal()) for _ in range(6)))


def jets_close(a, b, tol=1e-12):
    for j, k in [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        assert abs(a.partial(j, k) - b.partial(j, k)) < tol


def test_constant_partials_vanish():
    c = Dual2.const(2.0 + 1.0j)
    for jk in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]:
        assert c.partial(*jk) == 0.0


def test_variable_seeding():
    a = Dual2.var_a(3.0 + 0.5j)
    assert a.partial(1, 0) == 1.0 and a.partial(0, 1) == 0.0
    b = Dual2.var_b(-1.0j)
    assert b.partial(0, 1) == 1.0 and b.partial(1, 0) == 0.0


def test_product_rule_random_triples():
    rng = np.random.default_rng(7)
    for _ in range(50):
        f, g, h = (random_jet(rng) for _ in range(3))
        jets_close((f * g) * h, f * (g * h))
        jets_close(f * (g + h), f * g + f * h)


def test_reciprocal_roundtrip():
    rng = np.random.default_rng(11)
    for _ in range(20):
        f = random_jet(rng)
        jets_close(f * f.reciprocal(), Dual2.const(1.0 + 0j), tol=1e-10)


def test_chain_rules_against_finite_differences():
    h1, h2 = 1e-6, 1e-4   # wider step for double differencing (roundoff floor)

    def eval_fn(fn, a, b):
        return fn(Dual2.var_a(a) + 2.0 * Dual2.var_b(b))

    for fn_name in ("exp", "sqrt", "sinh", "cosh"):
        a0, b0 = 0.7 + 0.2j, 0.3 - 0.1j
        fn = lambda z, n=fn_name: getattr(z, n)()
        jet = eval_fn(fn, a0, b0)
        prim = lambda a, b, n=fn_name: getattr(np, n)(a + 2.0 * b + 0j)
        fd_a = (prim(a0 + h1, b0) - prim(a0 - h1, b0)) / (2 * h1)
        fd_b = (prim(a0, b0 + h1) - prim(a0, b0 - h1)) / (2 * h1)
        fd_aa = (prim(a0 + h2, b0) - 2 * prim(a0, b0) + prim(a0 - h2, b0)) / h2 ** 2
        fd_ab = (prim(a0 + h2, b0 + h2) - prim(a0 + h2, b0 - h2)
                 - prim(a0 - h2, b0 + h2) + prim(a0 - h2, b0 - h2)) / (4 * h2 * h2)
        assert abs(jet.fa - fd_a) < 1e-8
        assert abs(jet.fb - fd_b) < 1e-8
        assert abs(jet.faa - fd_aa) < 1e-5
        assert abs(jet.fab - fd_ab) < 1e-5


def test_pow_int_matches_repeated_product():
    rng = np.random.default_rng(3)
    f = random_jet(rng)
    jets_close(f.pow_int(3), f * f * f, tol=1e-11)
    jets_close(f.pow_int(0), Dual2.const(1.0 + 0j))


def test_array_components_broadcast():
    xs = np.linspace(-1.0, 1.0, 5)
    jet = (Dual2.var_a(0.5) * Dual2.const(xs)).exp()
    assert jet.f.shape == (5,)
    np.testing.assert_allclose(jet.fa, xs * np.exp(0.5 * xs), rtol=1e-13)
    np.testing.assert_allclose(jet.faa, xs ** 2 * np.exp(0.5 * xs), rtol=1e-13)


def test_op_partial_sign_convention():
    # (-i d/da)(-i d/db) e^{i(a+b)} = e^{i(a+b)} at a=b=0
    jet = (1j * (Dual2.var_a(0.0) + Dual2.var_b(0.0))).exp()
    assert abs(jet.op_partial(1, 1) - 1.0) < 1e-14
    assert abs(jet.op_partial(2, 0) - 1.0) < 1e-14


def test_partial_order_guard():
    with pytest.raises(ValueError):
        Dual2.const(1.0).partial(3, 0)
