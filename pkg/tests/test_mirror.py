from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.models.mirror import (
    max_modulus_scan,
    mirror_generator,
    mirror_structure_constant,
    phase_compatible,
    potential_vs_mirror,
    psi_abs_at,
    rescale_const,
    verify_functor,
)
from src.models.morse import build_category
from src.utils.errors import ExactDomainError
from src.utils.exact import factor_positive, pe_eq, pe_inv, pe_mul_pow, pos_exact
from src.utils.homs import lattice_k
from src.utils.lattice import build_weights, random_interior_points

F = Fraction
CORPUS = [(1, 1), (3, 2), (2, 3), (1, 1, 2), (1, 2, 3), (1, 1, 1, 1)]


def test_psi_examples(w32):
    assert psi_abs_at(w32, 0, 2, lattice_k(w32, (0, 1)), 0, (F(6),)).is_empty()
    value = psi_abs_at(w32, 0, 5, lattice_k(w32, (1, 1)), 0, (F(12, 5),))
    expected = pe_mul_pow([(factor_positive(F(3, 5)), F(1, 4)), (factor_positive(F(2, 5)), F(1, 6))])
    assert pe_eq(value, expected)
    assert psi_abs_at(w32, 1, 1, lattice_k(w32, (0, 0)), 0, (F(2),)).is_empty()


def test_psi_zero_base_with_exponent(w32):
    with pytest.raises(ExactDomainError):
        psi_abs_at(w32, 0, 3, lattice_k(w32, (1, 0)), 0, (F(6),))


def test_rescale_constants(w32):
    assert rescale_const(w32, 0, 2, lattice_k(w32, (0, 1))).is_empty()
    assert rescale_const(w32, 3, 3, lattice_k(w32, (0, 0))).is_empty()
    c = rescale_const(w32, 0, 5, lattice_k(w32, (1, 1)))
    assert pe_eq(c, pe_inv(psi_abs_at(w32, 0, 5, lattice_k(w32, (1, 1)), 0, (F(12, 5),))))


def test_structure_constant_example(w32):
    value = mirror_structure_constant(w32, 0, 2, 5, lattice_k(w32, (0, 1)), lattice_k(w32, (1, 0)))
    assert pe_eq(value, pos_exact({2: F(1, 6), 3: F(1, 4), 5: F(-5, 12)}))


def test_structure_constant_trivial_cases(w32):
    assert mirror_structure_constant(w32, 0, 2, 2, lattice_k(w32, (0, 1)), lattice_k(w32, (0, 0))).is_empty()
    # v_ab = v_bc = v_ac = 6
    assert mirror_structure_constant(w32, 0, 2, 4, lattice_k(w32, (0, 1)), lattice_k(w32, (0, 1))).is_empty()


def test_mirror_generator_phase(w112):
    g_ab = mirror_generator(w112, 0, 1, lattice_k(w112, (0, 1, 0)))
    g_bc = mirror_generator(w112, 1, 3, lattice_k(w112, (0, 0, 1)))
    g_ac = mirror_generator(w112, 0, 3, lattice_k(w112, (0, 1, 1)))
    assert phase_compatible(g_ab, g_bc, g_ac)
    assert not phase_compatible(g_ab, g_bc, mirror_generator(w112, 0, 3, lattice_k(w112, (1, 0, 1))))
    assert pe_eq(g_ac.c, pos_exact({2: F(-1, 2), 3: F(3, 4)}))


k_112 = st.sampled_from([(1, 0, 0), (0, 1, 0), (2, 0, 0), (0, 0, 1), (1, 1, 0)])


@settings(max_examples=40, deadline=None)
@given(k_112, k_112, st.integers(0, 10**6))
def test_psi_is_monomial(k1, k2, seed):
    W = build_weights((1, 1, 2))
    K1, K2 = lattice_k(W, k1), lattice_k(W, k2)
    K12 = lattice_k(W, [x + y for x, y in zip(k1, k2)])
    x = random_interior_points(W, 0, 1, np.random.default_rng(seed))[0]
    product = pe_mul_pow([(psi_abs_at(W, 0, K1.d, K1, 0, x), 1),
                          (psi_abs_at(W, K1.d, K1.d + K2.d, K2, 0, x), 1)])
    assert pe_eq(product, psi_abs_at(W, 0, K12.d, K12, 0, x))


def test_pointwise_identity(w112):
    K = lattice_k(w112, (1, 1, 0))
    for x in random_interior_points(w112, 1, 5, np.random.default_rng(11)):
        assert potential_vs_mirror(w112, 2, 4, K, 1, x)


@pytest.mark.parametrize("q", CORPUS)
def test_functor_on_corpus(q):
    report = verify_functor(build_category(build_weights(q)), seed=5, threads=2)
    assert report.passed, report.failures[:3]
    assert report.checked > 0


def test_functor_identity_pair(w11):
    cat = build_category(w11)
    report = verify_functor(cat, points=2)
    assert report.passed
    identity_products = [p for p in cat.products if p.src1.a == p.src1.b and p.src2.a == p.src2.b]
    assert all(p.weight.is_empty() for p in identity_products)


def test_scan_3_2_vertex(w32):
    scan = max_modulus_scan(w32, 0, 2, lattice_k(w32, (0, 1)), 100)
    assert scan.passed
    assert scan.argmax == pytest.approx([6.0])
    assert scan.max_value == pytest.approx(1.0, abs=1e-12)
    assert scan.points == 101


def test_scan_1_1_2_interior(w112):
    scan = max_modulus_scan(w112, 0, 3, lattice_k(w112, (0, 1, 1)), 50)
    assert scan.passed
    assert scan.v == pytest.approx([4 / 3, 4 / 3])
    assert np.max(np.abs(np.array(scan.argmax) - np.array(scan.v))) <= 4 / 50


def test_scan_identity_flagged(w32):
    scan = max_modulus_scan(w32, 2, 2, lattice_k(w32, (0, 0)), 100)
    assert scan.identity and scan.passed


@pytest.mark.parametrize("cat_name", ["cat32", "cat112"])
def test_scan_every_generator(cat_name, request):
    cat = request.getfixturevalue(cat_name)
    m = 100 if cat.weights.n == 1 else 50
    for basis in cat.homs:
        if basis.a < basis.b:
            for g in basis.gens:
                assert max_modulus_scan(cat.weights, g.a, g.b, g.K, m).passed, g.K.k
