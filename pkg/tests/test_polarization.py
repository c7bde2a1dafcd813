from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from rankforge.partition import prank_exact
from rankforge.polarization import (
    PolyDense,
    cs_amplification_check,
    difference_table,
    polarize,
    substitute_decomposition,
)
from rankforge.field import PrimeField


def all_points(p, n):
    return [np.array(v, dtype=np.int64) for v in product(range(p), repeat=n)]


def random_homogeneous(p, n, d, seed):
    rng = np.random.default_rng(seed)
    exps = [e for e in product(range(p), repeat=n) if sum(e) == d]
    terms = {e: int(rng.integers(0, p)) for e in exps}
    return PolyDense(p, n, terms)


def test_poly_validation():
    with pytest.raises(ValueError):
        PolyDense(4, 2, {})
    with pytest.raises(ValueError):
        PolyDense(3, 2, {(3, 0): 1})
    f = PolyDense(3, 2, {(1, 1): 1, (2, 0): 0})
    assert f.terms == {(1, 1): 1}
    assert f.degree == 2


def test_poly_evaluate_matches_naive():
    f = PolyDense(5, 2, {(2, 1): 3, (1, 0): 2, (0, 0): 4})
    for x in all_points(5, 2):
        naive = (3 * x[0] ** 2 * x[1] + 2 * x[0] + 4) % 5
        assert f.evaluate(x) == naive
    X = np.vstack(all_points(5, 2))
    assert np.array_equal(f.evaluate_many(X), [f.evaluate(x) for x in X])


def test_polarize_square_over_f3():
    f = PolyDense(3, 1, {(2,): 1})
    sym = polarize(f)
    assert sym.d == 2
    # alpha(x, y) = xy
    assert sym.form.evaluate([(1,), (1,)])[0] == 1
    assert sym.form.evaluate([(2,), (1,)])[0] == 2
    assert sym.check_symmetry()
    assert sym.diagonal().terms == f.terms


def test_polarize_product_over_f5():
    f = PolyDense(5, 3, {(1, 1, 1): 1})
    sym = polarize(f)
    assert sym.check_symmetry()
    # round trip exact on all 125 points
    diag = sym.diagonal()
    X = np.vstack(all_points(5, 3))
    assert np.array_equal(diag.evaluate_many(X), f.evaluate_many(X))


def test_polarize_zero_and_linear():
    z = polarize(PolyDense(3, 2, {}))
    assert z.form.is_zero()
    lin = PolyDense(3, 2, {(1, 0): 2})
    sym = polarize(lin)
    assert sym.d == 1
    assert sym.diagonal().terms == lin.terms


def test_polarize_characteristic_error():
    with pytest.raises(ValueError):
        polarize(PolyDense(2, 1, {(1,): 1}), degree=2)
    # degree 2 over F_2 is not polarizable (d < p fails)
    with pytest.raises(ValueError):
        cs_amplification_check(PolyDense(2, 2, {(1, 1): 1}))
    # but d = 2 < 3 is fine
    cs_amplification_check(PolyDense(3, 1, {(2,): 1}))


def test_polarize_round_trip_random():
    for seed in range(20):
        p, n, d = [(3, 2, 2), (5, 2, 2), (5, 2, 3), (3, 3, 2)][seed % 4]
        f = random_homogeneous(p, n, d, [91, seed])
        sym = polarize(f, d)
        assert sym.check_symmetry()
        X = np.vstack(all_points(p, n))
        assert np.array_equal(sym.diagonal().evaluate_many(X), f.evaluate_many(X))


def test_polarize_symmetry_all_permutations_d3():
    from itertools import permutations

    f = random_homogeneous(5, 2, 3, 17)
    sym = polarize(f, 3)
    C = sym.form.coeffs[..., 0]
    for perm in permutations(range(3)):
        assert np.array_equal(C, C.transpose(perm))


def test_difference_table_zero_poly_mean():
    # f = x^2 over F_3: signed sum is f(x+y) - f(x) with mean checked by hand
    f = PolyDense(3, 1, {(2,): 1})
    table = difference_table(f, 2)
    field = PrimeField(3)
    counts = np.bincount(table, minlength=3).astype(float)
    mid = (counts * field.char_table).sum() / table.size
    # direct double loop oracle
    acc = 0j
    for x in range(3):
        for y in range(3):
            acc += field.character(((x + y) ** 2 - x ** 2) % 3)
    assert mid == pytest.approx(acc / 9)


def test_amplification_example_f3_xy():
    f = PolyDense(3, 2, {(1, 1): 1})
    rep = cs_amplification_check(f)
    assert rep.abs_bias_power == pytest.approx(1 / 9)
    assert rep.signed_sum_mean == pytest.approx(1 / 9)
    assert rep.form_bias == Fraction(1, 9)
    assert rep.ok


def test_amplification_zero_poly():
    rep = cs_amplification_check(PolyDense(3, 2, {}))
    assert rep.ok and rep.form_bias == 1


def test_amplification_random():
    for seed in range(15):
        p, n, d = [(3, 2, 2), (5, 2, 2), (5, 1, 3), (3, 3, 2)][seed % 4]
        f = random_homogeneous(p, n, d, [93, seed])
        if f.is_zero() or f.degree < 2:
            continue
        assert cs_amplification_check(f).ok


def test_substitute_product_over_f5():
    f = PolyDense(5, 3, {(1, 1, 1): 1})
    sym = polarize(f)
    rep = prank_exact(sym.form, r_max=4)
    assert rep.exact and rep.prank == 3
    sub = substitute_decomposition(rep.witness)
    assert sub.ok
    # factors have degree < 3 and multiply back pointwise
    for b, g in sub.factors:
        assert b.degree < 3 and g.degree < 3


def test_substitute_rank1_product():
    # a partition-rank-1 form gives f as a product of two lower-degree polys
    f = PolyDense(3, 2, {(2, 0): 1})  # x_1^2 polarizes to x_1 y_1
    sym = polarize(f)
    rep = prank_exact(sym.form, r_max=3)
    assert rep.exact and rep.prank == 1
    sub = substitute_decomposition(rep.witness)
    assert len(sub.factors) == 1
    b, g = sub.factors[0]
    assert b.degree == 1 and g.degree == 1


def test_substitute_zero():
    f = PolyDense(3, 2, {})
    sym = polarize(f)
    rep = prank_exact(sym.form)
    sub = substitute_decomposition(rep.witness)
    assert sub.factors == ()
