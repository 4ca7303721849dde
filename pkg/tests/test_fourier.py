import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from thinsets.core import BaseSequence, IntegerSet, MeanSchedule, sample_set
from thinsets.errors import InvalidInput, ResourceExceeded, VerificationFailed
from thinsets.fourier import (
    NormReport,
    TrigPolynomial,
    coefficient_rearrangement,
    dyadic_block_index,
    l1_norm,
    lq_norm,
    lq_norm_exact_even,
    orlicz_psi2_norm,
    partial_sum,
    phi_inverse,
    pseudo_complement,
    psi_parameter,
    rademacher_norm,
    riesz_product,
    riesz_tail_mass,
    square_function,
    sup_norm,
    vallee_poussin,
)
from thinsets.relations import is_quasi_independent

from oracles import quadruples, riesz_coeffs, tuple_count


@st.composite
def polys(draw, max_degree=512, max_terms=24):
    k = draw(st.integers(1, max_terms))
    fr = draw(st.lists(st.integers(-max_degree, max_degree), min_size=k, max_size=k))
    re = draw(st.lists(st.floats(-5, 5), min_size=k, max_size=k))
    im = draw(st.lists(st.floats(-5, 5), min_size=k, max_size=k))
    f = TrigPolynomial(fr, np.array(re) + 1j * np.array(im))
    if f.is_zero:
        f = TrigPolynomial([0], [1.0])
    return f


# --- polynomial basics ---------------------------------------------------------


def test_repeated_frequencies_merge_and_zeros_drop():
    f = TrigPolynomial([3, 1, 3, 2], [1, 2, -1, 0])
    assert f.freqs.tolist() == [1] and f.coeff(1) == 2


@given(polys())
def test_json_round_trip(f):
    assert TrigPolynomial.from_json(f.to_json()) == f


@settings(max_examples=50)
@given(polys(max_degree=64), st.floats(0, 2 * math.pi))
def test_grid_values_match_direct_evaluation(f, t):
    G = 256
    vals = f.grid_values(G)
    j = np.arange(0, G, 37)
    assert np.allclose(vals[j], f(2 * np.pi * j / G), atol=1e-9)
    assert np.allclose(f(t), np.sum(f.coeffs * np.exp(1j * f.freqs * t)), atol=1e-9)


def test_product_is_convolution():
    f = TrigPolynomial.from_dict({1: 1, 2: 1})
    g = TrigPolynomial.from_dict({-1: 1, 3: 2})
    h = f * g
    assert {n: h.coeff(n) for n in h.freqs.tolist()} == {0: 1, 1: 1, 4: 2, 5: 2}


# --- sup and L^q norms -------------------------------------------------------------


@pytest.mark.parametrize(
    "f, value",
    [(TrigPolynomial.exponential(5), 1.0), (TrigPolynomial.dirichlet(8), 17.0),
     (TrigPolynomial.from_dict({0: 1, 3: 0.5, -3: 0.5}), 2.0)],
)
def test_sup_norm_examples(f, value):
    rep = sup_norm(f)
    assert rep.value == pytest.approx(value, abs=1e-12)
    assert rep.value <= value + 1e-12 <= rep.value + rep.error_estimate + 1e-12


@settings(max_examples=40, deadline=None)
@given(polys(max_degree=200))
def test_sup_norm_oversampling_consistency(f):
    a, b = sup_norm(f, 4), sup_norm(f, 8)
    assert abs(b.value - a.value) <= a.error_estimate + 1e-9 * a.value


def test_lq_examples():
    assert lq_norm(TrigPolynomial.indicator([1, 2, 3]), 4).value == pytest.approx(19**0.25, rel=1e-12)
    assert lq_norm(TrigPolynomial.indicator([1, 2]), 4).value == pytest.approx(6**0.25, rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(polys())
def test_parseval(f):
    l2 = f.l2_norm_sq()
    assert abs(lq_norm(f, 2).value ** 2 - l2) <= 1e-9 * l2


@settings(max_examples=100, deadline=None)
@given(polys(max_degree=128))
def test_lq_monotone_in_q(f):
    v = [lq_norm(f, q).value for q in (2, 4, 6, 8)]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(v, v[1:]))


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(1, 300), min_size=1, max_size=12), st.sampled_from([4, 6]))
def test_grid_quadrature_equals_exact_count(A, q):
    exact = lq_norm_exact_even(A, q)
    assert exact == tuple_count(A, q)
    assert lq_norm(TrigPolynomial.indicator(A), q).value == pytest.approx(exact ** (1 / q), rel=1e-9)


@pytest.mark.parametrize("N", range(2, 13))
def test_interval_fourth_moment(N):
    ref = (2 * N**3 + N) // 3
    assert quadruples(N) == ref
    assert lq_norm_exact_even(range(1, N + 1), 4) == ref


def test_exact_even_examples_and_validation():
    assert lq_norm_exact_even([1, 2, 3], 4) == 19
    assert lq_norm_exact_even([1, 2], 4) == 6
    assert all(lq_norm_exact_even([77], q) == 1 for q in (2, 4, 6, 8))
    with pytest.raises(InvalidInput):
        lq_norm_exact_even([1, 2], 3)
    with pytest.raises(ResourceExceeded):
        lq_norm_exact_even(range(1, 200), 8, budget=10**5)


def test_lq_grid_too_small():
    with pytest.raises(InvalidInput):
        lq_norm(TrigPolynomial.indicator([1, 100]), 4, grid_size=16)


# --- psi and Orlicz norm ----------------------------------------------------------


def test_psi_singleton():
    rep = psi_parameter([42])
    assert rep.value == pytest.approx(1 / math.sqrt(2), abs=1e-9)
    assert rep.extra["argmax_p"] == 2


@pytest.mark.parametrize("N", [8, 64, 512, 4096])
def test_psi_interval_bound(N):
    assert psi_parameter(range(1, N + 1)).value <= N / math.sqrt(2 * math.log(N))


def test_psi_on_two_point_grid_takes_the_larger_exact_value():
    rep = psi_parameter([1, 2, 3], [2, 4])
    two, four = math.sqrt(3) / math.sqrt(2), 19**0.25 / 2
    assert rep.value == pytest.approx(max(two, four), rel=1e-12)
    assert rep.extra["argmax_p"] == 2


def test_orlicz_constant_and_exponential():
    c = 3.0
    assert orlicz_psi2_norm(TrigPolynomial([0], [c])).value == pytest.approx(c / math.sqrt(math.log(2)), rel=1e-7)
    assert orlicz_psi2_norm(TrigPolynomial.exponential(9)).value == pytest.approx(1 / math.sqrt(math.log(2)), rel=1e-7)


def test_orlicz_comparable_to_psi():
    A = range(1, 65)
    ratio = orlicz_psi2_norm(TrigPolynomial.indicator(A)).value / psi_parameter(A).value
    assert 1 / 4 <= ratio <= 4


# --- kernels and Riesz products ------------------------------------------------------


def test_vallee_poussin():
    V = vallee_poussin(2)
    assert (V.coeff(2), V.coeff(3), V.coeff(4)) == (1, 0.5, 0)
    assert vallee_poussin(1).coeff(0) == 1
    assert l1_norm(vallee_poussin(8)).value <= 3 + 1e-6


def test_riesz_examples():
    R = riesz_product([3, 5])
    assert [R.coeff(n) for n in (0, 3, 5, 8, 2)] == [1, 0.5, 0.5, 0.25, 0.25]
    assert riesz_product([1, 2, 4]).coeff(7) == 0.125


@settings(max_examples=60, deadline=None)
@given(st.sets(st.integers(1, 200), min_size=1, max_size=7))
def test_riesz_coefficients_exact(B):
    if not is_quasi_independent(B):
        with pytest.raises(InvalidInput):
            riesz_product(B)
        return
    R = riesz_product(B)
    ref = {n: c for n, c in riesz_coeffs(sorted(B)).items() if c}
    assert {int(n): Fraction(float(c.real)) for n, c in zip(R.freqs, R.coeffs)} == ref
    assert R.coeff(0) == 1
    assert all(R.coeff(l).real >= 0.5 for l in B)
    vals = R.grid_values(4 * (2 * sum(B) + 2)).real
    assert vals.min() >= -1e-9
    assert l1_norm(R).value == pytest.approx(1.0, abs=1e-6)


def test_riesz_detects_relations_like_the_exact_test():
    rng = np.random.default_rng(5)
    for _ in range(100):
        B = rng.choice(np.arange(1, 40), size=rng.integers(2, 7), replace=False)
        try:
            riesz_product(B)
            raised = False
        except InvalidInput:
            raised = True
        assert raised == (not is_quasi_independent(B))


def test_riesz_truncation_tail_bound():
    B = [3**j for j in range(10)]
    full, cut = riesz_product(B), riesz_product(B, support_cap=4)
    dropped = (full - cut).l1_coeffs()
    assert 0 < dropped <= riesz_tail_mass(10, 4) + 1e-9


# --- pseudo-complements ----------------------------------------------------------------


def test_pseudo_complement_single_point():
    pc = pseudo_complement([5], [5, 9], 2)
    assert pc.mu.coeff(5) == pytest.approx(1.0)
    assert pc.mu.coeff(9) == 0
    assert pc.ok and pc.l1_norm <= 8


def test_pseudo_complement_catches_sum_in_lambda():
    with pytest.raises(VerificationFailed) as exc:
        pseudo_complement([5, 7], [5, 7, 12], 2)
    res = exc.value.result
    assert res.on_B_ok and not res.off_B_ok
    assert res.max_off_B == pytest.approx(0.5)


def test_pseudo_complement_norm_bound():
    assert pseudo_complement([5], [5], 2).l1_norm <= 8


def test_pseudo_complement_on_sample_tails():
    # B: the two largest elements of a sample above 2M, Lambda the whole sample
    s = MeanSchedule.t2_2(1.0)
    checked = 0
    for seed in range(50):
        lam = sample_set(s, BaseSequence.naturals(), 5000, seed)
        M = 27
        tail = lam.elements[lam.elements > 2 * M]
        if tail.size < 2:
            continue
        B = IntegerSet(tail[-2:])
        pc = pseudo_complement(B, lam, M, strict=False)
        assert pc.on_B_ok and pc.norm_ok
        checked += 1
    assert checked >= 40


def test_pseudo_complement_preconditions():
    with pytest.raises(InvalidInput):
        pseudo_complement([3], [3, 9], 2)
    with pytest.raises(InvalidInput):
        pseudo_complement([11], [5, 9], 2)


# --- Rademacher norm, partial sums, square function -----------------------------------


def test_rademacher_examples():
    assert rademacher_norm(TrigPolynomial.exponential(4), trials=3).value == 1.0
    assert rademacher_norm(TrigPolynomial.zero()).value == 0.0
    n = 64
    v = rademacher_norm(TrigPolynomial.indicator(range(1, n + 1)), trials=200, seed=1).value
    ref = math.sqrt(n * math.log(n))
    assert ref / 3 <= v <= 3 * ref


@settings(max_examples=20, deadline=None)
@given(polys(max_degree=100, max_terms=12), st.integers(0, 1000))
def test_rademacher_at_least_l2(f, seed):
    rep = rademacher_norm(f, trials=50, seed=seed)
    assert rep.value >= math.sqrt(f.l2_norm_sq()) * (1 - 1e-9) - 3 * rep.error_estimate


def test_partial_sum_examples():
    f = TrigPolynomial.from_dict({5: 1, 9: 1, -2: 3, 0: 4})
    assert partial_sum(f, 9, 9) == f
    assert partial_sum(TrigPolynomial.from_dict({5: 1, 9: 1}), 0, 6) == TrigPolynomial.exponential(5)
    assert partial_sum(f, 0, 0) == TrigPolynomial([0], [4])


def test_dyadic_labels():
    assert dyadic_block_index([0, 1, 2, 3, 4, 7, 8, -1, -5]).tolist() == [0, 1, 2, 2, 3, 3, 4, -1, -3]


def test_square_function_examples():
    assert np.allclose(square_function(TrigPolynomial.exponential(5)), 1.0)
    assert np.allclose(square_function(TrigPolynomial.from_dict({5: 1, 9: 1})), math.sqrt(2))


@settings(max_examples=40, deadline=None)
@given(polys(max_degree=300))
def test_square_function_preserves_l2(f):
    S = square_function(f)
    assert math.sqrt(np.mean(S**2)) == pytest.approx(math.sqrt(f.l2_norm_sq()), rel=1e-9)


# --- rearrangements --------------------------------------------------------------------


@given(st.floats(1e-3, 1e6), st.floats(0.1, 3))
def test_phi_inverse_inverts(y, alpha):
    x = float(phi_inverse(y, alpha))
    assert x * math.log1p(x) ** alpha == pytest.approx(y, rel=1e-8)


def test_rearrangement_examples():
    r = coefficient_rearrangement(TrigPolynomial.exponential(1), 1.0)
    assert r.astar.tolist() == [1.0]
    assert r.functional == pytest.approx(float(phi_inverse(1.0, 1.0)))
    n = 1000
    harmonic = TrigPolynomial(np.arange(1, n + 1), 1 / np.arange(1, n + 1))
    r = coefficient_rearrangement(harmonic, 1.0)
    assert np.all(np.diff(r.astar) <= 0)
    assert 0 < r.fitted_C <= 1
    assert coefficient_rearrangement(TrigPolynomial.zero(), 1.0).functional == 0


def test_norm_report_row():
    row = NormReport(1.5, "exact-count", 0, 0, 0.0, {"q": 4, "skip": [1]}).to_row()
    assert row["value"] == 1.5 and row["q"] == 4 and "skip" not in row
