import numpy as np
import pytest
from hypothesis import given, strategies as st

from unsharp import measures
from unsharp.observables import (
    CompletenessError,
    EffectNotPsdError,
    InvalidPovmError,
    InvalidStateError,
    Povm,
    coarse_grain,
    computational_pvm,
    conjugate_by_unitary,
    convex_combine,
    density_matrix,
    depolarize_dual,
    fuzzify_white_noise,
    is_pvm,
    projective_measurement,
    relabel,
    trivial_observable,
)
from unsharp.rng import substream
from unsharp.search import random_povm, random_unitary

from conftest import povm_example1, povm_example2_b

H = np.array([[1, 1], [1, -1]]) / np.sqrt(2)


def same(a: Povm, b: Povm, tol=1e-12):
    return a.n == b.n and all(np.max(np.abs(x - y)) <= tol for x, y in zip(a, b))


def test_example1_is_valid(example1):
    assert example1.n == 3 and example1.dim == 3
    assert example1.labels == ("1", "2", "3")


def test_single_outcome_identity_is_valid():
    p = Povm([np.eye(2)])
    assert p.n == 1 and is_pvm(p)


def test_completeness_error_reports_deviation():
    with pytest.raises(CompletenessError) as info:
        Povm([np.diag([0.6, 0.6]), np.diag([0.6, 0.6])])
    assert info.value.deviation == pytest.approx(0.2)
    assert "completeness" in str(info.value)


def test_negative_effect_rejected():
    with pytest.raises(EffectNotPsdError) as info:
        Povm([np.diag([1.1, 0.5]), np.diag([-0.1, 0.5])])
    assert info.value.index == 1


def test_non_hermitian_effect_rejected():
    with pytest.raises(InvalidPovmError):
        Povm([np.array([[1, 0.5], [0, 0]]), np.array([[0, -0.5], [0, 1]])])


def test_shape_mismatch_and_empty_rejected():
    with pytest.raises(InvalidPovmError):
        Povm([np.eye(2), np.zeros((3, 3))])
    with pytest.raises(InvalidPovmError):
        Povm([])
    with pytest.raises(InvalidPovmError):
        Povm([np.eye(2)], labels=["a", "b"])


def test_effects_are_read_only(example1):
    with pytest.raises(ValueError):
        example1.effects[0][0, 0] = 1.0


def test_is_pvm_examples(example1):
    assert is_pvm(computational_pvm(3))
    assert not is_pvm(example1)
    assert not is_pvm(trivial_observable(2, 2))


def test_trivial_observable():
    t = trivial_observable(2, 2)
    assert all(np.allclose(a, np.eye(2) / 2) for a in t)
    assert same(trivial_observable(1, 3), Povm([np.eye(3)]))
    assert measures.el(trivial_observable(4, 2)) == pytest.approx(0.75, abs=1e-15)


def test_unitary_conjugation_examples(example1):
    assert same(conjugate_by_unitary(example1, np.eye(3)), example1)
    rotated = conjugate_by_unitary(computational_pvm(2), H)
    expected = projective_measurement(H)
    assert same(rotated, expected)


def test_conjugation_rejects_non_unitary():
    with pytest.raises(ValueError):
        conjugate_by_unitary(computational_pvm(2), np.diag([1, 2]))


@given(st.integers(0, 2**32 - 1), st.integers(1, 4), st.integers(2, 3))
def test_measures_invariant_under_unitaries(seed, n, d):
    rng = substream(seed, 1)
    p = random_povm(n, d, rng)
    q = conjugate_by_unitary(p, random_unitary(d, rng))
    for f in (measures.el, measures.elprime, measures.e, measures.eprime, measures.luo_f):
        assert abs(f(p) - f(q)) <= 1e-10


def test_fuzzify_endpoints(example1):
    assert same(fuzzify_white_noise(example1, 1.0), example1)
    assert same(fuzzify_white_noise(example1, 0.0), trivial_observable(3, 3))


@given(st.integers(0, 2**32 - 1), st.floats(0.01, 1), st.floats(0, 1))
def test_fuzzify_composition(seed, lam1, frac):
    p = random_povm(3, 2, substream(seed, 2))
    lam2 = lam1 * frac
    twice = fuzzify_white_noise(fuzzify_white_noise(p, lam1), lam2 / lam1)
    assert same(twice, fuzzify_white_noise(p, lam2), tol=1e-12)


def test_fuzzify_rejects_out_of_range(example1):
    with pytest.raises(ValueError):
        fuzzify_white_noise(example1, 1.5)


def test_coarse_grain_example1(example1):
    b = coarse_grain(example1, [[0, 1], [2]])
    assert same(b, Povm([np.diag([1.0, 1, 0]), np.diag([0, 0, 1.0])]))
    assert is_pvm(b)
    assert b.labels == ("1+2", "3")


def test_coarse_grain_singletons_and_trivial(example1):
    assert same(coarse_grain(example1, [[0], [1], [2]]), example1)
    assert same(coarse_grain(trivial_observable(4, 2), [[0, 1], [2, 3]]), trivial_observable(2, 2))


@pytest.mark.parametrize("partition", [[[0, 1]], [[0, 1], [1, 2]], [[0], [1], [2], []]])
def test_coarse_grain_rejects_bad_partitions(example1, partition):
    with pytest.raises(ValueError):
        coarse_grain(example1, partition)


def test_convex_combine_example2():
    a, b = povm_example1(), povm_example2_b()
    for lam in (0.0, 0.3, 1.0):
        c = convex_combine(a, b, lam)
        np.testing.assert_allclose(c[0], np.diag([1 - lam / 2, lam / 4, 0]), atol=1e-15)
        np.testing.assert_allclose(c[1], np.diag([lam / 2, 1 - lam / 4, 0]), atol=1e-15)
        np.testing.assert_allclose(c[2], np.diag([0, 0, 1.0]), atol=1e-15)
    assert same(convex_combine(a, b, 1.0), a)
    assert same(convex_combine(a, b, 0.0), b)
    assert same(convex_combine(a, a, 0.37), a)


def test_depolarize_dual():
    pvm = computational_pvm(2)
    assert same(depolarize_dual(pvm, 1.0), pvm)
    half = depolarize_dual(pvm, 0.5)
    for a, h in zip(pvm, half):
        np.testing.assert_allclose(h, a / 2 + np.trace(a).real * np.eye(2) / 4, atol=1e-15)
    np.testing.assert_allclose(sum(half.effects), np.eye(2), atol=1e-15)


def test_relabel_permutes(example1):
    r = relabel(example1, [2, 0, 1])
    assert r.labels == ("3", "1", "2")
    np.testing.assert_array_equal(r[0], example1[2])
    with pytest.raises(ValueError):
        relabel(example1, [0, 0, 1])


def test_density_matrix_validation():
    density_matrix(np.eye(2) / 2)
    with pytest.raises(InvalidStateError):
        density_matrix(np.eye(2))
    with pytest.raises(InvalidStateError):
        density_matrix(np.diag([1.5, -0.5]))
    with pytest.raises(InvalidStateError):
        density_matrix(np.array([[0.5, 1], [0, 0.5]]))
