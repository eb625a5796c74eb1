import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import entropy as scipy_entropy

from polarcast.prob import (
    DivergenceUndefinedError,
    DomainError,
    JointTable,
    Pmf,
    ShapeError,
    bhattacharyya,
    binary_entropy,
    conditional_entropy,
    entropy,
    kl_divergence,
    mutual_information,
    pinsker_bound,
    star_convolve,
    total_variation,
)


def pmfs(size=None, min_size=2, max_size=6):
    sizes = st.just(size) if size else st.integers(min_size, max_size)
    return sizes.flatmap(
        lambda k: st.lists(st.floats(0.0, 1.0), min_size=k, max_size=k)
        .filter(lambda w: sum(w) > 1e-3)
        .map(lambda w: np.array(w) / np.sum(w))
    )


def joints(shape=(2, 3, 2)):
    k = int(np.prod(shape))
    names = ("A", "B", "C")[: len(shape)]
    return pmfs(size=k).map(lambda w: JointTable(w.reshape(shape), names))


def test_binary_entropy_values():
    assert binary_entropy(0.5) == 1.0
    assert binary_entropy(0.0) == 0.0 and binary_entropy(1.0) == 0.0
    # h_b(1/3) = log2 3 - 2/3
    assert binary_entropy(1 / 3) == pytest.approx(math.log2(3) - 2 / 3, abs=1e-15)
    assert binary_entropy(0.11) == pytest.approx(0.4999159582, abs=1e-9)
    with pytest.raises(DomainError):
        binary_entropy(1.5)
    with pytest.raises(DomainError):
        binary_entropy(float("nan"))


def test_star_convolve():
    assert star_convolve(0.25, 0.05) == pytest.approx(0.275)
    assert star_convolve(0.0, 0.3) == pytest.approx(0.3)
    assert star_convolve(0.5, 0.1) == pytest.approx(0.5)


@given(pmfs())
def test_entropy_matches_scipy(p):
    assert entropy(p) == pytest.approx(scipy_entropy(p, base=2), abs=1e-12)
    assert 0.0 <= Pmf(p).entropy() <= math.log2(p.size) + 1e-12


@given(joints())
def test_chain_rule_and_bounds(j):
    h_abc = entropy(j.weights)
    h_bc = entropy(j.marginal(["B", "C"]))
    assert conditional_entropy(j, "A", ["B", "C"]) == pytest.approx(h_abc - h_bc, abs=1e-12)
    assert conditional_entropy(j, "A", ["B"]) >= conditional_entropy(j, "A", ["B", "C"]) - 1e-12
    assert 0.0 <= conditional_entropy(j, "A") <= 1.0 + 1e-12


@given(joints())
def test_mutual_information_identities(j):
    i_ab = mutual_information(j, ["A"], ["B"])
    assert i_ab == pytest.approx(mutual_information(j, ["B"], ["A"]), abs=1e-12)
    assert i_ab == pytest.approx(
        max(0.0, conditional_entropy(j, "A") - conditional_entropy(j, "A", ["B"])), abs=1e-12
    )
    # chain rule I(A;BC) = I(A;B) + I(A;C|B)
    lhs = mutual_information(j, ["A"], ["B", "C"])
    rhs = i_ab + mutual_information(j, ["A"], ["C"], ["B"])
    assert lhs == pytest.approx(rhs, abs=1e-10)


def test_mutual_information_bsc():
    # uniform input through BSC(p): I = 1 - h_b(p)
    p = 0.1
    w = 0.5 * np.array([[1 - p, p], [p, 1 - p]])
    assert mutual_information(JointTable(w), [0], [1]) == pytest.approx(1 - binary_entropy(p), abs=1e-14)


@given(joints((2, 4)))
def test_bhattacharyya_entropy_sandwich(j):
    z = bhattacharyya(j)
    h = conditional_entropy(j, 0, [1])
    assert 0.0 <= z <= 1.0
    assert z * z <= h + 1e-12
    assert h <= math.log2(1 + z) + 1e-12


def test_bhattacharyya_values():
    assert bhattacharyya(np.array([0.5, 0.5])) == pytest.approx(1.0)
    assert bhattacharyya(np.array([[0.5, 0.0], [0.0, 0.5]])) == 0.0
    p = 0.1
    w = 0.5 * np.array([[1 - p, p], [p, 1 - p]])
    assert bhattacharyya(w) == pytest.approx(2 * math.sqrt(p * (1 - p)))
    with pytest.raises(ShapeError):
        bhattacharyya(np.full((3, 2), 1 / 6))


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@given(pmfs(size=4), pmfs(size=4))
def test_pinsker(p, q):
    try:
        d = kl_divergence(p, q)
    except DivergenceUndefinedError:
        return
    assert total_variation(p, q) <= pinsker_bound(d) + 1e-9


def test_divergence_errors_and_values():
    assert kl_divergence([0.5, 0.5], [0.5, 0.5]) == 0.0
    assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(1.0)
    with pytest.raises(DivergenceUndefinedError):
        kl_divergence([0.5, 0.5], [1.0, 0.0])
    with pytest.raises(ShapeError):
        total_variation([0.5, 0.5], [1 / 3, 1 / 3, 1 / 3])
    assert total_variation([1.0, 0.0], [0.0, 1.0]) == 2.0


def test_pmf_and_table_validation():
    with pytest.raises(DomainError):
        Pmf(np.array([0.5, 0.6]))
    with pytest.raises(DomainError):
        Pmf(np.array([1.5, -0.5]))
    with pytest.raises(ShapeError):
        Pmf(np.array([]))
    with pytest.raises(ShapeError):
        JointTable(np.full((2, 2), 0.25), ("A", "A"))
    j = JointTable(np.full((2, 3), 1 / 6), ("X", "Y"))
    assert j.dims == (2, 3)
    assert j.pair_table("Y", ["X"]).shape == (3, 2)
    with pytest.raises(ShapeError):
        j.axis("Z")
    with pytest.raises(ShapeError):
        conditional_entropy(j, "X", ["X"])
    assert Pmf.uniform(4).entropy() == pytest.approx(2.0)
