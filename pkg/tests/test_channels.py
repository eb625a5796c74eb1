import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarcast.channels import (
    ConfigError,
    DeterministicBC,
    NoisyBC,
    UnsupportedChannelError,
    analytic_bec_bsc_class,
    bec_bsc,
    bec_kernel,
    blackwell,
    bsc_kernel,
    bsc_pair,
    check_permutation,
    classify,
    cover_rates,
    det_region_vertex,
    example2_chain,
    example2_rates,
    from_document,
    is_stochastically_degraded,
    load_document,
    marton_admissible,
    marton_rates,
    superposition_admissible,
    to_document,
    two_bit_marton,
)


def h(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def test_blackwell_tables():
    ch = blackwell()
    assert ch.m == 2 and ch.input_alphabet_size == 3
    assert ch.outputs([0, 1, 2]).T.tolist() == [[0, 0], [0, 1], [1, 1]]
    # (y1, y2) = (1, 0) is unreachable
    assert ch.consistent_input_table().tolist() == [0, 1, -1, 2]


def test_blackwell_vertices_uniform_input():
    ch = blackwell()
    u = [1 / 3] * 3
    r = det_region_vertex(ch, u)
    assert r == pytest.approx([h(1 / 3), 2 / 3], abs=1e-14)
    r = det_region_vertex(ch, u, [1, 0])
    assert r == pytest.approx([2 / 3, h(1 / 3)], abs=1e-14)
    assert sum(r) == pytest.approx(math.log2(3), abs=1e-14)


@given(st.lists(st.floats(0.01, 1.0), min_size=4, max_size=4))
def test_vertex_sums_to_joint_entropy(w):
    w = np.array(w) / sum(w)
    ch = DeterministicBC(4, (np.array([0, 1, 0, 1]), np.array([0, 0, 1, 1])))
    # outputs are injective here, so H(Y1,Y2) = H(X)
    hx = float(-(w * np.log2(w)).sum())
    for pi in itertools.permutations(range(2)):
        assert det_region_vertex(ch, w, pi).sum() == pytest.approx(hx, abs=1e-12)


def test_example_chain_rates():
    alpha, p1, p2 = 0.25, 0.05, 0.2
    a1 = alpha * (1 - p1) + (1 - alpha) * p1
    a2 = alpha * (1 - p2) + (1 - alpha) * p2
    expect = (h(a1) - h(p1), 1 - h(a2))
    assert example2_rates(alpha, p1, p2) == pytest.approx(expect, abs=1e-14)
    i_x_y1_v, i_v_y2, i_x_y1 = cover_rates(example2_chain(alpha, p1, p2))
    assert (i_x_y1_v, i_v_y2) == pytest.approx(expect, abs=1e-12)
    assert i_x_y1 == pytest.approx(1 - h(p1), abs=1e-12)


def test_marton_rates_closed_form():
    r, q = 0.25, 0.1
    r1, r2 = marton_rates(two_bit_marton(r, q))
    assert r1 == pytest.approx(1.0, abs=1e-14)
    assert r2 == pytest.approx(h(r) - h(q), abs=1e-12)
    # noisier V2 link than correlation: the rate goes negative
    assert marton_rates(two_bit_marton(0.05, 0.3))[1] < 0


def test_admissibility():
    assert superposition_admissible(example2_chain(0.25, 0.05, 0.2))
    assert not superposition_admissible(example2_chain(0.25, 0.2, 0.05))
    assert marton_admissible(two_bit_marton(0.25, 0.1))
    assert not marton_admissible(two_bit_marton(0.1, 0.25))


def test_degradation_lp():
    assert is_stochastically_degraded(bsc_kernel(0.1), bsc_kernel(0.2))
    assert not is_stochastically_degraded(bsc_kernel(0.2), bsc_kernel(0.1))
    # BEC(eps) -> BSC(p) possible iff eps <= 2p
    assert is_stochastically_degraded(bec_kernel(0.15), bsc_kernel(0.1))
    assert not is_stochastically_degraded(bec_kernel(0.25), bsc_kernel(0.1))
    assert is_stochastically_degraded(bsc_kernel(0.1), np.full((2, 3), 1 / 3))


@pytest.mark.parametrize(
    "eps,label,analytic",
    [
        (0.15, "degraded_2to1", "degraded"),
        (0.3, "less_noisy", "less_noisy"),
        (0.4, "more_capable", "more_capable"),
        (0.6, "none", "none"),
    ],
)
def test_classify_bec_bsc(eps, label, analytic):
    res = classify(bec_bsc(eps, 0.1), ln_points=41)
    assert res.label == label
    assert res.analytic == analytic
    if label != "none":
        assert res.stronger == 2
    assert set(res.to_dict()) >= {"label", "stronger", "degraded"}


def test_analytic_thresholds():
    p = 0.1
    assert analytic_bec_bsc_class(0.2, p) == "degraded"
    assert analytic_bec_bsc_class(0.36, p) == "less_noisy"
    assert analytic_bec_bsc_class(h(p), p) == "more_capable"
    assert analytic_bec_bsc_class(h(p) + 1e-6, p) == "none"


def test_classify_bsc_pair():
    res = classify(bsc_pair(0.05, 0.2))
    assert (res.label, res.stronger) == ("degraded_1to2", 1)
    with pytest.raises(UnsupportedChannelError):
        classify(NoisyBC(np.full((3, 2, 2), 0.25)))


def test_noisy_sampling_frequencies():
    ch = bec_bsc(0.3, 0.1)
    rng = np.random.default_rng(0)
    x = rng.integers(0, 2, 200_000)
    y1, y2 = ch.sample(x, rng)
    for xv in (0, 1):
        sel = x == xv
        emp = np.zeros((2, 3))
        np.add.at(emp, (y1[sel], y2[sel]), 1)
        emp /= sel.sum()
        assert np.abs(emp - ch.kernel[xv]).max() < 0.01


@pytest.mark.parametrize(
    "obj",
    [blackwell(), bsc_pair(0.05, 0.2), bec_bsc(0.3, 0.1), example2_chain(0.25, 0.05, 0.2), two_bit_marton(0.25, 0.1)],
)
def test_document_round_trip(obj, tmp_path):
    doc = to_document(obj)
    back = from_document(doc)
    assert to_document(back) == doc
    path = tmp_path / "ch.json"
    import json

    path.write_text(json.dumps(doc))
    assert to_document(load_document(path)) == doc


@pytest.mark.parametrize(
    "doc",
    [
        {"type": "warp"},
        {"type": "noisy"},
        {"type": "noisy", "tables": [[[0.5, 0.6]]]},
        {"type": "deterministic", "x_size": 3, "tables": [[0, 1, 2]]},
        {"type": "deterministic", "x_size": 3, "m": 2, "tables": [[0, 1, 1]]},
    ],
)
def test_bad_documents(doc):
    with pytest.raises(ConfigError):
        from_document(doc)


def test_parameter_validation():
    with pytest.raises(ConfigError):
        bsc_pair(0.5, 0.1)
    with pytest.raises(ConfigError):
        bec_bsc(0.0, 0.1)
    with pytest.raises(ConfigError):
        two_bit_marton(1.5, 0.1)
    with pytest.raises(ConfigError):
        check_permutation([0, 0], 2)
    with pytest.raises(ConfigError):
        bsc_pair(0.1, 0.2).leg(3)
    assert check_permutation(None, 3) == (0, 1, 2)
