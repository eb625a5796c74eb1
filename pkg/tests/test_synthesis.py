import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from polarcast.channels import blackwell, example2_chain, two_bit_marton
from polarcast.prob import JointTable, conditional_entropy
from polarcast.synthesis import (
    ConstructionError,
    ContextError,
    ExactContextTable,
    IndexStats,
    PolarContext,
    PolarizationSets,
    SuccessiveCanceller,
    TooLargeError,
    build_sets,
    check_alignment,
    derive_sets,
    detbc_bundle,
    estimate_many,
    exact_stats,
    genie_llrs,
    marton_bundle,
    oracle_max_diff,
    polarization_delta,
    prob_zero,
    sc_log_likelihood,
    sets_from_stats,
    superposition_bundle,
    tv_diagnostic,
)
from polarcast.synthesis.exact import tv_from_joint
from polarcast.synthesis.sc import combine_even, combine_odd

from conftest import kron_generator


def h(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bernoulli_ctx(p):
    model = JointTable(np.array([1 - p, p]), ("V",))
    return PolarContext("sp_cloud", model, "V")


def brute_cond0(ctx, n):
    """P(U_j = 0 | prefix, side) by explicit loops over all sequences."""
    g = kron_generator(n)
    pair = np.asarray(ctx.pair)
    size = pair.shape[0]
    out = {}
    for side in itertools.product(range(size), repeat=n):
        mass = {}
        for t in itertools.product(range(2), repeat=n):
            w = math.prod(pair[s, b] for s, b in zip(side, t))
            if w == 0:
                continue
            u = tuple(int(v) for v in (np.array(t) @ g) % 2)
            for j in range(n):
                key = (j, u[:j])
                m0, m1 = mass.get(key, (0.0, 0.0))
                mass[key] = (m0 + w, m1) if u[j] == 0 else (m0, m1 + w)
        for (j, prefix), (m0, m1) in mass.items():
            out[(side, j, prefix)] = m0 / (m0 + m1)
    return out


# ---------------------------------------------------------------- combining rules


@given(st.floats(-30, 30), st.floats(-30, 30))
def test_combine_odd_matches_direct_formula(a, b):
    la, lb = math.exp(a), math.exp(b)
    direct = math.log((la * lb + 1) / (la + lb))
    assert combine_odd(np.array(a), np.array(b)) == pytest.approx(direct, abs=1e-9)


@given(st.floats(-30, 30), st.floats(-30, 30), st.integers(0, 1))
def test_combine_even_matches_direct_formula(a, b, bit):
    direct = b + (a if bit == 0 else -a)
    assert combine_even(np.array(a), np.array(b), np.array(bit)) == pytest.approx(direct)


def test_combining_with_infinities():
    inf = np.inf
    assert combine_odd(np.array(inf), np.array(2.0)) == pytest.approx(2.0)
    assert combine_odd(np.array(-inf), np.array(2.0)) == pytest.approx(-2.0)
    assert combine_odd(np.array(inf), np.array(-inf)) == -inf
    assert combine_odd(np.array(inf), np.array(0.0)) == 0.0
    # contradiction maps to an uninformative ratio
    assert combine_even(np.array(inf), np.array(-inf), np.array(0)) == 0.0
    assert combine_even(np.array(inf), np.array(-inf), np.array(1)) == -inf
    assert prob_zero(np.array([inf, -inf, 0.0])).tolist() == [1.0, 0.0, 0.5]


# ---------------------------------------------------------------- exact oracle


def test_exact_table_against_brute_force_loops():
    ctx = detbc_bundle(blackwell(), [0.2, 0.3, 0.5]).contexts["Y2|Y1"]
    n = 4
    ref = brute_cond0(ctx, n)
    table = ExactContextTable(ctx, n)
    for j in range(n):
        c0 = table.bit_channel(j).cond0
        for (side, jj, prefix), want in ref.items():
            if jj != j:
                continue
            s = int(np.ravel_multi_index(side, (2,) * n))
            k = int("".join(map(str, prefix)) or "0", 2)
            assert c0[s, k] == pytest.approx(want, abs=1e-14)


@pytest.mark.parametrize(
    "bundle",
    [
        detbc_bundle(blackwell(), [1 / 3] * 3),
        superposition_bundle(example2_chain(0.25, 0.05, 0.2)),
        marton_bundle(two_bit_marton(0.25, 0.1)),
    ],
    ids=["detbc", "sp", "marton"],
)
def test_sc_recursion_matches_enumeration(bundle):
    for ctx in bundle.contexts.values():
        for n in (2, 4):
            assert oracle_max_diff(ctx, n) < 1e-12


def test_sc_against_brute_force_with_side():
    ctx = superposition_bundle(example2_chain(0.25, 0.05, 0.2)).contexts["X|VY1"]
    n = 2
    ref = brute_cond0(ctx, n)
    for (side, j, prefix), want in ref.items():
        lam = sc_log_likelihood(ctx, j, np.array(prefix, dtype=np.uint8), np.array(side))
        assert prob_zero(lam) == pytest.approx(want, abs=1e-12)


def test_n2_closed_form():
    p = 0.1
    q = 2 * p * (1 - p)
    stats = exact_stats(bernoulli_ctx(p), 2)
    # U0 = T0 xor T1, U1 = T1
    assert stats.h[0] == pytest.approx(h(q), abs=1e-14)
    assert stats.h[1] == pytest.approx(2 * h(p) - h(q), abs=1e-14)
    assert stats.z[0] == pytest.approx(2 * math.sqrt(q * (1 - q)), abs=1e-14)
    # Z(U1|U0): P(U0=0)=1-q gives two equal ratios p^2:(1-p)^2; same for U0=1
    z1 = 2 * (math.sqrt(p * p * (1 - p) * (1 - p)) * 2)
    assert stats.z[1] == pytest.approx(z1, abs=1e-14)


@pytest.mark.parametrize("n", [2, 4, 8])
def test_entropy_conservation(n):
    bundle = superposition_bundle(example2_chain(0.25, 0.05, 0.2))
    for ctx in bundle.contexts.values():
        stats = exact_stats(ctx, n)
        want = n * conditional_entropy(ctx.model, ctx.target, list(ctx.side))
        assert stats.h.sum() == pytest.approx(want, abs=1e-10)
        assert np.all(stats.z**2 <= stats.h + 1e-12)


def test_uniform_target_is_fully_random():
    stats = exact_stats(bernoulli_ctx(0.5), 8)
    assert np.allclose(stats.z, 1.0) and np.allclose(stats.h, 1.0)


def test_enumeration_guard():
    ctx = superposition_bundle(example2_chain(0.25, 0.05, 0.2)).contexts["X|VY1"]
    with pytest.raises(TooLargeError):
        ExactContextTable(ctx, 16)
    # side-free contexts fit at n = 16
    assert ExactContextTable(bernoulli_ctx(0.2), 16).table.shape == (1, 2**16)
    # atom evolution reaches n = 16 but not n = 32 for the four-letter side
    assert exact_stats(ctx, 16).exact
    with pytest.raises(TooLargeError):
        exact_stats(ctx, 32)
    with pytest.raises(ValueError):
        exact_stats(ctx, 8, method="guess")


@pytest.mark.parametrize(
    "bundle",
    [
        detbc_bundle(blackwell(), [0.2, 0.3, 0.5]),
        superposition_bundle(example2_chain(0.25, 0.05, 0.2)),
        marton_bundle(two_bit_marton(0.25, 0.1)),
    ],
    ids=["detbc", "sp", "marton"],
)
@pytest.mark.parametrize("n", [2, 4, 8])
def test_atom_evolution_matches_enumeration(bundle, n):
    for ctx in bundle.contexts.values():
        a = exact_stats(ctx, n, method="enumerate")
        b = exact_stats(ctx, n, method="evolve")
        assert np.abs(a.z - b.z).max() < 1e-13
        assert np.abs(a.h - b.h).max() < 1e-13


def test_atom_evolution_n16_against_enumeration():
    ctx = bernoulli_ctx(0.11)
    a = exact_stats(ctx, 16, method="enumerate")
    b = exact_stats(ctx, 16, method="evolve")
    assert np.abs(a.z - b.z).max() < 1e-12 and np.abs(a.h - b.h).max() < 1e-12


# ---------------------------------------------------------------- sequential SC


@given(st.integers(1, 5), st.integers(0, 2**32 - 1))
def test_sequential_pass_reproduces_genie(level, seed):
    n = 2**level
    rng = np.random.default_rng(seed)
    llr0 = rng.normal(0, 3, (3, n))
    t = rng.integers(0, 2, (3, n), dtype=np.uint8)
    lam_ref, u_ref = genie_llrs(llr0, t)
    seen = np.zeros((3, n))

    def decide(j, lam_j):
        seen[:, j] = lam_j[0]
        return u_ref[:, j]

    u, t_out = SuccessiveCanceller(n).run(llr0, decide)
    assert np.array_equal(u, u_ref) and np.array_equal(t_out, t)
    assert np.allclose(seen, lam_ref, atol=1e-9)


# ---------------------------------------------------------------- estimation


def test_mc_estimates_agree_with_exact():
    bundle = superposition_bundle(example2_chain(0.25, 0.05, 0.2))
    mc = estimate_many(bundle.contexts, 8, 20000, seed=3)
    for name, ctx in bundle.contexts.items():
        ex = exact_stats(ctx, 8)
        assert np.all(np.abs(mc[name].z - ex.z) <= 5 * mc[name].std_error + 1e-3)
        assert np.all(np.abs(mc[name].h - ex.h) <= 5 * mc[name].h_std_error + 1e-3)


def test_mc_is_worker_invariant_and_seeded():
    bundle = marton_bundle(two_bit_marton(0.25, 0.1))
    a = estimate_many(bundle.contexts, 64, 3000, seed=1, workers=1)
    b = estimate_many(bundle.contexts, 64, 3000, seed=1, workers=2)
    c = estimate_many(bundle.contexts, 64, 3000, seed=2, workers=1)
    for name in bundle.contexts:
        assert np.array_equal(a[name].z, b[name].z)
        assert np.array_equal(a[name].h, b[name].h)
    assert not np.array_equal(a["V2|Y2"].z, c["V2|Y2"].z)


# ---------------------------------------------------------------- sets


def test_polarization_delta():
    # 1024 ** 0.3 = 8
    assert polarization_delta(1024, 0.3) == pytest.approx(2.0**-8)
    with pytest.raises(ValueError):
        polarization_delta(8, 0.6)


def test_derive_sets_superposition_by_hand():
    bundle = superposition_bundle(example2_chain(0.25, 0.05, 0.2))
    z = {
        "X|V": np.array([1.0, 0.99, 0.5, 0.0]),
        "X|VY1": np.array([0.0, 0.9, 0.0, 0.0]),
        "V": np.array([1.0, 1.0, 1.0, 0.2]),
        "V|Y1": np.array([0.0, 0.0, 0.5, 0.0]),
        "V|Y2": np.array([0.0, 0.5, 0.5, 0.0]),
    }
    s = derive_sets(bundle, z, 0.05)
    assert s["H_X|V"].tolist() == [0, 1]
    assert s["M1"].tolist() == [0]
    assert s["M1v"].tolist() == [0, 1]
    assert s["M2"].tolist() == [0]
    s = derive_sets(bundle, z, 0.05, delta_high=0.6)
    assert s["H_X|V"].tolist() == [0, 1, 2]
    assert s["M1"].tolist() == [0, 2]


def test_marton_partition_sets():
    bundle = marton_bundle(two_bit_marton(0.25, 0.1))
    z = {
        "V1": np.ones(4),
        "V1|Y1": np.zeros(4),
        "V2|V1": np.array([1.0, 0.5, 0.0, 1.0]),
        "V2|Y2": np.array([0.0, 0.5, 0.0, 1.0]),
    }
    s = derive_sets(bundle, z, 0.1)
    assert s["Delta_1"].tolist() == [1]
    assert s["Delta_2"].tolist() == [1]
    assert s["M2"].tolist() == [0]


def test_backoff_sizes_and_overlap_guard():
    bundle = detbc_bundle(blackwell(), [1 / 3] * 3)
    sets = build_sets(bundle, 8, exact=True, selector="backoff", tau=0.1)
    for k in ("M1", "M2"):
        assert len(sets[k]) == math.floor(8 * (bundle.targets[k] - 0.1))
    assert sets.delta_high >= sets.delta
    # unpolarized statistics: meeting the sizes would need overlapping high and low sets
    sp = superposition_bundle(example2_chain(0.25, 0.05, 0.2))
    flat = IndexStats(n=8, z=np.full(8, 0.5), h=np.full(8, 0.7), sample_count=1,
                      std_error=np.zeros(8), h_std_error=np.zeros(8))
    with pytest.raises(ConstructionError):
        sets_from_stats(sp, {k: flat for k in sp.contexts}, 8, selector="backoff", tau=0.0)
    with pytest.raises(ValueError):
        build_sets(bundle, 8, exact=True, selector="backoff")
    with pytest.raises(ValueError):
        build_sets(bundle, 8, exact=True, selector="bogus")


def test_sets_json_round_trip():
    bundle = marton_bundle(two_bit_marton(0.25, 0.1))
    sets = build_sets(bundle, 8, exact=True)
    back = PolarizationSets.from_dict(json.loads(sets.to_json()))
    assert back.to_json() == sets.to_json()
    assert back.eta == sets.eta


@pytest.mark.parametrize("n", [2, 4, 8])
def test_alignment_holds_on_exact_sets(n):
    for bundle in (superposition_bundle(example2_chain(0.25, 0.05, 0.2)), marton_bundle(two_bit_marton(0.25, 0.1))):
        rep = check_alignment(build_sets(bundle, n, exact=True))
        assert rep.ok, (bundle.scheme, rep)
    with pytest.raises(ValueError):
        check_alignment(build_sets(detbc_bundle(blackwell(), [1 / 3] * 3), 4, exact=True))


def test_sets_from_stats_rates():
    bundle = detbc_bundle(blackwell(), [1 / 3] * 3)
    stats = {name: exact_stats(ctx, 8) for name, ctx in bundle.contexts.items()}
    sets = sets_from_stats(bundle, stats, 8, delta=0.2)
    assert sets.rates["M1"] == len(sets["M1"]) / 8
    assert sets.extra["pi"] == [0, 1]


# ---------------------------------------------------------------- P versus Q


def test_tv_from_joint_limits():
    rng = np.random.default_rng(0)
    p = rng.random(16)
    p /= p.sum()
    none = tv_from_joint(p, [])
    assert none.tv_exact == pytest.approx(0.0, abs=1e-15) and none.holds
    flat = tv_from_joint(np.full(16, 1 / 16), range(4))
    assert flat.tv_exact == pytest.approx(0.0, abs=1e-15)
    full = tv_from_joint(p, range(4))
    assert full.tv_exact == pytest.approx(np.abs(p - 1 / 16).sum())
    assert full.message_entropy_gap == pytest.approx(4 - (-(p * np.log2(p)).sum()))


@pytest.mark.parametrize("n", [2, 4, 8])
def test_tv_bound_holds(n):
    for bundle in (
        detbc_bundle(blackwell(), [1 / 3] * 3),
        superposition_bundle(example2_chain(0.25, 0.05, 0.2)),
        marton_bundle(two_bit_marton(0.25, 0.1)),
    ):
        diag = tv_diagnostic(bundle, build_sets(bundle, n, exact=True), n)
        assert diag.holds


# ---------------------------------------------------------------- contexts


def test_context_validation():
    model = example2_chain(0.25, 0.05, 0.2).joint()
    with pytest.raises(ContextError):
        PolarContext("sp_cloud", model, "X")
    with pytest.raises(ContextError):
        PolarContext("sp_satellite", model, "X", ("Y2",))
    with pytest.raises(ContextError):
        PolarContext("nope", model, "V")
    ctx = PolarContext("sp_satellite", model, "X", ("V", "Y1"))
    assert ctx.name == "X|VY1" and ctx.side_size == 4
    assert ctx.side_code([np.array([1, 0]), np.array([1, 1])]).tolist() == [3, 1]
    with pytest.raises(ContextError):
        ctx.side_code(None)
