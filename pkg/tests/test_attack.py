"""Attack engine: planning, harvesting, scoring, staged recovery.

Most tests run on the toy generator (13/11/9-bit registers, 6-input
filter) where everything is small enough for exact oracles.
"""

import math

import numpy as np
import pytest

from combgen import presets
from combgen.attack import (AttackExhaustedError, accumulate_tables,
                            build_g_columns, candidate_counts,
                            candidate_counts_naive, candidates_tsv,
                            compare_orderings, filter_known,
                            final_direct_search, harvest_equations, plan,
                            run_attack, score_candidates,
                            score_candidates_naive, score_candidates_tradeoff,
                            search_stage_multiples, zero_sum_fraction)
from combgen.boolfn import BooleanFunction
from combgen.errors import ValidationError, InvariantError
from combgen.gf2 import GeneratorSpec, Keystream, LfsrSpec, keystream
from combgen.multiples import Weight4Multiple, find_weight4, product_modulus

P3 = 0b1011

TRUE_KEY = 0x15543210F  # registers 0x10f / 0x219 / 0x155


def toy_keystream(toy, nbits=1 << 19, key=TRUE_KEY):
    return keystream(toy, key, nbits)


def stage1_multiples(toy, bound=1500):
    modulus = product_modulus([toy.lfsrs[1], toy.lfsrs[2]])
    return find_weight4(modulus, bound).found


def single_register_spec():
    return GeneratorSpec(
        lfsrs=(LfsrSpec(3, P3, taps=(0,)),),
        function=BooleanFunction(1, [0, 1]),
        wiring=((0, 0),))


# ------------------------------------------------------------------- plan


def test_plan_toy_parameters(toy):
    ap = plan(toy)
    s1 = ap.stages[0]
    assert (s1.m1, s1.m2, s1.n1, s1.n2) == (13, 20, 2, 4)
    assert s1.samples_required == 13 * 2 ** 13
    assert s1.equations_required == 13 * 2 ** 15
    assert s1.equations_required == s1.samples_required << s1.n1
    assert s1.expected_false_survivors == pytest.approx(1.0)
    assert ap.stages[-1].is_final and not ap.stages[-1].group2
    targets = [s.target for s in ap.stages]
    assert sorted(targets) == [0, 1, 2]


def test_plan_group2_is_union_of_later_targets(toy):
    ap = plan(toy, order=(2, 0, 1))
    assert ap.stages[0].group2 == (0, 1)
    assert ap.stages[1].group2 == (1,)
    assert ap.stages[0].n1 == 2 and ap.stages[0].n_known == 0
    assert ap.stages[1].n_known == 2


def test_plan_rejects_bad_order(toy):
    with pytest.raises(ValidationError):
        plan(toy, order=(0, 1))
    with pytest.raises(ValidationError):
        plan(toy, order=(0, 1, 1))


def test_plan_describe_mentions_each_stage(toy):
    text = plan(toy).describe()
    assert "stage 1" in text and "direct search" in text
    assert f"N = {13 * 2 ** 15}" in text


def test_compare_orderings_covers_all_permutations(toy):
    rows = compare_orderings(toy)
    assert len(rows) == 6
    n_by_order = {order: st.equations_required for order, st in rows}
    assert n_by_order[(0, 1, 2)] == 13 * 2 ** 15
    assert n_by_order[(2, 1, 0)] == 9 * 2 ** 15


def test_plan_worstcase_blowup_uses_autocorrelation(toy):
    ap = plan(toy)
    s1 = ap.stages[0]
    factor = (1 - 24 / 64) ** -4  # toy filter delta is 24
    assert s1.samples_worstcase == math.ceil(s1.samples_required * factor)


# ---------------------------------------------------------------- harvest


def test_harvest_boundary_single_equation():
    bits = Keystream(np.ones(6, dtype=np.uint8))
    mult = Weight4Multiple(1, 2, 5)
    eqs = harvest_equations(bits, [mult])
    assert eqs.total == 1
    assert eqs.groups[0].classes[0] == 0  # 1^1^1^1


def test_harvest_class_bits_match_direct_indexing(toy, rng):
    ks = toy_keystream(toy, 4000)
    mults = stage1_multiples(toy)[:3]
    eqs = harvest_equations(ks, mults)
    bits = ks.bits
    for g in eqs.groups:
        t1, t2, t3 = g.multiple.t1, g.multiple.t2, g.multiple.t3
        for i in rng.integers(0, g.count, size=40):
            base = int(g.bases[i])
            z = (int(bits[base]) ^ int(bits[base + t1])
                 ^ int(bits[base + t2]) ^ int(bits[base + t3]))
            assert z == int(g.classes[i])


def test_harvest_max_equations_truncates(toy):
    ks = toy_keystream(toy, 4000)
    mults = stage1_multiples(toy)[:3]
    eqs = harvest_equations(ks, mults, max_equations=100)
    assert eqs.total == 100


def test_harvest_rejects_too_short_keystream():
    bits = Keystream(np.zeros(5, dtype=np.uint8))
    with pytest.raises(ValidationError):
        harvest_equations(bits, [Weight4Multiple(1, 2, 5)])


def test_full_product_multiple_conditions_every_relation(toy):
    mod_all = product_modulus(toy.lfsrs)
    report = find_weight4(mod_all, 8192)
    assert report.count > 0, "raise the bound"
    mult = report.found[0]
    ks = toy_keystream(toy, mult.t3 + 2000)
    eqs = harvest_equations(ks, [mult])
    assert zero_sum_fraction(toy, TRUE_KEY, eqs) == 1.0
    # with every input sum conditioned to zero, the output sum is zero
    # with probability P0, not certainty: f is nonlinear
    from combgen.boolfn import p_spectrum
    p0 = float(p_spectrum(toy.function).p0)
    frac0 = 1.0 - float(eqs.groups[0].classes.mean())
    assert abs(frac0 - p0) < 4 / math.sqrt(eqs.total)


def test_partial_product_multiple_conditions_a_quarter(toy):
    mults = stage1_multiples(toy)[:4]
    ks = toy_keystream(toy, 60000)
    eqs = harvest_equations(ks, mults)
    frac = zero_sum_fraction(toy, TRUE_KEY, eqs)
    sigma = 3 / math.sqrt(eqs.total)
    assert abs(frac - 0.25) < sigma + 0.01


# ---------------------------------------------------------------- columns


def test_g_column_by_hand():
    # register X^3+X+1, tap 0, relation positions (0,1,2,4):
    # s0+s1+s2+s4 = s0 since s4 = s1+s2, so the mask is 0b001
    spec = single_register_spec()
    ks = Keystream(np.zeros(5, dtype=np.uint8))
    eqs = harvest_equations(ks, [Weight4Multiple(1, 2, 4)])
    g = build_g_columns(spec, [0], eqs)
    assert g.m1 == 3 and g.n1 == 1
    assert g.columns[0][0] == 1


def test_true_key_dot_products_match_simulation(toy):
    mults = stage1_multiples(toy)[:2]
    ks = toy_keystream(toy, 30000)
    eqs = harvest_equations(ks, mults, max_equations=1000)
    g = build_g_columns(toy, [0], eqs)
    u_true = toy.split_state(TRUE_KEY)[0]
    lf = toy.lfsrs[0]
    taps = toy.inputs_of_register(0)
    i = 0
    for grp in eqs.groups:
        seq = np.asarray(
            keystream_of_register(lf, u_true,
                                  int(grp.bases.max()) + grp.multiple.t3
                                  + max(p for _, p in taps) + 1))
        for base in grp.bases:
            for j, (_, p) in enumerate(taps):
                direct = 0
                for shift in grp.multiple.shifts:
                    direct ^= int(seq[int(base) + p + shift])
                hyp = bin(int(g.columns[j][i]) & u_true).count("1") & 1
                assert hyp == direct
            i += 1


def keystream_of_register(lf, init, count):
    from combgen.gf2 import sequence_bits
    return sequence_bits(lf.feedback, lf.length, init, count)


def test_columns_are_register_local(toy):
    # the same relations scored against register 1 use only 11-bit masks
    mults = stage1_multiples(toy)[:1]
    ks = toy_keystream(toy, 20000)
    eqs = harvest_equations(ks, mults, max_equations=200)
    g = build_g_columns(toy, [1], eqs)
    assert g.m1 == 11
    assert all(int(c.max()) < (1 << 11) for c in g.columns)


# ----------------------------------------------------------- accumulation


def test_accumulate_total_mass(toy):
    ks = toy_keystream(toy, 30000)
    eqs = harvest_equations(ks, stage1_multiples(toy)[:2],
                            max_equations=5000)
    g = build_g_columns(toy, [0], eqs)
    w0, w1 = accumulate_tables(g)
    c0, c1 = eqs.class_counts
    assert int(w0.sum()) == c0 << g.n1
    assert int(w1.sum()) == c1 << g.n1


def test_accumulate_matches_naive_recount():
    rng = np.random.default_rng(5)
    spec = GeneratorSpec(
        lfsrs=(LfsrSpec(9, presets.TOY_POLY_9, taps=(3, 8)),),
        function=BooleanFunction(2, [0, 1, 1, 0]),
        wiring=((0, 0), (0, 1)))
    ks = Keystream(rng.integers(0, 2, size=2000).astype(np.uint8))
    eqs = harvest_equations(ks, [Weight4Multiple(5, 19, 37)],
                            max_equations=300)
    g = build_g_columns(spec, [0], eqs)
    w0, w1 = accumulate_tables(g)
    expect = [np.zeros(512, dtype=np.int64), np.zeros(512, dtype=np.int64)]
    for i in range(g.count):
        b = int(g.classes[i])
        for y in range(4):
            v = 0
            if y & 1:
                v ^= int(g.columns[0][i])
            if y & 2:
                v ^= int(g.columns[1][i])
            expect[b][v] += 1
    assert np.array_equal(w0, expect[0])
    assert np.array_equal(w1, expect[1])


def test_accumulate_single_input_unrolled():
    spec = single_register_spec()
    rng = np.random.default_rng(6)
    ks = Keystream(rng.integers(0, 2, size=400).astype(np.uint8))
    eqs = harvest_equations(ks, [Weight4Multiple(2, 5, 11)])
    g = build_g_columns(spec, [0], eqs)
    w0, w1 = accumulate_tables(g)
    c0, c1 = eqs.class_counts
    for b, (w, total) in enumerate(((w0, c0), (w1, c1))):
        direct = np.zeros(8, dtype=np.int64)
        sel = g.classes == b
        np.add.at(direct, g.columns[0][sel], 1)
        direct[0] += total
        assert np.array_equal(w, direct)


def test_accumulate_workers_deterministic(toy):
    ks = toy_keystream(toy, 60000)
    eqs = harvest_equations(ks, stage1_multiples(toy)[:4])
    g = build_g_columns(toy, [0], eqs)
    lone = accumulate_tables(g)
    multi = accumulate_tables(g, workers=3, chunk=4096)
    assert np.array_equal(lone[0], multi[0])
    assert np.array_equal(lone[1], multi[1])


def test_candidate_counts_divisibility_guard():
    w0 = np.array([3, 1, 1, 1], dtype=np.int64)  # not a valid accumulation
    w1 = np.zeros(4, dtype=np.int64)
    with pytest.raises(InvariantError):
        candidate_counts(w0, w1, n1=2)


# ------------------------------------------------------------------ score


def scored_stage(toy, nbits=1 << 18, max_eq=300000):
    ks = toy_keystream(toy, nbits)
    eqs = harvest_equations(ks, stage1_multiples(toy), max_equations=max_eq)
    return build_g_columns(toy, [0], eqs)


def test_fast_scorer_equals_naive(toy):
    g = scored_stage(toy, max_eq=8000)
    n0_fast, n1_fast = candidate_counts(*accumulate_tables(g), g.n1)
    n0_ref, n1_ref = candidate_counts_naive(g)
    assert np.array_equal(n0_fast, n0_ref)
    assert np.array_equal(n1_fast, n1_ref)


@pytest.mark.parametrize("split", [0, 1, 4, 13])
def test_tradeoff_scorer_equals_fast(toy, split):
    g = scored_stage(toy, max_eq=6000)
    top = score_candidates(*accumulate_tables(g), g.n1, top_k=10)
    alt = score_candidates_tradeoff(g, split, top_k=10)
    assert [(c.candidate, c.n0, c.n1) for c in top] == \
        [(c.candidate, c.n0, c.n1) for c in alt]


def test_true_candidate_ranks_first(toy):
    g = scored_stage(toy)
    ranked = score_candidates(*accumulate_tables(g), g.n1, top_k=8)
    assert ranked[0].candidate == toy.split_state(TRUE_KEY)[0]
    assert ranked[0].zscore > ranked[1].zscore + 3
    assert all(c.candidate != 0 for c in ranked)


def test_candidate_zero_counts_everything(toy):
    g = scored_stage(toy, max_eq=4000)
    n0, n1c = candidate_counts(*accumulate_tables(g), g.n1)
    assert int(n0[0] + n1c[0]) == g.count


def test_true_candidate_bias_matches_p_spectrum(toy):
    from combgen.boolfn import p_spectrum
    g = scored_stage(toy)
    ranked = score_candidates(*accumulate_tables(g), g.n1, top_k=1)
    top = ranked[0]
    expected = 2 * (float(p_spectrum(toy.function).p0) - 0.5)
    assert abs(top.bias - expected) < 4 / math.sqrt(top.total)


def test_naive_scorer_top_list_matches(toy):
    g = scored_stage(toy, max_eq=5000)
    a = score_candidates(*accumulate_tables(g), g.n1, top_k=6)
    b = score_candidates_naive(g, top_k=6)
    assert [(c.candidate, c.n0, c.n1) for c in a] == \
        [(c.candidate, c.n0, c.n1) for c in b]


def test_candidates_tsv_shape(toy):
    g = scored_stage(toy, max_eq=3000)
    text = candidates_tsv(score_candidates(*accumulate_tables(g), g.n1,
                                           top_k=3))
    lines = text.splitlines()
    assert lines[0] == "candidate\tn0\tn1\tbias\tzscore"
    assert len(lines) == 4 and lines[1].startswith("0x")


# ------------------------------------------------------------- filtering


def test_filter_known_identity(toy):
    ks = toy_keystream(toy, 30000)
    eqs = harvest_equations(ks, stage1_multiples(toy)[:2])
    assert filter_known(toy, eqs, {}) is eqs


def test_filter_known_survivors_have_zero_known_sums(toy):
    ks = toy_keystream(toy, 60000)
    # the P9 register's X-order is 511, so stay below it
    mods = find_weight4(product_modulus([toy.lfsrs[2]]), 505).found[:3]
    eqs = harvest_equations(ks, mods)
    u0 = toy.split_state(TRUE_KEY)[0]
    kept = filter_known(toy, eqs, {0: u0})
    assert 0 < kept.total < eqs.total
    # recheck by direct simulation of register 0 over the four positions
    from combgen.gf2 import sequence_bits
    lf = toy.lfsrs[0]
    for grp in kept.groups:
        span = int(grp.bases.max()) + grp.multiple.t3 + 10
        seq = sequence_bits(lf.feedback, lf.length, u0, span)
        for base in grp.bases[:200]:
            for _, p in toy.inputs_of_register(0):
                s = 0
                for shift in grp.multiple.shifts:
                    s ^= int(seq[int(base) + p + shift])
                assert s == 0


def test_filter_known_survival_rate(toy):
    ks = toy_keystream(toy, 200000)
    mods = find_weight4(product_modulus([toy.lfsrs[2]]), 505).found[:100]
    eqs = harvest_equations(ks, mods, max_equations=40000)
    u0 = toy.split_state(TRUE_KEY)[0]
    kept = filter_known(toy, eqs, {0: u0})
    rate = kept.total / eqs.total
    sigma = math.sqrt(0.25 * 0.75 / eqs.total)
    assert abs(rate - 0.25) < 4 * sigma + 0.002


def test_filter_known_all_filtered_is_an_error(toy):
    # one equation survives a wrong-state filter only ~1/4 of the time,
    # so some state in a short list must empty it and raise
    ks = toy_keystream(toy, 3000)
    mods = find_weight4(product_modulus([toy.lfsrs[2]]), 505).found[:1]
    eqs = harvest_equations(ks, mods, max_equations=1)
    raised = False
    for wrong in range(1, 25):
        try:
            filter_known(toy, eqs, {0: wrong})
        except ValidationError:
            raised = True
            break
    assert raised


# ----------------------------------------------------------- final search


def test_final_direct_search_finds_true_state(toy):
    ks = toy_keystream(toy, 200)
    parts = toy.split_state(TRUE_KEY)
    got = final_direct_search(toy, ks, {0: parts[0], 1: parts[1]})
    assert got == [parts[2]]


def test_final_direct_search_rejects_corrupt_known(toy):
    ks = toy_keystream(toy, 200)
    parts = toy.split_state(TRUE_KEY)
    got = final_direct_search(toy, ks, {0: parts[0] ^ 5, 1: parts[1]})
    assert got == []


def test_final_direct_search_needs_one_unknown(toy):
    ks = toy_keystream(toy, 200)
    with pytest.raises(ValidationError):
        final_direct_search(toy, ks, {0: 1})


# -------------------------------------------------------------- run_attack


def test_run_attack_recovers_exact_state(toy):
    ks = toy_keystream(toy)
    result = run_attack(toy, ks)
    assert result.success
    assert result.state == TRUE_KEY
    assert keystream(toy, result.state, len(ks)) == ks
    assert [r.target for r in result.reports[-3:]] == [0, 1, 2]
    assert result.reports[-1].multiples == ()


def test_run_attack_with_supplied_multiples_and_tradeoff(toy):
    ks = toy_keystream(toy, 1 << 18)
    ap = plan(toy)
    mults = {0: list(stage1_multiples(toy, 2500)),
             1: list(find_weight4(presets.TOY_POLY_9, 500).found)}
    result = run_attack(toy, ks, ap, multiples=mults, split_bits=2,
                        workers=2)
    assert result.success and result.state == TRUE_KEY


def test_run_attack_short_keystream_warns(toy):
    ks = toy_keystream(toy, 1200)
    try:
        result = run_attack(toy, ks, top_k=4)
        reports = result.reports
    except AttackExhaustedError as exc:
        reports = exc.result.reports
    assert any(r.warnings for r in reports)


def test_run_attack_exhausts_on_unrelated_bits(toy):
    rng = np.random.default_rng(3)
    junk = Keystream(rng.integers(0, 2, size=1 << 16).astype(np.uint8))
    with pytest.raises(AttackExhaustedError) as info:
        run_attack(toy, junk, top_k=2)
    assert info.value.result is not None
    assert info.value.result.backtracks > 0


def test_search_stage_multiples_returns_verified(toy):
    ap = plan(toy)
    modulus, chosen = search_stage_multiples(toy, ap.stages[0], 1 << 17)
    assert modulus == product_modulus([toy.lfsrs[1], toy.lfsrs[2]])
    assert chosen
    degrees = [m.t3 for m in chosen]
    assert degrees == sorted(degrees)
