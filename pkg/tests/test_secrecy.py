"""Rank-criterion secrecy checks against enumeration and sabotage."""

import random
from itertools import combinations

import numpy as np
import pytest

from seccache import BinaryField, mn_pda
from seccache.scheme import SystemConfig, helper_memory_for, run_session
from seccache.secrecy import (
    SessionAnalyzer,
    _exposing_combination,
    brute_force_secrecy,
    build_observation_model,
    check_external_eavesdropper,
    check_zero_information,
    enumerate_independence,
    evaluate_observations,
    share_subset_model,
    verify_session,
)
from seccache.sharing import cauchy_matrix
from tests.conftest import make_worked_session


def gf_vec_mat(field, phi, mat):
    """phi @ mat over the field (test-side, plain loops)."""
    out = [0] * mat.shape[1]
    for r, c_phi in enumerate(phi):
        if c_phi == 0:
            continue
        for c in np.nonzero(mat[r])[0]:
            out[c] ^= field.mul(int(c_phi), int(mat[r, c]))
    return out


def tiny_session(profile=(1, 1), num_files=2, l=2, seed=1, strip_pads=False,
                 demands=None):
    num_users = sum(profile)
    pda = mn_pda(len(profile), 1)
    config = SystemConfig(
        num_caches=len(profile),
        num_users=num_users,
        num_files=num_files,
        helper_memory=helper_memory_for(pda, num_files),
        file_bytes=1,
        field=BinaryField(l),
        seed=seed,
    )
    return run_session(
        pda, config, profile=profile, demands=demands, strip_pads=strip_pads
    )


# -- model construction -------------------------------------------------------


def test_zero_inputs_give_zero_observations(worked_session):
    model = build_observation_model(worked_session, observer=3)
    field = model.field
    w = field.zeros(model.file_dim)
    v = field.zeros(model.rand_dim)
    assert not evaluate_observations(model, w, v).any()


def test_obs_dim_counts(worked_session):
    s = worked_session
    fsym = s.meta.symbols_per_share
    n, z, f = 21, 2, 4
    placement = build_observation_model(s, observer=1, scope="caches-only")
    assert placement.obs_dim == n * z * fsym + (f - z) * fsym
    delivery = build_observation_model(s, observer=1, scope="caches-plus-delivery")
    assert delivery.obs_dim == placement.obs_dim + 20 * fsym


def test_model_reproduces_actual_session_values(worked_session):
    s = worked_session
    analyzer = SessionAnalyzer(s)
    w, v = analyzer.variable_assignment()
    model = analyzer.user_model(5, include_delivery=True)
    values = evaluate_observations(model, w, v)
    for label, value in zip(model.row_labels, values):
        kind, *rest = label
        if kind == "share":
            n, j, pos = rest
            expect = s.shares[n - 1][j - 1][pos]
        elif kind == "key":
            si, i, pos = rest
            expect = s.key_pool[(si, i)][pos]
        else:
            si, i, pos = rest
            expect = s.transmissions[(si, i)][pos]
        assert int(value) == int(expect), label


def test_unknown_scope_and_observer(worked_session):
    with pytest.raises(ValueError):
        build_observation_model(worked_session, observer=1, scope="everything")
    with pytest.raises(ValueError):
        build_observation_model(worked_session, observer=99)


# -- scheme-level secrecy -----------------------------------------------------


def test_worked_example_full_report(worked_session):
    report = verify_session(worked_session)
    assert report.all_hold
    assert set(report.cache_placement) == set(range(1, 7))
    assert set(report.user_delivery) == set(range(1, 22))


def test_every_cache_placement_holds(worked_session):
    analyzer = SessionAnalyzer(worked_session)
    for lam in range(1, 7):
        verdict = check_zero_information(analyzer.cache_model(lam), range(1, 22))
        assert verdict.holds


def test_delivery_scope_protects_everything_but_the_demand(worked_session):
    model = build_observation_model(worked_session, observer=4)
    protected = set(range(1, 22)) - {worked_session.demands[3]}
    assert check_zero_information(model, protected).holds


def test_sabotaged_delivery_fails_with_valid_witness():
    sabotaged = make_worked_session(strip_pads=True)
    model = build_observation_model(sabotaged, observer=2)
    protected = set(range(1, 22)) - {sabotaged.demands[1]}
    verdict = check_zero_information(model, protected)
    assert not verdict.holds
    # witness kills the randomness columns and hits a protected file column
    field = model.field
    assert not any(gf_vec_mat(field, verdict.witness, model.obs_rand))
    exposed = gf_vec_mat(
        field, verdict.witness, model.obs_files[:, model.protected_columns(protected)]
    )
    assert any(exposed)
    assert verdict.witness_rows  # labeled summary available
    assert verdict.witness_summary()


def test_witness_is_nonconstant_in_a_protected_symbol():
    sabotaged = make_worked_session(strip_pads=True)
    model = build_observation_model(sabotaged, observer=2)
    protected = set(range(1, 22)) - {sabotaged.demands[1]}
    verdict = check_zero_information(model, protected)
    field = model.field
    cols = model.protected_columns(protected)
    exposed = gf_vec_mat(field, verdict.witness, model.obs_files[:, cols])
    target = int(cols[next(i for i, c in enumerate(exposed) if c)])

    def combine(w):
        v = field.zeros(model.rand_dim)
        obs = evaluate_observations(model, w, v)
        acc = 0
        for c_phi, y in zip(verdict.witness, obs):
            acc ^= field.mul(int(c_phi), int(y))
        return acc

    w0 = field.zeros(model.file_dim)
    w1 = field.zeros(model.file_dim)
    w1[target] = 1
    assert combine(w0) != combine(w1)


def test_eavesdropper_holds_on_worked_example(worked_session):
    assert check_external_eavesdropper(worked_session).holds


def test_eavesdropper_fails_when_pads_stripped():
    # 6 caches, t=1: each demanded file sheds F-Z = 5 shares against only
    # Z = 1 randomness symbol, so unpadded broadcasts must leak.
    pda = mn_pda(6, 1)
    config = SystemConfig(6, 6, 6, helper_memory_for(pda, 6), 1,
                          field=BinaryField(8), seed=4)
    session = run_session(pda, config, profile=(1,) * 6, strip_pads=True)
    verdict = check_external_eavesdropper(session)
    assert not verdict.holds


def test_no_transmissions_is_vacuously_secret():
    session = tiny_session((1, 1), l=3)
    session.transmissions.clear()
    analyzer = SessionAnalyzer(session)
    model = analyzer.eavesdropper_model()
    assert model.obs_dim == 0
    assert check_zero_information(model, [1, 2]).holds


# -- sharing-level secrecy ------------------------------------------------------


@pytest.mark.parametrize("z,f", [(1, 2), (1, 3), (2, 3), (2, 4), (3, 4)])
def test_share_subsets_reveal_nothing_until_complete(z, f):
    field = BinaryField(3)
    enc = cauchy_matrix(f, field)
    for subset in combinations(range(1, f + 1), z):
        model = share_subset_model(enc, z, subset, field)
        assert check_zero_information(model, [1]).holds, subset
    full = share_subset_model(enc, z, tuple(range(1, f + 1)), field)
    assert not check_zero_information(full, [1]).holds


def test_more_than_z_shares_leak():
    field = BinaryField(3)
    enc = cauchy_matrix(4, field)
    model = share_subset_model(enc, 2, (1, 2, 3), field)
    assert not check_zero_information(model, [1]).holds


# -- brute-force oracle -----------------------------------------------------------


def test_brute_force_single_share_is_independent(gf2):
    enc = cauchy_matrix(2, gf2)
    model = share_subset_model(enc, 1, (1,), gf2)
    assert enumerate_independence(model, [1])  # 4*4 = 16 cases
    assert check_zero_information(model, [1]).holds


def test_brute_force_both_shares_determine_the_file(gf2):
    enc = cauchy_matrix(2, gf2)
    model = share_subset_model(enc, 1, (1, 2), gf2)
    assert not enumerate_independence(model, [1])
    assert not check_zero_information(model, [1]).holds


def test_brute_force_agrees_on_tiny_scheme():
    session = tiny_session((1, 1), num_files=2, l=3)
    for user in (1, 2):
        protected = {1, 2} - {session.demands[user - 1]}
        verdict = brute_force_secrecy(session, user, protected)
        rank = check_zero_information(
            build_observation_model(session, user, positions=1), protected
        )
        assert verdict.holds == rank.holds is True
        # the unrestricted model agrees as well
        assert check_zero_information(
            build_observation_model(session, user), protected
        ).holds


def test_brute_force_flags_sabotage():
    session = tiny_session((2, 0), num_files=2, l=2, strip_pads=True,
                           demands=(1, 2))
    verdict = brute_force_secrecy(session, 2, {1})
    rank = check_zero_information(
        build_observation_model(session, 2, positions=1), {1}
    )
    assert verdict.holds == rank.holds is False
    assert verdict.witness is not None


def test_brute_force_guard():
    session = make_worked_session()  # far too large
    with pytest.raises(ValueError, match="too large"):
        brute_force_secrecy(session, 1, {2})


def test_enumeration_size_guard(gf2):
    enc = cauchy_matrix(2, gf2)
    model = share_subset_model(enc, 1, (1,), gf2)
    with pytest.raises(ValueError):
        enumerate_independence(model, [1], max_symbols=1)


def solvable(field, mat_b, target):
    """Test-side oracle: is B x = target solvable?  Plain list-of-lists
    elimination, written independently of the package's numpy routine."""
    rows = [list(map(int, r)) + [int(t)] for r, t in zip(mat_b, target)]
    ncols = mat_b.shape[1]
    pivot_row = 0
    for col in range(ncols):
        pivot = next(
            (r for r in range(pivot_row, len(rows)) if rows[r][col] != 0), None
        )
        if pivot is None:
            continue
        rows[pivot_row], rows[pivot] = rows[pivot], rows[pivot_row]
        inv = field.inv(rows[pivot_row][col])
        rows[pivot_row] = [field.mul(inv, v) for v in rows[pivot_row]]
        for r in range(len(rows)):
            if r != pivot_row and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [
                    v ^ field.mul(f, w) for v, w in zip(rows[r], rows[pivot_row])
                ]
        pivot_row += 1
    # inconsistent iff some row is all-zero except the augmented entry
    return not any(
        all(v == 0 for v in row[:-1]) and row[-1] != 0 for row in rows
    )


def test_rank_criterion_matches_solvability_oracle(gf3):
    # holds <=> every protected column of A is a solvable target for B
    rng = random.Random(31)
    outcomes = {True: 0, False: 0}
    for _ in range(60):
        obs = rng.randint(1, 6)
        rb = rng.randint(0, 4)
        fa = rng.randint(1, 4)
        b = gf3.zeros(obs, rb)
        a = gf3.zeros(obs, fa)
        for mat in (b, a):
            for r in range(obs):
                for c in range(mat.shape[1]):
                    mat[r, c] = rng.randrange(8)
        witness = _exposing_combination(gf3, b, a)
        expected = all(solvable(gf3, b, a[:, c]) for c in range(fa))
        assert (witness is None) == expected
        outcomes[expected] += 1
        if witness is not None:
            # the witness really kills B and hits A
            assert not any(gf_vec_mat(gf3, witness, b))
            assert any(gf_vec_mat(gf3, witness, a))
    assert outcomes[True] and outcomes[False]


def test_parallel_verification_matches_sequential():
    pda = mn_pda(3, 1)
    config = SystemConfig(3, 4, 4, helper_memory_for(pda, 4), 1,
                          field=BinaryField(8), seed=12)
    session = run_session(pda, config, profile=(2, 1, 1))
    sequential = verify_session(session)
    threaded = verify_session(session, max_workers=4)
    assert sequential.all_hold and threaded.all_hold
    assert [v.holds for v in sequential.user_delivery.values()] == [
        v.holds for v in threaded.user_delivery.values()
    ]


# -- randomized scheme sweep -------------------------------------------------------


def test_random_small_instances_satisfy_all_conditions():
    rng = random.Random(11)
    for _ in range(10):
        num_caches = rng.randint(2, 4)
        t = rng.randint(1, num_caches - 1)
        pda = mn_pda(num_caches, t)
        num_users = rng.randint(num_caches, 8)
        buckets = [0] * num_caches
        for _ in range(num_users):
            buckets[rng.randrange(num_caches)] += 1
        config = SystemConfig(
            num_caches, num_users, num_users,
            helper_memory_for(pda, num_users), 1,
            field=BinaryField(8), seed=rng.getrandbits(32),
        )
        session = run_session(pda, config, profile=tuple(buckets))
        assert verify_session(session).all_hold
