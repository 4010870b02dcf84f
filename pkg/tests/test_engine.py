from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cv2xsim.channel import ChannelModelKind, PropagationParams, RangePolicy, count_blockers, link_loss
from cv2xsim.engine import (
    LinkOptions,
    LosPolicy,
    classify_los,
    evaluate_links,
    interference_dbm,
    run_drop,
    transmitters,
)
from cv2xsim.kpi import compute_prr
from cv2xsim.phy import McsEntry, RadioConfig, evaluate_link
from cv2xsim.rng import RandomStream, link_normals
from cv2xsim.scenario import HighwayConfig, build_scenario, distance_3d

MCS = McsEntry(5, 2.7305, 10.4)


def sim_params(**kw):
    # the simulator clamps WINNER distances; the bare channel default is strict
    return PropagationParams(winner_range_policy=RangePolicy.CLAMP, **kw)

RADIO = RadioConfig()


def small_scenario():
    return build_scenario(HighwayConfig(length_m=400, lanes=3, ivd_m=25))


@pytest.mark.parametrize("model", list(ChannelModelKind))
@pytest.mark.parametrize("shadowing", [False, True])
def test_batch_matches_scalar_path(model, shadowing):
    sc = small_scenario()
    params = sim_params(shadowing_enabled=shadowing, two_ray_shadowing_std_db=1.5)
    opts = LinkOptions(range_m=300)
    batch = evaluate_links(sc, model, params, RADIO, MCS, opts, seed=11, drop=3)
    assert len(batch) > 0
    for i in range(0, len(batch), 7):
        t, r = int(batch.tx[i]), int(batch.rx[i])
        tx, rx = sc.vehicles[t], sc.vehicles[r]
        d = distance_3d(tx, rx)
        n_blk = count_blockers(sc, tx, rx)
        los = bool(classify_los(tx.lane_index == rx.lane_index, n_blk, d, opts))
        p = replace(params, los_state="los" if los else "nlos")
        ll = link_loss(model, d, p, n_blockers=n_blk, rng_stream=RandomStream(11, 3, tx.id, rx.id))
        res = evaluate_link(tx, rx, ll, RADIO, MCS)
        assert batch.distance_m[i] == pytest.approx(d, rel=1e-12)
        assert batch.total_db[i] == pytest.approx(ll.total_db, rel=1e-12)
        assert batch.sinr_db[i] == pytest.approx(res.sinr_db, rel=1e-12, abs=1e-12)
        assert bool(batch.success[i]) == res.success


def test_total_identity_is_exact():
    sc = small_scenario()
    params = sim_params(shadowing_enabled=True)
    b = evaluate_links(sc, "3gpp_rel15", params, RADIO, MCS, LinkOptions(), 1, 0)
    assert np.array_equal(b.total_db, b.pathloss_db + b.shadowing_db + b.blockage_db)


def test_chunking_does_not_change_tallies():
    sc = small_scenario()
    params = sim_params(shadowing_enabled=True)
    a = run_drop(sc, "winner_ii_d1", params, RADIO, MCS, LinkOptions(), 5, 2, chunk=1)
    b = run_drop(sc, "winner_ii_d1", params, RADIO, MCS, LinkOptions(), 5, 2, chunk=10_000)
    assert np.array_equal(a.successes, b.successes) and np.array_equal(a.totals, b.totals)


def test_drops_differ_with_shadowing_and_repeat_without():
    sc = small_scenario()
    on = sim_params(shadowing_enabled=True)
    a = evaluate_links(sc, "winner_ii_d1", on, RADIO, MCS, LinkOptions(), 5, 0)
    b = evaluate_links(sc, "winner_ii_d1", on, RADIO, MCS, LinkOptions(), 5, 1)
    assert not np.array_equal(a.shadowing_db, b.shadowing_db)
    off = sim_params()
    c = evaluate_links(sc, "winner_ii_d1", off, RADIO, MCS, LinkOptions(), 5, 0)
    d = evaluate_links(sc, "winner_ii_d1", off, RADIO, MCS, LinkOptions(), 5, 1)
    assert np.array_equal(c.total_db, d.total_db)


def test_los_policies():
    same = np.array([True, True, False, False])
    blk = np.array([0, 2, 0, 0])
    d = np.array([10.0, 30.0, 150.0, 250.0])
    assert classify_los(same, blk, d, LinkOptions()).tolist() == [True, False, True, False]
    assert classify_los(same, blk, d, LinkOptions(los_policy=LosPolicy.ALWAYS_LOS)).all()
    assert not classify_los(same, blk, d, LinkOptions(los_policy=LosPolicy.ALWAYS_NLOS)).any()


def test_interior_only_transmitters():
    sc = build_scenario(HighwayConfig(length_m=3000, lanes=1, ivd_m=100))
    txs = transmitters(sc, LinkOptions(range_m=1000, interior_only=True))
    xs = sc.positions[txs, 0]
    assert xs.min() >= 1000 and xs.max() <= 2000 and len(txs) == 10


def test_interference_hand_case():
    # one lane, reuse distance 500 m: the tx at 75 m has its only on-road
    # co-channel twin at 575 m, 200 m from the rx at 375 m.
    sc = build_scenario(HighwayConfig(length_m=1000, lanes=1, ivd_m=50, isd_m=500))
    opts = LinkOptions(noise_limited=False, reuse_distance_m=500.0)
    params = sim_params()
    tx, rx = np.array([1]), np.array([7])
    assert sc.positions[1, 0] == 75 and sc.positions[7, 0] == 375
    # twin at 575 m; 200 m from rx; vehicles at 425, 475, 525 lie between -> 3 blockers
    got = interference_dbm(sc, tx, rx, ChannelModelKind.GPP3_REL15, params, RADIO, opts)
    expected = 24 - (oracles.gpp3(200.0, False) + 15.0) + 3
    assert got[0] == pytest.approx(expected, rel=1e-12)

    batch = evaluate_links(sc, "3gpp_rel15", params, RADIO, MCS, opts, 0, 0, tx_indices=tx)
    clean = evaluate_links(sc, "3gpp_rel15", params, RADIO, MCS, LinkOptions(), 0, 0, tx_indices=tx)
    assert np.all(batch.sinr_db <= clean.sinr_db)


@st.composite
def small_configs(draw):
    lanes = draw(st.integers(1, 3))
    ivd = draw(st.floats(8, 60))
    length = draw(st.floats(ivd, min(50 // lanes * ivd, 2000)))
    return HighwayConfig(length_m=length, lanes=lanes, ivd_m=ivd)


@settings(max_examples=25, deadline=None)
@given(
    small_configs(),
    st.sampled_from(list(ChannelModelKind)),
    st.booleans(),
    st.floats(5, 600),
    st.integers(0, 2**32),
)
def test_prr_matches_nested_loop_recount(cfg, model, shadowing, range_m, seed):
    sc = build_scenario(cfg)
    params = sim_params(shadowing_enabled=shadowing)
    opts = LinkOptions(range_m=range_m)
    batch = evaluate_links(sc, model, params, RADIO, MCS, opts, seed, 0, eval_range_m=range_m * 2)
    prr = compute_prr(batch.to_results(sc), range_m)

    veh = [(*v.position, v.lane_index) for v in sc.vehicles]

    def success(i, j):
        z = float(link_normals(seed, 0, i, j)[0]) if shadowing else None
        loss = oracles.link_total_loss(model.value, veh, i, j, shadow_z=z)
        return oracles.link_success(loss, MCS.sinr_threshold_db, RADIO.bandwidth_hz)

    expected = oracles.brute_force_prr(veh, success, range_m)
    if expected is None:
        assert np.isnan(prr)
    else:
        assert prr == expected
