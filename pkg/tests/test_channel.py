from collections import Counter
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from cv2xsim.channel import (
    ChannelDomainError,
    ChannelModelKind,
    LinkLoss,
    LosState,
    OutOfValidityRangeError,
    PropagationParams,
    RangePolicy,
    ShadowingSpec,
    blockage_loss,
    count_blockers,
    gpp3_pathloss,
    link_loss,
    sample_shadowing,
    shadowing_std_db,
    two_ray_cross_distance,
    two_ray_pathloss,
    winner_breakpoint_distance,
    winner_d1_pathloss,
)
from cv2xsim.rng import RandomStream
from cv2xsim.scenario import HighwayConfig, build_scenario

P = PropagationParams()
NLOS = replace(P, los_state=LosState.NLOS)
CLAMP = replace(P, winner_range_policy=RangePolicy.CLAMP)
NLOS_CLAMP = replace(NLOS, winner_range_policy=RangePolicy.CLAMP)

# Golden values from hand evaluation with c = 299792458 m/s, f = 5.9 GHz,
# both antennas at 1.5 m (see tests/oracles.py for the formulas).
TWO_RAY_DC = 556.4468533281715
TWO_RAY_100 = 87.86482345472626
TWO_RAY_1000 = 112.95634963777275
WINNER_DBP = 177.12253455021875
WINNER_LOS_100 = 44.43764014612251
WINNER_LOS_1000 = 124.09244642589898
WINNER_NLOS_100 = 107.13108675562047
WINNER_NLOS_1000 = 135.2860867556205
GPP3_LOS_100 = 87.81704023284288
GPP3_LOS_1 = 47.817040232842885
GPP3_NLOS = 51.41910302003653


def test_two_ray_examples():
    assert two_ray_cross_distance(P) == pytest.approx(TWO_RAY_DC, rel=1e-12)
    assert two_ray_pathloss(100, P) == pytest.approx(TWO_RAY_100, rel=1e-12)
    assert two_ray_pathloss(1000, P) == pytest.approx(TWO_RAY_1000, rel=1e-12)


def test_two_ray_continuity_at_cross_distance():
    dc = two_ray_cross_distance(P)
    lam = P.wavelength_m
    near = 20 * np.log10(4 * np.pi * dc / lam)
    far = 20 * np.log10(dc**2 / (P.tx_height_m * P.rx_height_m))
    assert abs(near - far) < 1e-9
    eps = 1e-6
    assert abs(two_ray_pathloss(dc - eps, P) - two_ray_pathloss(dc + eps, P)) < 1e-6


def test_winner_examples():
    assert winner_breakpoint_distance(P) == pytest.approx(WINNER_DBP, rel=1e-12)
    assert winner_d1_pathloss(100, P) == pytest.approx(WINNER_LOS_100, rel=1e-12)
    assert winner_d1_pathloss(1000, P) == pytest.approx(WINNER_LOS_1000, rel=1e-12)
    assert winner_d1_pathloss(100, NLOS) == pytest.approx(WINNER_NLOS_100, rel=1e-12)
    assert winner_d1_pathloss(1000, NLOS) == pytest.approx(WINNER_NLOS_1000, rel=1e-12)


def test_winner_standard_intercept_only_shifts_pre_breakpoint():
    p = replace(P, winner_standard_intercept=True)
    assert winner_d1_pathloss(100, p) == pytest.approx(WINNER_LOS_100 + 44.2, rel=1e-12)
    assert winner_d1_pathloss(1000, p) == pytest.approx(WINNER_LOS_1000, rel=1e-12)


def test_winner_clamp_and_strict():
    counter = Counter()
    assert winner_d1_pathloss(4.0, CLAMP, counter=counter) == pytest.approx(oracles.winner_d1(10.0, True))
    assert winner_d1_pathloss(20.0, NLOS_CLAMP, counter=counter) == pytest.approx(oracles.winner_d1(50.0, False))
    assert winner_d1_pathloss(6000.0, NLOS_CLAMP, counter=counter) == pytest.approx(oracles.winner_d1(5000.0, False))
    assert counter["winner_clamped"] == 3

    strict = NLOS
    assert strict.winner_range_policy is RangePolicy.STRICT
    with pytest.raises(OutOfValidityRangeError, match="lower"):
        winner_d1_pathloss(20.0, strict)
    with pytest.raises(OutOfValidityRangeError, match="upper"):
        winner_d1_pathloss(5000.0, strict)
    assert winner_d1_pathloss(100.0, strict) == pytest.approx(WINNER_NLOS_100)


def test_gpp3_examples():
    assert gpp3_pathloss(100, P) == pytest.approx(GPP3_LOS_100, rel=1e-12)
    assert gpp3_pathloss(1, P) == pytest.approx(GPP3_LOS_1, rel=1e-12)
    for d in (1, 37, 900, 8000):
        assert gpp3_pathloss(d, NLOS) == pytest.approx(GPP3_NLOS, rel=1e-12)
    corrected = replace(NLOS, gpp3_nlos_corrected=True)
    assert gpp3_pathloss(100, corrected) == pytest.approx(oracles.gpp3(100, False, corrected=True))


@pytest.mark.parametrize("fn", [two_ray_pathloss, winner_d1_pathloss, gpp3_pathloss])
@pytest.mark.parametrize("d", [0.0, -3.0])
def test_non_positive_distance_rejected(fn, d):
    with pytest.raises(ChannelDomainError):
        fn(d, P)


def test_vectorised_matches_scalar_with_los_override():
    d = np.array([5.0, 30.0, 150.0, 400.0, 2000.0])
    los = np.array([True, False, True, False, True])
    got = winner_d1_pathloss(d, CLAMP, los=los)
    assert np.allclose(got, [oracles.winner_d1(x, l) for x, l in zip(d, los)], rtol=1e-12)
    got = gpp3_pathloss(d, P, los=los)
    assert np.allclose(got, [oracles.gpp3(x, l) for x, l in zip(d, los)], rtol=1e-12)


d_strategy = st.floats(1.0, 9000.0)


def increasing(f, lo, hi):
    # strictly increasing once the distances are resolvable; adjacent doubles
    # may round to the same log10
    a, b = f(lo, P), f(hi, P)
    return a < b if hi - lo > 1e-9 * hi else a <= b


@given(d_strategy, d_strategy)
def test_two_ray_and_gpp3_los_monotone(a, b):
    lo, hi = sorted((a, b))
    assert increasing(two_ray_pathloss, lo, hi)
    assert increasing(gpp3_pathloss, lo, hi)


@given(st.floats(10.001, 177.0), st.floats(10.001, 177.0))
def test_winner_los_monotone_pre_breakpoint(a, b):
    lo, hi = sorted((a, b))
    assert increasing(winner_d1_pathloss, lo, hi)


@given(st.floats(177.2, 9999.0), st.floats(177.2, 9999.0))
def test_winner_los_monotone_post_breakpoint(a, b):
    lo, hi = sorted((a, b))
    assert increasing(winner_d1_pathloss, lo, hi)


def test_gpp3_los_below_two_ray_on_dense_grid():
    # The two curves share the 20 dB/decade slope below the cross distance and
    # differ only by a constant; beyond it two-ray falls 40 dB/decade.
    d = np.linspace(10, 1000, 991)
    gap = two_ray_pathloss(d, P) - gpp3_pathloss(d, P)
    assert np.all(gap > 0)
    assert gap.min() == pytest.approx(oracles.two_ray(10) - oracles.gpp3(10, True), abs=1e-9)
    assert gap[-1] == pytest.approx(TWO_RAY_1000 - oracles.gpp3(1000, True), abs=1e-9)


def test_shadowing_std_per_branch():
    p = replace(P, shadowing_enabled=True)
    pn = replace(p, los_state=LosState.NLOS)
    assert shadowing_std_db(ChannelModelKind.WINNER_II_D1, 100, p) == 4
    assert shadowing_std_db(ChannelModelKind.WINNER_II_D1, 500, p) == 6
    assert shadowing_std_db(ChannelModelKind.WINNER_II_D1, 500, pn) == 8
    assert shadowing_std_db(ChannelModelKind.GPP3_REL15, 500, pn) == 3
    assert shadowing_std_db(ChannelModelKind.TWO_RAY, 500, p) == 0
    assert shadowing_std_db(ChannelModelKind.GPP3_REL15, 500, P) == 0


def test_sample_shadowing_degenerate_and_replay():
    s = RandomStream(7, 1, 2, 3)
    assert sample_shadowing(ShadowingSpec(0.0), s) == 0.0
    assert sample_shadowing(ShadowingSpec(8.0, enabled=False), s) == 0.0
    a = sample_shadowing(ShadowingSpec(8.0), RandomStream(7, 1, 2, 3))
    b = sample_shadowing(ShadowingSpec(8.0), RandomStream(7, 1, 2, 3))
    assert a == b and a != 0.0


def test_shadowing_statistics_sigma8():
    z = 8.0 * RandomStream(12345).normals(1_000_000)
    assert abs(z.mean()) < 0.05
    assert abs(z.std() / 8.0 - 1) < 0.01


def test_blockage_counts_and_cap():
    sc = build_scenario(HighwayConfig(length_m=200, lanes=2, ivd_m=10))
    v = sc.vehicles
    assert count_blockers(sc, v[0], v[1]) == 0
    assert blockage_loss(sc, v[0], v[1], P) == 0
    assert blockage_loss(sc, v[0], v[2], P) == 5
    assert blockage_loss(sc, v[2], v[0], P) == 5
    assert blockage_loss(sc, v[0], v[11], P) == 25  # 10 blockers, capped
    assert count_blockers(sc, v[0], v[25]) == 0  # other lane
    assert blockage_loss(sc, v[0], v[2], replace(P, blockage_enabled=False)) == 0


def test_link_loss_composition():
    ll = link_loss(ChannelModelKind.TWO_RAY, 100, P)
    assert ll == LinkLoss(two_ray_pathloss(100, P), 0.0, 0.0)
    assert ll.total_db == ll.pathloss_db

    ll = link_loss(ChannelModelKind.GPP3_REL15, 100, P, n_blockers=1)
    assert ll.total_db == pytest.approx(92.81704023284288, rel=1e-12)
    assert ll.blockage_db == 5

    # blockage is a 3GPP-only term
    assert link_loss(ChannelModelKind.TWO_RAY, 100, P, n_blockers=3).blockage_db == 0


@pytest.mark.parametrize("model", list(ChannelModelKind))
def test_link_loss_replay_and_identity(model):
    p = replace(P, shadowing_enabled=True, two_ray_shadowing_std_db=2.0)
    a = link_loss(model, 250, p, n_blockers=2, rng_stream=RandomStream(99, 4, 1, 2))
    b = link_loss(model, 250, p, n_blockers=2, rng_stream=RandomStream(99, 4, 1, 2))
    assert a == b
    assert a.total_db == a.pathloss_db + a.shadowing_db + a.blockage_db
    assert a.shadowing_db != 0


def test_link_loss_requires_stream_when_shadowing():
    with pytest.raises(ValueError):
        link_loss(ChannelModelKind.GPP3_REL15, 100, replace(P, shadowing_enabled=True))


def test_invalid_params():
    with pytest.raises(ChannelDomainError):
        PropagationParams(carrier_freq_hz=0)
    with pytest.raises(ChannelDomainError):
        PropagationParams(tx_height_m=0)
