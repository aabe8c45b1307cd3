import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jinxin.diagnostics.zones import ZonePartition, decay_rates, zone_decay_check, zone_partition
from jinxin.waves.ansatz import transition_time

SPEEDS = np.array([-1.0, 0.0, 1.0])


def test_t0_example():
    z = ZonePartition(SPEEDS, np.array([0.5, 0.0, 0.0]), transition_time(SPEEDS, [0.5, 0.0, 0.0]))
    assert z.t0 == pytest.approx(2.0)


def test_t0_zero_without_shifts(euler_fan):
    assert zone_partition(euler_fan, np.zeros(3)).t0 == 0.0


@given(x=st.floats(-100, 100), t=st.floats(0.01, 100))
def test_wedges_partition_the_line(x, t):
    z = ZonePartition(SPEEDS, np.zeros(3), 0.0)
    k = int(z.classify(x, t))
    assert 1 <= k <= 3
    inside = [not bool(z.outside(i, x, t)) for i in (1, 2, 3)]
    assert sum(inside) == 1 and inside[k - 1]
    if x not in z.edges(t):
        assert not z.minus(k, x, t) and not z.plus(k, x, t)
        for i in range(1, 4):
            if i != k:
                assert bool(z.minus(i, x, t)) ^ bool(z.plus(i, x, t))


def test_edges_are_speed_midpoints():
    z = ZonePartition(SPEEDS, np.zeros(3), 0.0)
    np.testing.assert_allclose(z.edges(4.0), [-2.0, 2.0])


def test_rates_positive(euler_ansatz):
    rates = decay_rates(euler_ansatz)
    assert set(rates) == {1, 2, 3}
    assert all(r > 0 for r in rates.values())


def test_tails_bounded_outside_own_wedge(euler_ansatz):
    shifted = euler_ansatz.with_shifts([3.0, -2.0, 1.0])
    t0 = zone_partition(shifted.fan, shifted.shifts).t0
    xs = np.linspace(-9000, 9000, 4001)
    ts = np.linspace(t0 + 1.0, 8000.0, 40)
    out = zone_decay_check(shifted, xs, ts)
    assert all(w["bounded"] for w in out.values())


def test_non_monotone_speeds_rejected(euler_fan):
    from dataclasses import replace
    with pytest.raises(ValueError):
        zone_partition(replace(euler_fan, speeds=euler_fan.speeds[::-1]), np.zeros(3))
