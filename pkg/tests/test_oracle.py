import numpy as np
import pytest

from stabgi import oracle, perturb
from stabgi.dense import rank_factorization
from stabgi.errors import InputError
from stabgi.geninv import moore_penrose
from stabgi.oracle import (
    COMPLEMENT_MODES,
    REGIMES,
    InstanceSpec,
    battery,
    margin_filter,
    random_instance,
)
from stabgi.perturb import PerturbedSystem


def test_spec_validation():
    with pytest.raises(InputError):
        InstanceSpec(0, 3, 0, "stable-small")
    with pytest.raises(InputError):
        InstanceSpec(3, 3, 4, "stable-small")
    with pytest.raises(InputError):
        InstanceSpec(3, 3, 1, "nope")
    with pytest.raises(InputError):
        InstanceSpec(3, 3, 3, "rank-increasing")  # needs r < min(m, n)
    with pytest.raises(InputError):
        InstanceSpec(3, 4, 3, "full-rank")  # needs square full rank
    with pytest.raises(InputError):
        InstanceSpec(3, 3, 1, "stable-small", scale=0.0)


def test_instance_determinism():
    spec = InstanceSpec(5, 4, 2, "stable-small", "random-oblique", seed=123)
    a = random_instance(spec)
    b = random_instance(spec)
    np.testing.assert_array_equal(a.bundle.T, b.bundle.T)
    np.testing.assert_array_equal(a.bundle.S, b.bundle.S)
    np.testing.assert_array_equal(a.dT, b.dT)


def test_zero_perturbation_regime():
    sys = random_instance(InstanceSpec(4, 4, 2, "zero-perturbation", seed=5))
    assert not sys.dT.any()
    conds, _ = perturb.stability_conditions(sys)
    assert all(d.value for d in conds.values())


def test_regime_rank_exact(rng):
    for seed in rng.integers(2**63, size=20):
        spec = InstanceSpec(5, 6, 3, "stable-small", seed=int(seed))
        sys = random_instance(spec)
        assert rank_factorization(sys.bundle.T).rank == 3


def test_stable_small_regime_is_stable(rng):
    for seed in rng.integers(2**63, size=30):
        spec = InstanceSpec(5, 4, 2, "stable-small", "random-oblique", seed=int(seed))
        sys = random_instance(spec)
        assert perturb.stable_range_condition(sys).value


def test_rank_increasing_regime(rng):
    for seed in rng.integers(2**63, size=30):
        spec = InstanceSpec(5, 4, 2, "rank-increasing", seed=int(seed))
        sys = random_instance(spec)
        assert rank_factorization(sys.Tbar).rank > 2
        assert not perturb.stable_range_condition(sys).value


def test_null_hitting_regime(rng):
    for seed in rng.integers(2**63, size=30):
        spec = InstanceSpec(5, 4, 2, "null-hitting", "random-oblique", seed=int(seed))
        sys = random_instance(spec)
        assert not perturb.stable_range_condition(sys).value


def test_margin_filter_examples():
    bundle = moore_penrose(np.diag([1.0, 0.0]))
    assert margin_filter(PerturbedSystem.build(bundle, np.zeros((2, 2))))

    # sigma_min(carrier_Y) = 3e-10 sits inside the forbidden band
    # (1e-11, 1e-9) around the 1e-10 relative threshold
    full = moore_penrose(np.eye(2))
    dt = np.diag([3e-10 - 1.0, 0.0])
    assert not margin_filter(PerturbedSystem.build(full, dt))


def test_margin_filter_keeps_generic_instances(rng):
    kept = 0
    total = 200
    for seed in rng.integers(2**63, size=total):
        spec = InstanceSpec(4, 4, 2, "stable-small", seed=int(seed))
        if margin_filter(random_instance(spec)):
            kept += 1
    assert kept >= total - 2


def test_battery_empty():
    report = battery(0)
    assert report.instances_run == 0
    assert report.instances_kept == 0
    assert report.instances_excluded == 0
    assert report.failures == []


def test_battery_small():
    report = battery(10, dims_max=6, seed=42)
    assert report.instances_run == 10
    assert report.instances_kept + report.instances_excluded == 10
    assert report.threeway_agreement_count == report.instances_kept
    assert report.failures == []


def test_battery_determinism():
    a = battery(20, dims_max=5, seed=9)
    b = battery(20, dims_max=5, seed=9)
    assert a.gi_residual_max == b.gi_residual_max
    assert a.subspace_distance_max == b.subspace_distance_max
    assert a.stable_count == b.stable_count
    assert a.instances_kept == b.instances_kept


def test_battery_null_hitting_all_unstable():
    report = battery(50, dims_max=6, seed=7, regimes=("null-hitting",))
    assert report.failures == []
    assert report.stable_count == 0


def test_battery_cycles_regimes_and_modes():
    seeds = np.random.SeedSequence(3).generate_state(20, dtype=np.uint64)
    specs = [
        oracle.draw_spec(REGIMES[i % 5], COMPLEMENT_MODES[(i // 5) % 2], int(seeds[i]), 6)
        for i in range(20)
    ]
    assert {s.regime for s in specs} == set(REGIMES)
    assert {s.complement_mode for s in specs} == set(COMPLEMENT_MODES)
