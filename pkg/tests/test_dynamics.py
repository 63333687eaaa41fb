import numpy as np
import pytest

from swapqueue.core import LossMode, RepeaterConfig
from swapqueue.dynamics import (
    Policy,
    accumulate,
    apply_schedule,
    init_state,
    run,
    sample_arrivals,
    step,
)


def uniform_cfg(n=4, p=0.06, **kw):
    return RepeaterConfig.uniform(n, p, **kw)


def test_sample_arrivals_degenerate():
    rng = np.random.default_rng(0)
    zeros = sample_arrivals(rng, np.zeros((3, 3)))
    assert zeros.total == 0
    ones = sample_arrivals(rng, np.ones((3, 3)))
    assert ones.total == 9


def test_sample_arrivals_mean():
    rng = np.random.default_rng(42)
    probs = np.full((4, 4), 0.5)
    draws = 10_000
    totals = [sample_arrivals(rng, probs).total for _ in range(draws)]
    # total per period is Binomial(16, 0.5); mean 8, sd 2
    se = 2.0 / np.sqrt(draws)
    assert abs(np.mean(totals) - 8.0) < 3 * se


def test_accumulate():
    z = np.zeros((2, 2), dtype=np.int64)
    b = np.array([[1, 0], [0, 2]])
    out = accumulate(z, b)
    assert np.array_equal(out, b)
    assert np.array_equal(accumulate(out, b), 2 * b)


def test_apply_schedule_clamps_at_zero():
    z = np.array([[1, 0], [0, 0]], dtype=np.int64)
    s = np.eye(2, dtype=np.int64)
    out, swaps = apply_schedule(z, s)
    assert np.array_equal(out, np.zeros((2, 2)))
    # only the occupied queue produced a swap
    assert swaps == 1


def test_apply_schedule_counts_swaps():
    z = np.array([[3, 0, 0], [0, 2, 0], [0, 0, 0]], dtype=np.int64)
    out, swaps = apply_schedule(z, np.eye(3, dtype=np.int64))
    assert swaps == 2
    assert np.array_equal(out, np.diag([2, 1, 0]))


def test_apply_schedule_rejects_invalid():
    z = np.zeros((2, 2), dtype=np.int64)
    with pytest.raises(ValueError):
        apply_schedule(z, np.ones((2, 2), dtype=np.int64))
    with pytest.raises(ValueError):
        apply_schedule(z, np.eye(3, dtype=np.int64))


def test_step_drains_seeded_diagonal():
    # no arrivals, no loss: the seeded identity drains in one period
    cfg = uniform_cfg(3, 0.0, horizon=4)
    state = init_state(cfg, initial_z=np.eye(3, dtype=np.int64))
    state, m = step(state)
    assert m.z_total == 3  # measured before service
    assert m.swaps == 3
    assert state.z.sum() == 0
    state, m2 = step(state)
    assert m2.z_total == 0
    assert m2.swaps == 0


def test_step_full_loss_blocks_all_swaps():
    cfg = uniform_cfg(3, 0.5, gamma=1.0, horizon=50, seed=9)
    state = init_state(cfg)
    totals = []
    for _ in range(50):
        state, m = step(state)
        assert m.swaps == 0
        assert m.losses == 3
        totals.append(m.z_total)
    assert all(b <= a for a, b in zip(totals[1:], totals))  # non-decreasing


def test_step_saturated_switch_grows_linearly():
    # every queue receives one arrival per period but only n can be served
    cfg = uniform_cfg(2, 1.0, horizon=10)
    state = init_state(cfg)
    measured = []
    for _ in range(6):
        state, m = step(state)
        measured.append(m.z_total)
        assert m.swaps == 2
    assert measured == [4, 6, 8, 10, 12, 14]


def test_step_metrics_ratio():
    cfg = uniform_cfg(2, 1.0, horizon=3)
    state = init_state(cfg)
    _, m = step(state)
    assert m.incoming_total == 4
    assert m.delay == pytest.approx(1.0)
    assert m.rate_ratio == pytest.approx(0.5)
    assert m.outgoing_rate == pytest.approx(2.0)


def test_run_single_period():
    cfg = uniform_cfg(3, 0.2, horizon=1, seed=5)
    traj = run(cfg)
    assert traj.horizon == 1
    assert len(traj.records) == 1
    assert traj.records[0].period_index == 0


def test_run_is_deterministic():
    cfg = uniform_cfg(4, 0.1, horizon=200, seed=77)
    a = run(cfg)
    b = run(cfg)
    assert np.array_equal(a.z_totals, b.z_totals)
    assert np.array_equal(a.lyapunovs, b.lyapunovs)
    assert np.array_equal(a.final_z, b.final_z)
    c = run(RepeaterConfig.uniform(4, 0.1, horizon=200, seed=78))
    assert not np.array_equal(a.z_totals, c.z_totals)


def test_run_outputs_are_read_only():
    traj = run(uniform_cfg(3, 0.1, horizon=20))
    for arr in (traj.z_totals, traj.lyapunovs, traj.drifts, traj.final_z):
        with pytest.raises(ValueError):
            arr[0] = 0


def test_step_matches_run():
    for policy in Policy:
        for mode in (LossMode.DETERMINISTIC, LossMode.BINOMIAL):
            cfg = RepeaterConfig.uniform(
                3, 0.3, gamma=0.3, horizon=100, seed=21, loss_mode=mode
            )
            traj = run(cfg, policy, impl="python")
            state = init_state(cfg)
            for t in range(cfg.horizon):
                state, m = step(state, policy)
                assert m.z_total == traj.z_totals[t]
                assert m.lyapunov == traj.lyapunovs[t]
                assert m.weight == traj.weights[t]
                assert m.swaps == traj.swaps[t]
                assert m.losses == traj.losses[t]
            assert np.array_equal(state.z, traj.final_z)


def test_kernel_matches_python():
    for policy in Policy:
        for mode in (LossMode.DETERMINISTIC, LossMode.BINOMIAL):
            cfg = RepeaterConfig.uniform(
                4, 0.25, gamma=0.25, h=0.6, horizon=300, seed=13, loss_mode=mode
            )
            py = run(cfg, policy, impl="python")
            kn = run(cfg, policy, impl="kernel")
            assert np.array_equal(py.z_totals, kn.z_totals)
            assert np.array_equal(py.lyapunovs, kn.lyapunovs)
            assert np.array_equal(py.weights, kn.weights)
            assert np.array_equal(py.swaps, kn.swaps)
            assert np.array_equal(py.final_z, kn.final_z)


def test_kernel_rejects_large_n():
    cfg = uniform_cfg(9, 0.01, horizon=10)
    with pytest.raises(ValueError):
        run(cfg, impl="kernel")


def test_drain_bound():
    # with no arrivals a backlog with max entry m empties within m*n periods
    rng = np.random.default_rng(31)
    for _ in range(15):
        n = int(rng.integers(2, 6))
        z0 = rng.integers(0, 6, size=(n, n))
        m = int(z0.max())
        if m == 0:
            continue
        cfg = uniform_cfg(n, 0.0, horizon=m * n, seed=int(rng.integers(1 << 16)))
        traj = run(cfg, impl="python", initial_z=z0)
        assert traj.final_z.sum() == 0


def test_conservation_per_period():
    cfg = uniform_cfg(3, 0.4, horizon=400, seed=3)
    traj = run(cfg)
    # measured backlog evolves by arrivals in, swaps out
    z_after = traj.z_totals - traj.swaps
    assert np.all(z_after >= 0)
    assert np.array_equal(traj.z_totals[1:], z_after[:-1] + traj.b_totals[1:])
    assert traj.final_z.sum() == z_after[-1]
    # the cumulative per-pair arrival counts agree with the period totals
    assert traj.arrival_totals.sum() == traj.b_totals.sum()


def test_swaps_capped_by_surviving_outputs():
    cfg = RepeaterConfig.uniform(5, 0.5, gamma=0.4, horizon=500, seed=8)
    traj = run(cfg)
    assert np.all(traj.swaps <= 5 - traj.losses)


def test_cumulative_swaps_monotone_in_noise():
    # more loss never helps: cumulative service is ordered across gamma
    for seed in (1, 2, 3, 4, 5):
        totals = []
        for gamma in (0.0, 0.25, 0.5, 1.0):
            cfg = RepeaterConfig.uniform(4, 0.4, gamma=gamma, horizon=400, seed=seed)
            totals.append(np.cumsum(run(cfg).swaps))
        for hi, lo in zip(totals, totals[1:]):
            assert np.all(hi >= lo)


def test_delayed_policy_warm_up():
    # before d periods of history exist the delayed policy serves nothing
    cfg = uniform_cfg(3, 0.5, horizon=20, seed=4)
    traj = run(cfg, Policy.DELAYED, delay_periods=5, impl="python")
    assert np.all(traj.swaps[:5] == 0)
    assert traj.swaps[5:].sum() > 0


def test_delayed_zero_equals_fresh():
    cfg = uniform_cfg(3, 0.4, horizon=200, seed=12)
    fresh = run(cfg, Policy.MAXWEIGHT)
    lagless = run(cfg, Policy.DELAYED, delay_periods=0)
    assert np.array_equal(fresh.z_totals, lagless.z_totals)
    assert np.array_equal(fresh.swaps, lagless.swaps)


def test_arrival_rates_property():
    cfg = uniform_cfg(3, 0.3, horizon=20_000, seed=14)
    traj = run(cfg)
    # empirical per-queue rates concentrate around 0.3
    assert np.allclose(traj.arrival_rates, 0.3, atol=0.02)


def test_run_validates_initial_state():
    cfg = uniform_cfg(3, 0.1, horizon=5)
    with pytest.raises(ValueError):
        run(cfg, initial_z=np.zeros((2, 2), dtype=np.int64))
    with pytest.raises(ValueError):
        run(cfg, initial_z=-np.eye(3, dtype=np.int64))
    with pytest.raises(ValueError):
        run(cfg, delay_periods=-1)
    with pytest.raises(ValueError):
        run(cfg, impl="cuda")
