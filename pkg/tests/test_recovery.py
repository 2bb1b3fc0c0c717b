import numpy as np
import pytest

from cspilot.channel import (
    SparseChannel,
    build_sensing_matrix,
    default_params,
    sample_channel,
    select_pilot_tones,
    synthesize_measurement,
)
from cspilot.recovery import (
    DantzigConfig,
    comb_tone_set,
    dantzig_epsilon,
    dantzig_recover,
    fde_ls_recover,
    nmse,
    omp_recover,
    threshold_support,
)
from cspilot.tones import DESIGNED_TONES_100


def _single_tap_channel(params, delay=0, gain=1.0):
    taps = np.zeros(params.tap_count, dtype=complex)
    taps[delay] = gain
    return SparseChannel(taps=taps, support=np.array([delay]))


def test_config_validation():
    with pytest.raises(ValueError):
        DantzigConfig(epsilon_rule="explicit")  # missing epsilon
    with pytest.raises(ValueError):
        DantzigConfig(epsilon=-1.0, epsilon_rule="explicit")
    with pytest.raises(ValueError):
        DantzigConfig(epsilon_rule="scaled")  # missing noise variance
    with pytest.raises(ValueError):
        DantzigConfig(epsilon=1.0, epsilon_rule="banana")
    with pytest.raises(ValueError):
        DantzigConfig(epsilon=1.0, candidate_cap=0)


def test_scaled_epsilon_rule():
    p = default_params()
    cfg = DantzigConfig(epsilon_rule="scaled", noise_variance=0.01)
    # sigma sqrt(E M) sqrt(2 ln D) = 0.1 * sqrt(20) * sqrt(2 ln 100)
    assert dantzig_epsilon(cfg, p) == pytest.approx(1.3572280848830225, abs=1e-12)
    double = DantzigConfig(epsilon_rule="scaled", noise_variance=0.01, scale_c=2.0)
    assert dantzig_epsilon(double, p) == pytest.approx(2 * 1.3572280848830225, rel=1e-12)
    explicit = DantzigConfig(epsilon=0.5, epsilon_rule="explicit")
    assert dantzig_epsilon(explicit, p) == 0.5


def test_dantzig_single_tap_noiseless(rng):
    p = default_params()
    h = _single_tap_channel(p, delay=0, gain=1.0)
    X = build_sensing_matrix(select_pilot_tones(p, rng), p)
    y = synthesize_measurement(X, h, p, 0.0, rng)
    res = dantzig_recover(y, X, p, DantzigConfig(epsilon=1e-9, epsilon_rule="explicit"))
    assert res.solver_status == "optimal"
    assert np.array_equal(res.recovered_support, [0])
    assert abs(res.estimate[0] - 1.0) < 1e-6
    assert np.max(np.abs(np.delete(res.estimate, 0))) < 1e-6


def test_dantzig_zero_measurement(rng):
    p = default_params()
    X = build_sensing_matrix(select_pilot_tones(p, rng), p)
    res = dantzig_recover(
        np.zeros(20, dtype=complex), X, p, DantzigConfig(epsilon=0.1, epsilon_rule="explicit")
    )
    assert res.objective_value == pytest.approx(0.0, abs=1e-12)
    assert np.all(res.estimate == 0)
    assert res.recovered_support.size == 0


def test_dantzig_epsilon_constraint_satisfied(rng):
    # raw program output must respect the per-component residual bound
    p = default_params()
    cfg = DantzigConfig(epsilon_rule="scaled", noise_variance=0.01, debias=False)
    for _ in range(5):
        h = sample_channel(p, rng)
        X = build_sensing_matrix(select_pilot_tones(p, rng), p)
        y = synthesize_measurement(X, h, p, 0.01, rng)
        res = dantzig_recover(y, X, p, cfg)
        assert res.solver_status == "optimal"
        corr = X.rows.conj().T @ (y - np.sqrt(p.symbol_energy) * X.rows @ res.estimate)
        bound = dantzig_epsilon(cfg, p) / np.sqrt(2.0)
        assert np.max(np.abs(corr.real)) <= bound + 1e-7
        assert np.max(np.abs(corr.imag)) <= bound + 1e-7


def test_dantzig_truth_feasible_objective_bound(rng):
    # when the constraint level admits the true channel, the l1 optimum
    # cannot exceed the truth's split-variable norm
    p = default_params()
    for _ in range(10):
        h = sample_channel(p, rng)
        X = build_sensing_matrix(select_pilot_tones(p, rng), p)
        noise_var = 0.01
        y = synthesize_measurement(X, h, p, noise_var, rng)
        z_corr = X.rows.conj().T @ (y - np.sqrt(p.symbol_energy) * X.rows @ h.taps)
        eps = np.sqrt(2.0) * float(np.max(np.abs(z_corr)))
        res = dantzig_recover(
            y, X, p, DantzigConfig(epsilon=eps, epsilon_rule="explicit", debias=False)
        )
        assert res.solver_status == "optimal"
        truth_l1 = float(np.abs(h.taps.real).sum() + np.abs(h.taps.imag).sum())
        assert res.objective_value <= truth_l1 + 1e-7


def test_debias_refit_never_raises_residual(rng):
    # on the support it selects from the raw solution, the LS refit is the
    # residual minimizer, so it cannot do worse than the truncated raw taps
    p = default_params()
    cfg = DantzigConfig(
        epsilon_rule="scaled", noise_variance=0.01, debias=True, magnitude_floor=0.01
    )
    X = build_sensing_matrix(DESIGNED_TONES_100, p)
    A = np.sqrt(p.symbol_energy) * X.rows
    improved = 0
    for _ in range(15):
        h = sample_channel(p, rng)
        y = synthesize_measurement(X, h, p, 0.01, rng)
        deb = dantzig_recover(y, X, p, cfg)
        raw = deb.raw_estimate
        support = threshold_support(raw, 0.01)
        truncated = np.zeros_like(raw)
        truncated[support] = raw[support]
        refit = np.zeros_like(raw)
        if support.size:
            coef, *_ = np.linalg.lstsq(A[:, support], y, rcond=None)
            refit[support] = coef
        r_trunc = np.sum(np.abs(y - A @ truncated) ** 2)
        r_refit = np.sum(np.abs(y - A @ refit) ** 2)
        assert r_refit <= r_trunc + 1e-9
        improved += int(nmse(h.taps, deb.estimate) < nmse(h.taps, raw))
    assert improved >= 12  # debias helps on the vast majority of trials


def test_raw_estimate_matches_debias_off(rng):
    p = default_params()
    h = sample_channel(p, rng)
    X = build_sensing_matrix(DESIGNED_TONES_100, p)
    y = synthesize_measurement(X, h, p, 0.01, rng)
    on = dantzig_recover(
        y, X, p, DantzigConfig(epsilon_rule="scaled", noise_variance=0.01, debias=True)
    )
    off = dantzig_recover(
        y, X, p, DantzigConfig(epsilon_rule="scaled", noise_variance=0.01, debias=False)
    )
    assert np.array_equal(on.raw_estimate, off.estimate)


def test_omp_noiseless_exact(rng):
    p = default_params()
    for _ in range(10):
        h = sample_channel(p, rng)
        X = build_sensing_matrix(select_pilot_tones(p, rng), p)
        y = synthesize_measurement(X, h, p, 0.0, rng)
        res = omp_recover(y, X, p, p.sparsity)
        assert np.array_equal(res.recovered_support, h.support)
        rel = np.linalg.norm(res.estimate - h.taps) / np.linalg.norm(h.taps)
        assert rel < 1e-8


def test_omp_zero_sparsity(rng):
    p = default_params()
    X = build_sensing_matrix(select_pilot_tones(p, rng), p)
    y = np.ones(20, dtype=complex)
    res = omp_recover(y, X, p, 0)
    assert np.all(res.estimate == 0)
    assert res.recovered_support.size == 0


def test_omp_deterministic(rng):
    p = default_params()
    h = sample_channel(p, rng)
    X = build_sensing_matrix(select_pilot_tones(p, rng), p)
    y = synthesize_measurement(X, h, p, 0.05, rng)
    a = omp_recover(y, X, p, 4)
    b = omp_recover(y, X, p, 4)
    assert np.array_equal(a.estimate, b.estimate)
    assert np.array_equal(a.recovered_support, b.recovered_support)


def test_omp_sparsity_cap(rng):
    p = default_params()
    X = build_sensing_matrix(select_pilot_tones(p, rng), p)
    with pytest.raises(ValueError):
        omp_recover(np.zeros(20, dtype=complex), X, p, 21)


def test_fde_noiseless_exact_dense(rng):
    # square invertible system recovers even a fully dense channel
    p = default_params(tap_count=100, sparsity=100, pilot_count=100)
    h = sample_channel(p, rng)
    X = build_sensing_matrix(comb_tone_set(p), p)
    y = synthesize_measurement(X, h, p, 0.0, rng)
    res = fde_ls_recover(y, X, p)
    rel = np.linalg.norm(res.estimate - h.taps) / np.linalg.norm(h.taps)
    assert rel < 1e-10


def test_fde_zero_measurement(rng):
    p = default_params()
    X = build_sensing_matrix(comb_tone_set(p), p)
    res = fde_ls_recover(np.zeros(100, dtype=complex), X, p)
    assert np.all(res.estimate == 0)


def test_fde_requires_enough_tones(rng):
    p = default_params()
    X = build_sensing_matrix(select_pilot_tones(p, rng), p)  # only 20 tones
    with pytest.raises(ValueError):
        fde_ls_recover(np.zeros(20, dtype=complex), X, p)


def test_fde_comparable_at_20db(rng):
    # unit noise with the pilot energy raised to keep 20 dB per tone; the
    # explicit constraint level is the scaled rule made SNR-covariant
    p = default_params(symbol_energy=100.0)
    comb = build_sensing_matrix(comb_tone_set(p), p)
    cfg = DantzigConfig(
        epsilon=13.572280848830225,
        epsilon_rule="explicit",
        noise_variance=1.0,
        debias=True,
        magnitude_floor=0.01,
    )
    cs, fde = [], []
    for _ in range(100):
        h = sample_channel(p, rng)
        X = build_sensing_matrix(DESIGNED_TONES_100, p)
        y = synthesize_measurement(X, h, p, 1.0, rng)
        cs.append(nmse(h.taps, dantzig_recover(y, X, p, cfg).estimate))
        yf = synthesize_measurement(comb, h, p, 1.0, rng)
        fde.append(nmse(h.taps, fde_ls_recover(yf, comb, p).estimate))
    assert np.mean(cs) <= np.mean(fde) + 3.0


def test_nmse_values():
    truth = np.array([1.0 + 1j, -2.0, 0.5j])
    assert nmse(truth, truth.copy()) == -200.0
    assert nmse(truth, np.zeros(3, dtype=complex)) == pytest.approx(0.0, abs=1e-12)
    assert nmse(truth, 2 * truth) == pytest.approx(0.0, abs=1e-12)
    assert nmse(truth, truth, floor_db=-50.0) == -50.0
    with pytest.raises(ValueError):
        nmse(np.zeros(3), np.ones(3))


def test_threshold_support_rule():
    est = np.array([1.0, 0.02, 0.005, 0.0])
    assert np.array_equal(threshold_support(est), [0, 1])  # 1% of max
    assert np.array_equal(threshold_support(est, floor=0.05), [0])
    assert threshold_support(np.zeros(4)).size == 0
