import itertools
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from beamcs.arrays import ArrayGeometry, build_grid
from beamcs.channel import ChannelParams, ChannelRealization, PathComponent, sample_channel
from beamcs.codebooks import dft_codebook, group_columns, random_codebook
from beamcs.detect import (BeamPair, beam_index_errors, beam_sin_values, cs_detect,
                           exhaustive_search, omp, signed_circular_diff, true_pairs)
from beamcs.metrics import single_beam_match
from beamcs.sweep import MeasurementSet, SweepConfig, acquire, build_sensing_operator


def make_channel(paths, n_bs=64, n_ue=8):
    scale = math.sqrt(n_bs * n_ue / len(paths))
    return ChannelRealization(list(paths), scale, ArrayGeometry(n_bs), ArrayGeometry(n_ue))


def on_beam_path(tx_beam, rx_beam, n_tx=64, n_rx=8, gain=1.0 + 0.0j, delay=0.0):
    tx_sin = beam_sin_values(n_tx)[tx_beam]
    rx_sin = beam_sin_values(n_rx)[rx_beam]
    return PathComponent(gain, delay, math.asin(tx_sin), math.asin(rx_sin), 0, 0)


def test_true_pairs_exact_directions():
    ch = make_channel([on_beam_path(5, 3), on_beam_path(40, 6)])
    assert true_pairs(ch, 64, 8) == {BeamPair(5, 3), BeamPair(40, 6)}


def test_true_pairs_dedups_nearby_rays():
    base = on_beam_path(12, 2)
    nudged = PathComponent(0.5j, 0.0, base.aod + 1e-4, base.aoa - 1e-4, 0, 1)
    ch = make_channel([base, nudged])
    pairs = true_pairs(ch, 64, 8)
    assert pairs == {BeamPair(12, 2)}


def test_true_pairs_matches_brute_force():
    def circ(a, b):
        d = abs(a - b)
        return min(d, 2.0 - d)

    rng = np.random.default_rng(17)
    for _ in range(25):
        ch = sample_channel(ChannelParams(), ArrayGeometry(64), ArrayGeometry(8), rng)
        got = true_pairs(ch, 64, 8)
        tx_sins, rx_sins = beam_sin_values(64), beam_sin_values(8)
        want = set()
        for p in ch.paths:
            best_tx = min(range(64), key=lambda b: (circ(tx_sins[b], math.sin(p.aod)), b))
            best_rx = min(range(8), key=lambda b: (circ(rx_sins[b], math.sin(p.aoa)), b))
            want.add(BeamPair(best_tx, best_rx))
        assert got == want


def test_true_pairs_wraps_at_sin_seam():
    # sin +0.99 is 0.01 from the endfire beam (sin -1) on the sin circle,
    # so it must map to beam n/2, not to the largest positive-sin beam
    seam = PathComponent(1.0 + 0.0j, 0.0, math.asin(0.99), math.asin(0.99), 0, 0)
    ch = make_channel([seam])
    assert true_pairs(ch, 64, 8) == {BeamPair(32, 4)}
    # midpoint between the last positive-sin beam and endfire ties low
    mid = PathComponent(1.0 + 0.0j, 0.0, math.asin(63.0 / 64.0), math.asin(7.0 / 8.0), 0, 0)
    ch = make_channel([mid])
    assert true_pairs(ch, 64, 8) == {BeamPair(31, 3)}


def default_sweep(noise_var, n_tx=64):
    return SweepConfig(n_tx_entries=n_tx, n_rx_entries=2, n_rf_ue=4, n_pilots=10,
                       noise_var=noise_var)


def dft_pair_codebooks(n_tx=64, n_ue=8):
    return dft_codebook(n_tx, n_tx, 6), group_columns(dft_codebook(n_ue, n_ue, 6), 4)


def test_exhaustive_search_finds_aligned_path():
    ch = make_channel([on_beam_path(23, 5)])
    tx, rx = dft_pair_codebooks()
    meas = acquire(ch, tx, rx, default_sweep(0.0), np.random.default_rng(0))
    out = exhaustive_search(meas, 1)
    assert out.estimated == (BeamPair(23, 5),)


def test_exhaustive_search_matches_brute_force_ranking():
    ch = sample_channel(ChannelParams(), ArrayGeometry(64), ArrayGeometry(8),
                        np.random.default_rng(21))
    tx, rx = dft_pair_codebooks()
    meas = acquire(ch, tx, rx, default_sweep(0.5), np.random.default_rng(22))
    n_pairs = 5
    out = exhaustive_search(meas, n_pairs)
    # independent route: accumulate energies straight from the stacked vector
    metric = {}
    n_rxb = 8
    for k in range(10):
        for i in range(64):
            for j in range(2):
                for r in range(4):
                    flat = k * 128 * 4 + (i * 2 + j) * 4 + r
                    key = (i, j * 4 + r)
                    metric[key] = metric.get(key, 0.0) + abs(meas.y[flat]) ** 2
    want = sorted(metric, key=lambda p: (-metric[p], p[0], p[1]))[:n_pairs]
    assert [tuple(p) for p in out.estimated] == want


def test_exhaustive_search_tie_break_prefers_low_indices():
    energy = np.ones((4, 1, 2, 3))
    y = np.ones(4 * 1 * 2 * 3, dtype=complex)
    meas = MeasurementSet(y, energy, np.eye(4), np.eye(2),
                          SweepConfig(n_tx_entries=4, n_rx_entries=1, n_rf_ue=2, n_pilots=3))
    out = exhaustive_search(meas, 3)
    assert out.estimated == (BeamPair(0, 0), BeamPair(0, 1), BeamPair(1, 0))
    with pytest.raises(ValueError):
        exhaustive_search(meas, 9)


def test_omp_recovers_single_column():
    rng = np.random.default_rng(1)
    a = rng.standard_normal((12, 20)) + 1j * rng.standard_normal((12, 20))
    y = 2.5 * a[:, 13]
    res = omp(a, y, 1)
    assert res.support == (13,)
    assert_allclose(res.coefficients, [2.5], atol=1e-10)
    assert not res.ridge_flagged


def test_omp_orthonormal_two_atoms_ordered_by_magnitude():
    a = np.eye(8, dtype=complex)
    y = np.zeros(8, dtype=complex)
    y[1], y[5] = 3.0, 1.0
    res = omp(a, y, 2)
    assert res.support == (1, 5)
    assert_allclose(res.coefficients, [3.0, 1.0], atol=1e-12)
    assert res.residual_norms[-1] < 1e-12


def test_omp_residual_norms_never_increase():
    rng = np.random.default_rng(33)
    for _ in range(10):
        a = rng.standard_normal((24, 40)) + 1j * rng.standard_normal((24, 40))
        y = rng.standard_normal(24) + 1j * rng.standard_normal(24)
        res = omp(a, y, 8)
        norms = (float(np.linalg.norm(y)),) + res.residual_norms
        for prev, cur in zip(norms, norms[1:]):
            assert cur <= prev + 1e-9 * norms[0]


def test_omp_matches_exhaustive_l0_on_small_instances():
    # sanity subset; the acceptance suite runs the full 100 seeds
    for seed in range(20):
        rng = np.random.default_rng(seed)
        a = (rng.standard_normal((32, 64)) + 1j * rng.standard_normal((32, 64))) / np.sqrt(2)
        supp = rng.choice(64, size=2, replace=False)
        coef = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        y = a[:, supp] @ coef
        best = None
        for combo in itertools.combinations(range(64), 2):
            sub = a[:, combo]
            c, _, _, _ = np.linalg.lstsq(sub, y, rcond=None)
            r = float(np.linalg.norm(y - sub @ c))
            if best is None or r < best[0] - 1e-12:
                best = (r, frozenset(combo))
        assert frozenset(omp(a, y, 2).support) == best[1]


def test_omp_duplicate_columns_trigger_ridge_flag():
    u = np.array([1.0, 1j, -1.0, 2.0]) / np.sqrt(7)
    a = np.stack([u, u], axis=1)
    res = omp(a, u, 2)
    assert res.support == (0, 1)
    assert res.ridge_flagged


def test_omp_rejects_bad_sparsity():
    a = np.eye(4)
    with pytest.raises(ValueError):
        omp(a, np.ones(4), 0)
    with pytest.raises(ValueError):
        omp(a, np.ones(4), 5)


def cs_setup(multiplier, noise_var=0.0, n_tx=64, n_ue=8, seed=7):
    tx, rx = dft_pair_codebooks(n_tx, n_ue)
    cfg = default_sweep(noise_var, n_tx)
    tx_grid = build_grid(ArrayGeometry(n_tx), multiplier)
    rx_grid = build_grid(ArrayGeometry(n_ue), multiplier)
    op = build_sensing_operator(tx, rx, tx_grid, rx_grid, cfg)
    return tx, rx, cfg, op


def test_cs_detect_on_grid_single_path():
    for mult in (1, 3):
        tx, rx, cfg, op = cs_setup(mult)
        ch = make_channel([on_beam_path(37, 2)])
        meas = acquire(ch, tx, rx, cfg, np.random.default_rng(0))
        out = cs_detect(op, meas, sparsity=1, n_tx_beams=64, n_rx_beams=8, n_pairs=1)
        assert out.estimated == (BeamPair(37, 2),)
        assert not out.ridge_flagged


def test_cs_detect_support_bin_arithmetic():
    tx, rx, cfg, op = cs_setup(3)
    ch = make_channel([on_beam_path(10, 6)])
    meas = acquire(ch, tx, rx, cfg, np.random.default_rng(0))
    out = cs_detect(op, meas, sparsity=1, n_tx_beams=64, n_rx_beams=8, n_pairs=1)
    g = out.support[0]
    # bin splits as (tx_bin, rx_bin) with the rx grid minor
    assert (g // op.n_rx_bins, g % op.n_rx_bins) == (10 * 3, 6 * 3)


def test_cs_detect_pads_when_dedup_runs_short():
    tx, rx, cfg, op = cs_setup(1)
    ch = make_channel([on_beam_path(20, 4)])
    meas = acquire(ch, tx, rx, cfg, np.random.default_rng(0))
    out = cs_detect(op, meas, sparsity=1, n_tx_beams=64, n_rx_beams=8, n_pairs=2)
    assert len(out.estimated) == 2
    assert out.estimated[0] == BeamPair(20, 4)
    assert out.estimated[1] != out.estimated[0]


def test_cs_detect_two_separated_paths():
    tx, rx, cfg, op = cs_setup(3)
    ch = make_channel([on_beam_path(8, 1, gain=2.0), on_beam_path(50, 6, gain=1.0)])
    meas = acquire(ch, tx, rx, cfg, np.random.default_rng(0))
    out = cs_detect(op, meas, sparsity=2, n_tx_beams=64, n_rx_beams=8, n_pairs=2)
    assert set(out.estimated) == {BeamPair(8, 1), BeamPair(50, 6)}
    # stronger path carries the larger coefficient, so it ranks first
    assert out.estimated[0] == BeamPair(8, 1)


def test_cs_detect_high_snr_monte_carlo_single_beam_rate():
    tx, rx, cfg, op = cs_setup(3)
    cfg_noisy = SweepConfig(n_tx_entries=64, n_rx_entries=2, n_rf_ue=4, n_pilots=10,
                            noise_var=10.0 ** (-3.0))  # +30 dB transmit SNR
    hits = 0
    n = 500
    for t in range(n):
        ch = sample_channel(ChannelParams(), ArrayGeometry(64), ArrayGeometry(8),
                            np.random.default_rng(10_000 + t))
        truth = true_pairs(ch, 64, 8)
        meas = acquire(ch, tx, rx, cfg_noisy, np.random.default_rng(20_000 + t))
        out = cs_detect(op, meas, sparsity=6, n_tx_beams=64, n_rx_beams=8,
                        n_pairs=len(truth))
        hits += single_beam_match(out.estimated, truth)
    assert hits / n >= 0.99


def test_signed_circular_diff_representatives():
    assert signed_circular_diff(0, 63, 64) == 1
    assert signed_circular_diff(63, 0, 64) == -1
    assert signed_circular_diff(32, 0, 64) == -32
    assert signed_circular_diff(0, 32, 64) == -32
    assert signed_circular_diff(5, 5, 64) == 0


def test_beam_index_errors_nearest_assignment():
    est = [BeamPair(2, 3), BeamPair(10, 1)]
    truth = {BeamPair(1, 3)}
    tx_err, rx_err = beam_index_errors(est, truth, 16, 8)
    assert tx_err == [1] and rx_err == [0]


def test_beam_index_errors_tie_prefers_confident_estimate():
    est = [BeamPair(1, 0), BeamPair(3, 0)]
    truth = {BeamPair(2, 0)}
    tx_err, rx_err = beam_index_errors(est, truth, 16, 8)
    assert tx_err == [-1] and rx_err == [0]


def test_beam_index_errors_wraparound():
    est = [BeamPair(63, 7)]
    truth = {BeamPair(0, 0)}
    tx_err, rx_err = beam_index_errors(est, truth, 64, 8)
    assert tx_err == [-1] and rx_err == [-1]


def test_beam_index_errors_sides_scored_independently():
    # tx matched by the first estimate, rx by the second: both come out 0
    est = [BeamPair(5, 7), BeamPair(9, 3)]
    truth = {BeamPair(5, 3)}
    tx_err, rx_err = beam_index_errors(est, truth, 16, 8)
    assert tx_err == [0] and rx_err == [0]


def test_beam_index_errors_rejects_empty():
    with pytest.raises(ValueError):
        beam_index_errors([], {BeamPair(0, 0)}, 64, 8)
