"""Beam-pair detection from swept measurements.

Two detectors over the same acquisition: exhaustive energy ranking over
(tx entry, combiner column) pairs, and sparse recovery on the grid-domain
operator followed by bin-to-beam rounding. Sparse recovery is orthogonal
matching pursuit with a fixed iteration count (the nominal path count);
each iteration re-fits all selected coefficients by least squares.

Beam indexing everywhere is DFT order: beam b covers sin value 2b/n for
b < n/2 and 2b/n - 2 above. Index differences are therefore circular.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .channel import ChannelRealization
from .sweep import MeasurementSet, SensingOperator


class BeamPair(NamedTuple):
    tx: int
    rx: int


@dataclass(frozen=True)
class DetectionOutcome:
    estimated: tuple          # BeamPairs, detection confidence descending
    truth: frozenset
    support: tuple | None = None
    coefficients: np.ndarray | None = None
    ridge_flagged: bool = False


@dataclass(frozen=True)
class OmpResult:
    support: tuple
    coefficients: np.ndarray
    residual: np.ndarray
    residual_norms: tuple
    ridge_flagged: bool


def beam_sin_values(n_beams: int) -> np.ndarray:
    """Sin-domain positions of the n_beams DFT-ordered beams."""
    b = np.arange(n_beams)
    return np.where(b < n_beams / 2, 2.0 * b / n_beams, 2.0 * b / n_beams - 2.0)


def _circular_sin_distance(beam_sins: np.ndarray, sin_value: float) -> np.ndarray:
    # half-wavelength steering vectors alias with period 2 in sin, so the
    # sin axis is a circle of circumference 2: sin +0.99 sits next to the
    # endfire beam at sin -1, not 1.99 away from it
    d = np.abs(beam_sins - sin_value)
    return np.minimum(d, 2.0 - d)


def true_pairs(ch: ChannelRealization, n_tx_beams: int, n_rx_beams: int) -> frozenset:
    """Nearest DFT beam pair per path, deduplicated.

    Nearest means smallest circular sin-domain distance, ties to the
    lower beam index.
    """
    tx_sins = beam_sin_values(n_tx_beams)
    rx_sins = beam_sin_values(n_rx_beams)
    pairs = set()
    for p in ch.paths:
        tx = int(np.argmin(_circular_sin_distance(tx_sins, math.sin(p.aod))))
        rx = int(np.argmin(_circular_sin_distance(rx_sins, math.sin(p.aoa))))
        pairs.add(BeamPair(tx, rx))
    return frozenset(pairs)


def exhaustive_search(meas: MeasurementSet, n_pairs: int) -> DetectionOutcome:
    """Top pairs by pilot-summed energy.

    Every combiner column counts as a distinct rx beam, so the pair grid
    is n_tx_entries x (n_rx_entries * n_rf_ue). Ties break toward the
    lower tx index, then the lower rx index.
    """
    energy = meas.per_block_energy.sum(axis=3)
    n_tx = energy.shape[0]
    n_rxb = energy.shape[1] * energy.shape[2]
    metric = energy.reshape(n_tx, n_rxb).reshape(-1)
    if not 1 <= n_pairs <= metric.size:
        raise ValueError("n_pairs must lie in [1, %d]" % metric.size)
    tx_idx = np.arange(metric.size) // n_rxb
    rx_idx = np.arange(metric.size) % n_rxb
    order = np.lexsort((rx_idx, tx_idx, -metric))
    est = tuple(BeamPair(int(tx_idx[i]), int(rx_idx[i])) for i in order[:n_pairs])
    return DetectionOutcome(estimated=est, truth=frozenset())


class _MatrixOperator:
    """Adapter so omp can run over a plain dense matrix."""

    def __init__(self, a: np.ndarray):
        self.a = np.asarray(a)
        self.shape = self.a.shape

    def adjoint_apply(self, r):
        return self.a.conj().T @ r

    def column(self, g):
        return self.a[:, g]

    def col_norms(self):
        return np.linalg.norm(self.a, axis=0)


def omp(op, y: np.ndarray, sparsity: int) -> OmpResult:
    """Orthogonal matching pursuit with column-normalized selection.

    op is a SensingOperator or a dense matrix. Selection maximizes
    |column^H residual| / ||column||, ties to the lower index, previously
    selected columns excluded. If the selected columns go rank deficient
    the least-squares step falls back to a ridge solve with
    1e-12 * (max column norm)^2 and the result is flagged.
    """
    if isinstance(op, np.ndarray):
        op = _MatrixOperator(op)
    if sparsity < 1 or sparsity > op.shape[1]:
        raise ValueError("sparsity must lie in [1, n_columns]")
    norms = op.col_norms()
    usable = norms > 0.0
    safe_norms = np.where(usable, norms, np.inf)
    ridge = 1e-12 * float(norms.max()) ** 2

    y = np.asarray(y, dtype=complex)
    residual = y.copy()
    support: list[int] = []
    cols: list[np.ndarray] = []
    res_norms: list[float] = []
    coef = np.zeros(0, dtype=complex)
    flagged = False
    for _ in range(sparsity):
        scores = np.abs(op.adjoint_apply(residual)) / safe_norms
        if support:
            scores[np.asarray(support)] = -1.0
        g = int(np.argmax(scores))
        support.append(g)
        cols.append(op.column(g))
        a = np.stack(cols, axis=1)
        coef, _, rank, _ = np.linalg.lstsq(a, y, rcond=None)
        if rank < len(support):
            gram = a.conj().T @ a + ridge * np.eye(len(support))
            coef = np.linalg.solve(gram, a.conj().T @ y)
            flagged = True
        residual = y - a @ coef
        res_norms.append(float(np.linalg.norm(residual)))
    return OmpResult(tuple(support), coef, residual, tuple(res_norms), flagged)


def _bin_to_beam(g_bin: int, n_bins: int, n_beams: int) -> int:
    # nearest beam in sin-domain index arithmetic; bins per beam = n_bins/n_beams
    return int(math.floor(g_bin * n_beams / n_bins + 0.5)) % n_beams


def cs_detect(op: SensingOperator, meas, sparsity: int, n_tx_beams: int,
              n_rx_beams: int, n_pairs: int) -> DetectionOutcome:
    """Sparse-recovery detector.

    Runs omp on the stacked measurements, splits each support bin g into
    (g // n_rx_bins, g % n_rx_bins), rounds bins to beams, and returns the
    first n_pairs distinct pairs by coefficient magnitude. If
    deduplication leaves fewer, pairs are appended from the largest
    remaining residual correlations.
    """
    if op.n_tx_bins % n_tx_beams or op.n_rx_bins % n_rx_beams:
        raise ValueError("grid sizes must be multiples of the beam counts")
    if n_pairs < 1:
        raise ValueError("n_pairs must be positive")
    y = meas.y if isinstance(meas, MeasurementSet) else np.asarray(meas)
    result = omp(op, y, sparsity)

    def to_pair(g: int) -> BeamPair:
        gt, gr = divmod(int(g), op.n_rx_bins)
        return BeamPair(_bin_to_beam(gt, op.n_tx_bins, n_tx_beams),
                        _bin_to_beam(gr, op.n_rx_bins, n_rx_beams))

    order = np.argsort(-np.abs(result.coefficients), kind="stable")
    est: list[BeamPair] = []
    for i in order:
        pair = to_pair(result.support[i])
        if pair not in est:
            est.append(pair)
        if len(est) == n_pairs:
            break
    if len(est) < n_pairs:
        norms = op.col_norms()
        scores = np.abs(op.adjoint_apply(result.residual)) / np.where(norms > 0, norms, np.inf)
        for g in np.argsort(-scores, kind="stable"):
            pair = to_pair(g)
            if pair not in est:
                est.append(pair)
            if len(est) == n_pairs:
                break
    return DetectionOutcome(estimated=tuple(est), truth=frozenset(),
                            support=result.support,
                            coefficients=result.coefficients,
                            ridge_flagged=result.ridge_flagged)


def signed_circular_diff(est: int, true: int, n: int) -> int:
    """Index difference on the circular beam grid, representative in
    [-n/2, n/2)."""
    return (est - true + n // 2) % n - n // 2


def beam_index_errors(estimated, truth, n_tx_beams: int, n_rx_beams: int):
    """Signed circular beam-index errors, one (tx, rx) entry per true pair.

    The sides are scored independently: a true pair's tx error is the
    signed difference to the estimate with the circularly nearest tx
    index, and likewise for rx, so a correct tx beam counts even when it
    was reported with the wrong rx beam. Ties go to the
    higher-confidence estimate.
    """
    estimated = list(estimated)
    if not estimated or not truth:
        raise ValueError("need at least one estimated and one true pair")
    tx_errors: list[int] = []
    rx_errors: list[int] = []
    for t in sorted(truth):
        best_tx = best_rx = None
        for e in estimated:
            dtx = signed_circular_diff(e.tx, t.tx, n_tx_beams)
            drx = signed_circular_diff(e.rx, t.rx, n_rx_beams)
            if best_tx is None or abs(dtx) < abs(best_tx):
                best_tx = dtx
            if best_rx is None or abs(drx) < abs(best_rx):
                best_rx = drx
        tx_errors.append(best_tx)
        rx_errors.append(best_rx)
    return tx_errors, rx_errors
