"""Phase-shifter codebooks for analog beamforming.

All quantized codebooks share one representation: every matrix entry is
amp * exp(2j*pi*n / 2**phase_bits) with amp = sqrt(1/n_ant) and n an
integer phase index. Indices are the authoritative stored form; complex
entries are materialized from a per-(phase_bits, n_ant) table. That keeps
two invariants exact rather than float-approximate: every phase lies on
the quantizer grid, and every entry has the same modulus bit-for-bit.

Kinds:

``DFT``
    entry m is the m-th DFT beam of the array (single column).
``Random``
    i.i.d. uniform phase indices.
``MultiBeamDFT``
    entry m combines DFT beams {m, m+n_entries, m+2*n_entries, ...}
    elementwise: sum the atoms, keep only the phase. Used when the array
    has more beams than the sweep has slots.
``Designed``
    MultiBeamDFT start, then greedy coordinate descent over per-entry
    per-constituent-beam phase rotations, accepting rotations that reduce
    the total coherence of the transmit-side effective dictionary. This is
    a documented heuristic, not a provably optimal design.
"""

import math
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

from .arrays import GridDictionary

KIND_DFT = "DFT"
KIND_RANDOM = "Random"
KIND_MULTI_BEAM = "MultiBeamDFT"
KIND_DESIGNED = "Designed"
KINDS = (KIND_DFT, KIND_RANDOM, KIND_MULTI_BEAM, KIND_DESIGNED)

# |combined atom sum| below tol * n_summed counts as exact cancellation
_ZERO_SUM_TOL = 1e-9


def _ulp_step(x: float, k: int) -> float:
    for _ in range(abs(k)):
        x = math.nextafter(x, math.inf if k > 0 else -math.inf)
    return x


def _exact_modulus(z: complex, amp: float) -> complex:
    # smallest ulp nudge of (re, im) whose float magnitude equals amp exactly
    best = None
    for di in range(-6, 7):
        re = _ulp_step(z.real, di)
        for dj in range(-6, 7):
            im = _ulp_step(z.imag, dj)
            cand = np.complex128(complex(re, im))
            if np.abs(cand) == amp:
                cost = abs(di) + abs(dj)
                if best is None or cost < best[0]:
                    best = (cost, cand)
    if best is None:
        raise RuntimeError("no representable value with the target modulus near %r" % z)
    return best[1]


@lru_cache(maxsize=None)
def _phasor_table(phase_bits: int, n_ant: int) -> np.ndarray:
    """All 2**phase_bits entry values realizable by this quantizer."""
    amp = math.sqrt(1.0 / n_ant)
    levels = 1 << phase_bits
    raw = amp * np.exp(2j * np.pi * np.arange(levels) / levels)
    table = np.array([_exact_modulus(z, amp) for z in raw])
    table.setflags(write=False)
    return table


def _quantize_indices(angles: np.ndarray, phase_bits: int) -> np.ndarray:
    """Nearest quantizer index per angle, ties toward the lower neighbor."""
    levels = 1 << phase_bits
    t = (np.asarray(angles) % (2.0 * np.pi)) * (levels / (2.0 * np.pi))
    idx = np.ceil(t - 0.5).astype(np.int64) % levels
    return idx


@dataclass(frozen=True, eq=False)
class Codebook:
    """Sequence of beamforming matrices, one per sweep slot.

    entries has shape (n_entries, n_ant, n_cols). phase_indices mirrors it
    with integer quantizer indices and is None only for the unquantized
    test mode (phase_bits None).
    """

    kind: str
    n_ant: int
    phase_bits: int | None
    phase_indices: np.ndarray | None
    entries: np.ndarray

    @property
    def n_entries(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[2]

    def entry(self, m: int) -> np.ndarray:
        return self.entries[m]


def _from_indices(kind: str, n_ant: int, phase_bits: int, idx: np.ndarray) -> Codebook:
    idx = np.asarray(idx, dtype=np.int64)
    entries = _phasor_table(phase_bits, n_ant)[idx]
    return Codebook(kind, n_ant, phase_bits, idx, entries)


def quantize_phases(matrix: np.ndarray, phase_bits: int) -> np.ndarray:
    """Project a complex matrix onto the phase-shifter value set.

    Keeps only the phase of each entry, rounded to the nearest of the
    2**phase_bits grid phases (ties toward the lower neighbor), and sets
    the modulus to sqrt(1/n_ant) with n_ant = number of rows. Entries that
    are exactly zero get phase index 0.
    """
    matrix = np.asarray(matrix)
    idx = _quantize_indices(np.angle(matrix), phase_bits)
    return _phasor_table(phase_bits, matrix.shape[0])[idx]


def _ratio_round_half_down(num: int, den: int) -> int:
    # round(num/den) over exact integers, halves toward minus infinity
    return -((den - 2 * num) // (2 * den))


def dft_codebook(n_ant: int, n_beams: int, phase_bits: int | None = 6) -> Codebook:
    """Single-column entries pointing at the first n_beams DFT directions.

    Quantized indices are computed in integer arithmetic, so beam phases
    that the quantizer grid can represent are hit exactly. phase_bits None
    skips quantization entirely (test mode; entries are the exact atoms,
    orthonormal when n_beams = n_ant).
    """
    if not 1 <= n_beams <= n_ant:
        raise ValueError("n_beams must lie in [1, n_ant]")
    n = np.arange(n_ant)
    m = np.arange(n_beams)
    if phase_bits is None:
        amp = math.sqrt(1.0 / n_ant)
        entries = amp * np.exp(2j * np.pi * np.outer(m, n) / n_ant)[:, :, None]
        return Codebook(KIND_DFT, n_ant, None, None, entries)
    levels = 1 << phase_bits
    idx = np.empty((n_beams, n_ant, 1), dtype=np.int64)
    for bi in range(n_beams):
        for ni in range(n_ant):
            idx[bi, ni, 0] = _ratio_round_half_down((ni * bi % n_ant) * levels, n_ant) % levels
    return _from_indices(KIND_DFT, n_ant, phase_bits, idx)


def group_columns(cb: Codebook, n_cols: int) -> Codebook:
    """Regroup a codebook's columns into wider entries, order preserved.

    Entry j of the result takes columns j*n_cols .. j*n_cols+n_cols-1 of
    the flattened (entry-major) column sequence. Used to split a DFT beam
    set across combining matrices with several RF chains each.
    """
    total = cb.n_entries * cb.n_cols
    if total % n_cols:
        raise ValueError("total column count %d not divisible by %d" % (total, n_cols))
    flat = np.concatenate([cb.entries[m] for m in range(cb.n_entries)], axis=1)
    entries = np.stack([flat[:, j * n_cols:(j + 1) * n_cols] for j in range(total // n_cols)])
    idx = None
    if cb.phase_indices is not None:
        flat_idx = np.concatenate([cb.phase_indices[m] for m in range(cb.n_entries)], axis=1)
        idx = np.stack([flat_idx[:, j * n_cols:(j + 1) * n_cols] for j in range(total // n_cols)])
    return Codebook(cb.kind, cb.n_ant, cb.phase_bits, idx, entries)


def random_codebook(n_ant: int, n_entries: int, n_cols: int, phase_bits: int,
                    rng: np.random.Generator) -> Codebook:
    """I.i.d. uniform phase indices in every position."""
    idx = rng.integers(0, 1 << phase_bits, size=(n_entries, n_ant, n_cols))
    return _from_indices(KIND_RANDOM, n_ant, phase_bits, idx)


def _combined_indices(n_ant: int, n_entries: int, phase_bits: int,
                      rotations: np.ndarray) -> np.ndarray:
    """Quantizer indices for phase-only combined DFT beams.

    rotations[m, j] is the quantizer index of the phase applied to
    constituent beam j of entry m before summing. Sums are built from
    exactly reduced integer phases; magnitudes below the cancellation
    tolerance quantize to index 0 instead of inheriting rounding noise.
    """
    beams_per = n_ant // n_entries
    levels = 1 << phase_bits
    n = np.arange(n_ant)[:, None]
    idx = np.empty((n_entries, n_ant, 1), dtype=np.int64)
    for m in range(n_entries):
        beams = m + n_entries * np.arange(beams_per)
        ang = 2.0 * np.pi * ((n * beams) % n_ant) / n_ant \
            + 2.0 * np.pi * rotations[m] / levels
        s = np.exp(1j * ang).sum(axis=1)
        col = _quantize_indices(np.angle(s), phase_bits)
        col[np.abs(s) < _ZERO_SUM_TOL * beams_per] = 0
        idx[m, :, 0] = col
    return idx


def multi_beam_dft_codebook(n_ant: int, n_entries: int = 64,
                            phase_bits: int = 6) -> Codebook:
    """Blind combination of n_ant/n_entries DFT beams per entry.

    Degenerates to dft_codebook when n_ant == n_entries. Rejects antenna
    counts that do not split evenly across entries.
    """
    if n_ant % n_entries:
        raise ValueError("n_ant must be a multiple of n_entries")
    rotations = np.zeros((n_entries, n_ant // n_entries), dtype=np.int64)
    idx = _combined_indices(n_ant, n_entries, phase_bits, rotations)
    return _from_indices(KIND_MULTI_BEAM, n_ant, phase_bits, idx)


def _effective_tx(entries: np.ndarray, grid: GridDictionary) -> np.ndarray:
    """Transmit-side effective dictionary: rows are slots, columns grid bins."""
    x = np.concatenate([entries[m] for m in range(entries.shape[0])], axis=1)
    return x.T @ grid.atoms.conj()


def _coherence_of_effective(eff: np.ndarray) -> float:
    # sum_{i != j} |<c_i, c_j>|^2 over unit-normalized columns, via the
    # row-space Gram so cost scales with slots^2 * bins, not bins^2
    d = np.einsum("ij,ij->j", eff, eff.conj()).real
    d = np.where(d > 0.0, d, np.inf)
    z = eff / np.sqrt(d)[None, :]
    w = z @ z.conj().T
    n_finite = int(np.isfinite(d).sum())
    return float(np.sum(np.abs(w) ** 2) - n_finite)


def total_coherence(cb: Codebook, grid: GridDictionary) -> float:
    """Sum of squared off-diagonal normalized column correlations of the
    effective dictionary the codebook induces on the grid."""
    if grid.geometry.n_ant != cb.n_ant:
        raise ValueError("codebook and grid antenna counts differ")
    return _coherence_of_effective(_effective_tx(cb.entries, grid))


def designed_codebook(n_ant: int, grid: GridDictionary, n_entries: int = 64,
                      phase_bits: int = 6, rng: np.random.Generator | None = None,
                      sweeps: int = 200) -> Codebook:
    """Coherence-minimizing refinement of the multi-beam codebook.

    Greedy coordinate descent: visit every (entry, constituent beam) slot
    once per sweep, draw one candidate rotation from the quantizer grid,
    keep it only if the total coherence strictly drops. Deterministic for
    a fixed rng seed. With one beam per entry rotations are pure per-entry
    phase shifts, which cannot change the coherence, so the DFT start is
    returned as-is.
    """
    if n_ant % n_entries:
        raise ValueError("n_ant must be a multiple of n_entries")
    if rng is None:
        rng = np.random.default_rng(0)
    beams_per = n_ant // n_entries
    levels = 1 << phase_bits
    rotations = np.zeros((n_entries, beams_per), dtype=np.int64)
    idx = _combined_indices(n_ant, n_entries, phase_bits, rotations)
    if beams_per == 1:
        return _from_indices(KIND_DESIGNED, n_ant, phase_bits, idx)

    table = _phasor_table(phase_bits, n_ant)
    eff = _effective_tx(table[idx], grid)
    best = _coherence_of_effective(eff)
    atoms_conj = grid.atoms.conj()
    for _ in range(sweeps):
        for m in range(n_entries):
            for j in range(beams_per):
                cand = int(rng.integers(0, levels))
                if cand == rotations[m, j]:
                    continue
                old = rotations[m, j]
                rotations[m, j] = cand
                col_idx = _combined_indices_one(n_ant, n_entries, phase_bits,
                                                rotations, m)
                new_row = table[col_idx] @ atoms_conj
                old_row = eff[m].copy()
                eff[m] = new_row
                score = _coherence_of_effective(eff)
                if score < best:
                    best = score
                    idx[m, :, 0] = col_idx
                else:
                    rotations[m, j] = old
                    eff[m] = old_row
    return _from_indices(KIND_DESIGNED, n_ant, phase_bits, idx)


def _combined_indices_one(n_ant, n_entries, phase_bits, rotations, m):
    """Single-entry version of _combined_indices, same arithmetic."""
    beams_per = n_ant // n_entries
    levels = 1 << phase_bits
    n = np.arange(n_ant)[:, None]
    beams = m + n_entries * np.arange(beams_per)
    ang = 2.0 * np.pi * ((n * beams) % n_ant) / n_ant \
        + 2.0 * np.pi * rotations[m] / levels
    s = np.exp(1j * ang).sum(axis=1)
    col = _quantize_indices(np.angle(s), phase_bits)
    col[np.abs(s) < _ZERO_SUM_TOL * beams_per] = 0
    return col


def save_codebook(cb: Codebook, path) -> None:
    """Text form: header `n_ant n_entries n_cols phase_bits kind`, then one
    line of integer phase indices per entry column (entry-major)."""
    if cb.phase_indices is None:
        raise ValueError("unquantized codebooks have no serial form")
    lines = ["%d %d %d %d %s" % (cb.n_ant, cb.n_entries, cb.n_cols, cb.phase_bits, cb.kind)]
    for m in range(cb.n_entries):
        for c in range(cb.n_cols):
            lines.append(" ".join(str(v) for v in cb.phase_indices[m, :, c]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_codebook(path) -> Codebook:
    """Inverse of save_codebook; round-trips bit-exactly."""
    text = Path(path).read_text(encoding="utf-8").strip().split("\n")
    head = text[0].split()
    if len(head) != 5:
        raise ValueError("malformed codebook header")
    n_ant, n_entries, n_cols, phase_bits = (int(v) for v in head[:4])
    kind = head[4]
    if kind not in KINDS:
        raise ValueError("unknown codebook kind %r" % kind)
    body = text[1:]
    if len(body) != n_entries * n_cols:
        raise ValueError("expected %d index lines, found %d" % (n_entries * n_cols, len(body)))
    idx = np.empty((n_entries, n_ant, n_cols), dtype=np.int64)
    levels = 1 << phase_bits
    for m in range(n_entries):
        for c in range(n_cols):
            row = np.array([int(v) for v in body[m * n_cols + c].split()], dtype=np.int64)
            if row.size != n_ant or row.min() < 0 or row.max() >= levels:
                raise ValueError("bad index line for entry %d column %d" % (m, c))
            idx[m, :, c] = row
    return _from_indices(kind, n_ant, phase_bits, idx)
