"""Counter-based Gaussian noise on the cell lattice.

Every cell increment is a pure function of (seed, cell index): word g of a Philox
stream keyed by (seed, stream tag), mapped through the inverse normal CDF and
scaled by sqrt(cell area).  Random access is O(1), evaluation order is irrelevant,
and a field rendered with any number of threads is bit-identical.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

from .errors import ConfigurationError, DomainError, PreconditionError
from .lattice import LatticeSpec, NoiseCell

WAVE_STREAM_TAG = 0x57415645  # wave-equation cell stream
HEAT_STREAM_TAG = 0x48454154  # rectangular-grid stream for the parabolic solver

_U64 = np.uint64
_SHIFT = _U64(11)
_SCALE = 2.0 ** -53
_HALF_ULP = 2.0 ** -54


def stream_words(seed: int, tag: int, start: int, count: int) -> np.ndarray:
    """Words [start, start+count) of the Philox stream keyed by (seed, tag).

    Each 128-bit counter block yields four 64-bit words; slicing into blocks keeps
    the value of word g independent of how the stream is chunked.
    """
    if count == 0:
        return np.empty(0, dtype=np.uint64)
    block, off = divmod(start, 4)
    # explicit uint64 arrays: a bare int list would round-trip large seeds
    # through float64 and silently corrupt anything >= 2**53
    bg = Philox(counter=np.array([block, 0, 0, 0], dtype=np.uint64),
                key=np.array([seed, tag], dtype=np.uint64))
    raw = bg.random_raw(off + count)
    return raw[off:]


def words_to_unit_normals(words: np.ndarray) -> np.ndarray:
    """Map 64-bit words to standard normals via the open-(0,1) inverse CDF."""
    u = (words >> _SHIFT).astype(np.float64) * _SCALE + _HALF_ULP
    return ndtri(u)


def _check_seed(seed: int) -> int:
    if not isinstance(seed, (int, np.integer)) or isinstance(seed, bool):
        raise ConfigurationError(f"seed must be an integer, got {seed!r}")
    if not 0 <= int(seed) < 2 ** 64:
        raise ConfigurationError(f"seed must lie in [0, 2^64), got {seed}")
    return int(seed)


@dataclass(frozen=True)
class NoiseRealization:
    """All cell increments of one lattice under one seed; read-only after construction."""

    lattice: LatticeSpec
    seed: int
    rows: tuple[np.ndarray, ...] = field(repr=False)  # per level, variance = cell area

    def row(self, level: int) -> np.ndarray:
        return self.rows[level]


def make_noise(seed: int, lattice: LatticeSpec) -> NoiseRealization:
    seed = _check_seed(seed)
    words = stream_words(seed, WAVE_STREAM_TAG, 0, lattice.total_cells)
    z = words_to_unit_normals(words)
    h = lattice.h
    starts = lattice.cell_row_starts
    rows = []
    for n in range(lattice.n_levels):
        scale = h if n == 0 else h * np.sqrt(2.0)
        rows.append(scale * z[starts[n]:starts[n + 1]])
    return NoiseRealization(lattice, seed, tuple(rows))


def cell_increment(noise: NoiseRealization, cell: NoiseCell) -> float:
    """Gaussian increment of one cell (variance = cell area)."""
    lat = noise.lattice
    if not lat.is_cell(cell):
        raise DomainError(f"{cell} is not a noise cell of this lattice")
    first = lat.col_lo + cell.level + 1
    return float(noise.rows[cell.level][(cell.col - first) // 2])


def region_integral(noise: NoiseRealization, cells) -> float:
    """Sum of increments over an explicit set of whole cells.

    Duplicates are a precondition error (a cell is one Gaussian, not two); an
    empty collection integrates to zero.
    """
    cells = list(cells)
    if not cells:
        return 0.0
    seen = set()
    for c in cells:
        if (c.level, c.col) in seen:
            raise PreconditionError(f"duplicate cell in region: {c}")
        seen.add((c.level, c.col))
    return float(sum(cell_increment(noise, c) for c in cells))


def segment_sum(noise: NoiseRealization, segments) -> float:
    """Fast whole-cell sum over step-2 column segments (no duplicates by construction)."""
    lat = noise.lattice
    total = 0.0
    for n, lo, hi in segments:
        first = lat.col_lo + n + 1
        total += float(noise.rows[n][(lo - first) // 2:(hi - first) // 2 + 1].sum())
    return total


def segment_slices(lat: LatticeSpec, segments) -> list[tuple[int, slice]]:
    out = []
    for n, lo, hi in segments:
        first = lat.col_lo + n + 1
        out.append((n, slice((lo - first) // 2, (hi - first) // 2 + 1)))
    return out


def render_grid(lattice: LatticeSpec, seed: int, workers: int = 1) -> np.ndarray:
    """Dense (n_levels, col span) array of increments, 0.0 off-cell.

    Recomputed from the stream (not from a cached realization) so that renders
    with different worker counts genuinely race and must still agree bitwise.
    """
    seed = _check_seed(seed)
    if workers < 1:
        raise ConfigurationError("workers must be >= 1")
    n_cols = lattice.col_hi - lattice.col_lo + 1
    grid = np.zeros((lattice.n_levels, n_cols), dtype=np.float64)
    starts = lattice.cell_row_starts
    h = lattice.h

    def fill(level: int) -> None:
        count = lattice.cells_at(level)
        if count <= 0:
            return
        words = stream_words(seed, WAVE_STREAM_TAG, int(starts[level]), count)
        scale = h if level == 0 else h * np.sqrt(2.0)
        vals = scale * words_to_unit_normals(words)
        first = level + 1  # col offset of first cell from col_lo
        grid[level, first:first + 2 * count:2] = vals

    if workers == 1:
        for n in range(lattice.n_levels):
            fill(n)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(fill, range(lattice.n_levels)))
    return grid
