"""Quadratic variation along time and space lines, with cone-integral limits.

Temporal route: at a fixed point x the squared increments of t -> u(t, x) pick up,
piece by piece, the noise mass of nested cone shells; their sum converges to the
integral of sigma(u)^2 over the full backward cone.  The decomposition below
exposes the intermediate estimators used to see that happen at finite mesh.

Spatial route: at a fixed time the squared increments of x -> u(t, x) converge to
an integral of sigma(u)^2 along the two characteristics through each point, not
to the flat-slice value 2*t*int sigma(u(t,x))^2 dx; both are computed here so the
gap is measurable.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, ConfigurationError
from .lattice import LatticeSpec, cone_segments
from .noise import NoiseRealization, segment_slices
from .wave import WaveField

__all__ = [
    "TemporalPartition",
    "SpatialPartition",
    "QvDecomposition",
    "admissible_temporal_pieces",
    "admissible_spatial_pieces",
    "temporal_increments",
    "temporal_qv",
    "temporal_qv_limit",
    "temporal_qv_decomposition",
    "temporal_qv_ladder",
    "spatial_increments",
    "spatial_qv",
    "spatial_qv_limit",
    "naive_qv_prediction",
]


@dataclass(frozen=True)
class TemporalPartition:
    """Evenly spaced times 0 = t_0 < ... < t_N = t observed at a fixed point x."""

    t: float
    x: float
    n_pieces: int

    def __post_init__(self):
        if not isinstance(self.n_pieces, (int, np.integer)) or self.n_pieces < 1:
            raise ConfigurationError(
                f"n_pieces must be a positive integer, got {self.n_pieces!r}"
            )

    @property
    def mesh(self) -> float:
        return self.t / self.n_pieces

    def times(self) -> np.ndarray:
        return np.arange(self.n_pieces + 1) * self.mesh


@dataclass(frozen=True)
class SpatialPartition:
    """Evenly spaced points x_lo = x_0 < ... < x_N = x_hi observed at a fixed time t."""

    t: float
    x_lo: float
    x_hi: float
    n_pieces: int

    def __post_init__(self):
        if not isinstance(self.n_pieces, (int, np.integer)) or self.n_pieces < 1:
            raise ConfigurationError(
                f"n_pieces must be a positive integer, got {self.n_pieces!r}"
            )
        if self.x_hi <= self.x_lo:
            raise ConfigurationError("x_hi must exceed x_lo")

    @property
    def spacing(self) -> float:
        return (self.x_hi - self.x_lo) / self.n_pieces

    def points(self) -> np.ndarray:
        return self.x_lo + np.arange(self.n_pieces + 1) * self.spacing


@dataclass(frozen=True)
class QvDecomposition:
    """The four estimators of one temporal quadratic variation rung.

    direct        sum of squared field increments
    frozen_noise  squared shell noise sums, each cell reweighted by sigma(u) at
                  the point where the shell's inner cone crosses the cell column
                  (clamped to the initial layer outside the inner cone's base)
    frozen_area   squared weights times cell areas (the conditional mean of
                  frozen_noise given the field on the inner cones)
    cone_integral cell-route quadrature of sigma(u)^2 over the full cone
    """

    n_pieces: int
    direct: float
    frozen_noise: float
    frozen_area: float
    cone_integral: float

    def as_dict(self) -> dict:
        return {
            "n_pieces": self.n_pieces,
            "direct": self.direct,
            "frozen_noise": self.frozen_noise,
            "frozen_area": self.frozen_area,
            "cone_integral": self.cone_integral,
        }


def _format_counts(counts: list[int]) -> str:
    if len(counts) <= 12:
        return ", ".join(str(c) for c in counts)
    head = ", ".join(str(c) for c in counts[:10])
    return f"{head}, ..., {counts[-1]}"


def _divisors(k: int) -> list[int]:
    return [d for d in range(1, k + 1) if k % d == 0]


def admissible_temporal_pieces(t: float, h: float) -> list[int]:
    """Piece counts N for which every partition time i*t/N is a lattice time of
    the right parity: N must divide (t/h)/2."""
    n0 = round(t / h)
    if abs(t / h - n0) > 1e-9 or n0 % 2 != 0 or n0 < 2:
        raise AlignmentError(f"t={t} must be a positive even multiple of h={h}")
    return _divisors(n0 // 2)


def admissible_spatial_pieces(x_lo: float, x_hi: float, h: float) -> list[int]:
    """Piece counts N for which the spacing (x_hi-x_lo)/N is an even multiple of h."""
    span = round((x_hi - x_lo) / h)
    if abs((x_hi - x_lo) / h - span) > 1e-9 or span % 2 != 0 or span < 2:
        raise AlignmentError(
            f"[{x_lo}, {x_hi}] must span a positive even multiple of h={h}"
        )
    return _divisors(span // 2)


# -- temporal line -------------------------------------------------------------


def temporal_increments(field: WaveField, part: TemporalPartition) -> np.ndarray:
    lat, n0, m0, step = _temporal_layout(field, part)
    levels = np.arange(part.n_pieces + 1) * step
    j = (m0 - lat.col_lo - levels) // 2
    vals = field.values[levels, j]
    return np.diff(vals)


def temporal_qv(field: WaveField, part: TemporalPartition) -> float:
    inc = temporal_increments(field, part)
    return float(np.sum(inc * inc))


def temporal_qv_limit(field: WaveField, t: float, x: float, route: str = "columns") -> float:
    """Quadrature for the cone integral of sigma(u)^2 at apex (t, x).

    'columns' integrates each lattice column by the trapezoid rule in time, then
    the column integrals by the trapezoid rule in space.  'characteristics'
    parametrizes each column by the apex time at which its cone boundary crosses
    it; the substitution has unit Jacobian, so the two quadratures agree up to
    float round-off and are both exposed as a cross-check.  'cells' sums
    sigma(u at cell base vertex)^2 times cell area over the cone cells, which is
    the exact conditional variance of the solved field's noise response.
    """
    lat = field.lattice
    n0, m0 = _temporal_apex(lat, t, x)
    if route == "cells":
        levels, cols, areas = _cone_arrays(lat, n0, m0)
        base = field.gather(levels - 1, cols)
        w = field.sigma(base)
        return float(np.sum(w * w * areas))
    if route not in ("columns", "characteristics"):
        raise ConfigurationError(f"unknown quadrature route {route!r}")
    h = lat.h
    sig = field.sigma
    cols = np.arange(m0 - n0, m0 + n0 + 1)
    g = np.zeros(cols.size)
    for i, c in enumerate(cols):
        dm = abs(int(c) - m0)
        lmax = n0 - dm
        if lmax == 0:
            continue
        if (c - m0) % 2 == 0:
            ls = np.arange(0, lmax + 1, 2)
            s = ls * h
            vals = field.gather(ls, np.full(ls.size, c))
        else:
            # odd columns carry no s=0 lattice point; u(0,.) = 1 supplies it
            ls = np.arange(1, lmax + 1, 2)
            s = np.concatenate(([0.0], ls * h))
            vals = np.concatenate(([1.0], field.gather(ls, np.full(ls.size, c))))
        sv = sig(vals)
        if route == "characteristics":
            g[i] = np.trapezoid(sv * sv, s + dm * h)
        else:
            g[i] = np.trapezoid(sv * sv, s)
    return float(np.trapezoid(g, cols * h))


def temporal_qv_decomposition(field: WaveField, noise: NoiseRealization,
                              part: TemporalPartition) -> QvDecomposition:
    lat, n0, m0, step = _temporal_layout(field, part)
    levels, cols, areas, xi = _cone_arrays(lat, n0, m0, noise)
    return _rung(field, part, step, m0, levels, cols, areas, xi)


def temporal_qv_ladder(field: WaveField, noise: NoiseRealization,
                       t: float, x: float, counts: list[int]) -> list[QvDecomposition]:
    """Decompositions for several piece counts sharing one cone enumeration."""
    if not counts:
        return []
    parts = [TemporalPartition(t, x, n) for n in counts]
    lat = field.lattice
    steps = [_temporal_layout(field, p)[3] for p in parts]
    n0, m0 = _temporal_apex(lat, t, x)
    levels, cols, areas, xi = _cone_arrays(lat, n0, m0, noise)
    return [
        _rung(field, p, s, m0, levels, cols, areas, xi)
        for p, s in zip(parts, steps)
    ]


def _rung(field: WaveField, part: TemporalPartition, step: int, m0: int,
          levels: np.ndarray, cols: np.ndarray, areas: np.ndarray,
          xi: np.ndarray) -> QvDecomposition:
    sig = field.sigma
    dm = np.abs(cols - m0)
    bucket = (levels + dm) // step
    # inner-cone crossing level, clamped to the initial layer by gather()
    w = sig(field.gather(bucket * step - dm, cols))
    shell_sums = np.bincount(bucket, weights=w * xi, minlength=part.n_pieces)
    base = field.gather(levels - 1, cols)
    wd = sig(base)
    return QvDecomposition(
        n_pieces=part.n_pieces,
        direct=temporal_qv(field, part),
        frozen_noise=float(np.sum(shell_sums * shell_sums)),
        frozen_area=float(np.sum(w * w * areas)),
        cone_integral=float(np.sum(wd * wd * areas)),
    )


# -- spatial line --------------------------------------------------------------


def spatial_increments(field: WaveField, part: SpatialPartition) -> np.ndarray:
    lat, n0, m_lo, m_hi, step = _spatial_layout(field, part)
    cols = m_lo + np.arange(part.n_pieces + 1) * step
    j = (cols - lat.col_lo - n0) // 2
    vals = field.values[n0, j]
    return np.diff(vals)


def spatial_qv(field: WaveField, part: SpatialPartition) -> float:
    inc = spatial_increments(field, part)
    return float(np.sum(inc * inc))


def spatial_qv_limit(field: WaveField, t: float, x_lo: float, x_hi: float) -> float:
    """Characteristic-route quadrature of the spatial quadratic variation limit.

    For each apex x in [x_lo, x_hi], sigma(u)^2 is integrated along the two
    characteristics s -> (s, x - t + s) and s -> (s, x + t - s), which pass
    through lattice points at every level; the apex integrals are then
    integrated over x.
    """
    lat, n0, m_lo, m_hi = _spatial_line(field, t, x_lo, x_hi, need_cones=True)
    h = lat.h
    sig = field.sigma
    ls = np.arange(n0 + 1)
    apexes = np.arange(m_lo, m_hi + 1, 2)
    L = np.broadcast_to(ls, (apexes.size, ls.size))
    M = apexes[:, None]
    left = sig(field.gather(L, M - n0 + L))
    right = sig(field.gather(L, M + n0 - L))
    inner = np.trapezoid(left * left + right * right, ls * h, axis=1)
    return float(np.trapezoid(inner, apexes * h))


def naive_qv_prediction(field: WaveField, t: float, x_lo: float, x_hi: float) -> float:
    """2t times the flat-slice integral of sigma(u(t, x))^2 over [x_lo, x_hi].

    This is the value the spatial quadratic variation would approach if the
    time-slice behaved like a memoryless diffusion profile; it overshoots the
    true characteristic-route limit whenever sigma(u) fluctuates.
    """
    lat, n0, m_lo, m_hi = _spatial_line(field, t, x_lo, x_hi, need_cones=False)
    cols = np.arange(m_lo, m_hi + 1, 2)
    vals = field.gather(np.full(cols.size, n0), cols)
    sv = field.sigma(vals)
    return float(2.0 * t * np.trapezoid(sv * sv, cols * lat.h))


# -- layout validation ---------------------------------------------------------


def _temporal_apex(lat: LatticeSpec, t: float, x: float) -> tuple[int, int]:
    n0 = lat.level_of(t)
    m0 = lat.col_of(x)
    if m0 % 2 != 0:
        raise AlignmentError(
            f"temporal estimators need x/h even (all partition times share the "
            f"base parity); got x={x}, h={lat.h}"
        )
    if n0 % 2 != 0:
        raise AlignmentError(f"temporal estimators need t/h even; got t={t}, h={lat.h}")
    if n0 < 2:
        raise ConfigurationError(f"t={t} leaves no room for a partition (t >= 2h needed)")
    if n0 > lat.n_levels:
        raise ConfigurationError(f"t={t} exceeds the simulated horizon {lat.t_max}")
    lat.require_cone_inside(n0, m0)
    return n0, m0


def _temporal_layout(field: WaveField,
                     part: TemporalPartition) -> tuple[LatticeSpec, int, int, int]:
    lat = field.lattice
    n0, m0 = _temporal_apex(lat, part.t, part.x)
    half = n0 // 2
    if half % part.n_pieces != 0:
        raise AlignmentError(
            f"n_pieces={part.n_pieces} does not divide the time line: t/n_pieces must "
            f"be an even multiple of h; admissible counts for t={part.t}, h={lat.h}: "
            f"{_format_counts(_divisors(half))}"
        )
    return lat, n0, m0, n0 // part.n_pieces


def _spatial_line(field: WaveField, t: float, x_lo: float, x_hi: float,
                  need_cones: bool) -> tuple[LatticeSpec, int, int, int]:
    lat = field.lattice
    n0 = lat.level_of(t)
    if not 1 <= n0 <= lat.n_levels:
        raise ConfigurationError(f"t={t} outside the simulated horizon (0, {lat.t_max}]")
    if x_hi <= x_lo:
        raise ConfigurationError("x_hi must exceed x_lo")
    m_lo = lat.col_of(x_lo)
    m_hi = lat.col_of(x_hi)
    if (m_lo + n0) % 2 != 0 or (m_hi + n0) % 2 != 0:
        raise AlignmentError(
            f"spatial line endpoints must be field points at t={t}: "
            f"x/h + t/h must be even (got x_lo/h={m_lo}, x_hi/h={m_hi}, t/h={n0})"
        )
    if need_cones:
        lat.require_cone_inside(n0, m_lo)
        lat.require_cone_inside(n0, m_hi)
    else:
        for m in (m_lo, m_hi):
            if not (lat.col_lo + n0 <= m <= lat.col_hi - n0):
                raise ConfigurationError(
                    f"x={m * lat.h} falls outside the trapezoid at t={t}"
                )
    return lat, n0, m_lo, m_hi


def _spatial_layout(field: WaveField,
                    part: SpatialPartition) -> tuple[LatticeSpec, int, int, int, int]:
    lat, n0, m_lo, m_hi = _spatial_line(field, part.t, part.x_lo, part.x_hi,
                                        need_cones=False)
    span = m_hi - m_lo
    if span % (2 * part.n_pieces) != 0:
        raise AlignmentError(
            f"n_pieces={part.n_pieces} does not divide the space line: the spacing "
            f"must be an even multiple of h; admissible counts for "
            f"[{part.x_lo}, {part.x_hi}], h={lat.h}: {_format_counts(_divisors(span // 2))}"
        )
    return lat, n0, m_lo, m_hi, span // part.n_pieces


# -- shared cone enumeration ---------------------------------------------------


def _cone_arrays(lat: LatticeSpec, n0: int, m0: int, noise: NoiseRealization | None = None):
    """Flat arrays (levels, cols, areas[, increments]) over the cone's cells."""
    segs = cone_segments(lat, n0, m0)
    sl = segment_slices(lat, segs)
    levels_parts, cols_parts, xi_parts = [], [], []
    for (n, lo, hi), (_, s) in zip(segs, sl):
        cols = np.arange(lo, hi + 1, 2)
        levels_parts.append(np.full(cols.size, n, dtype=np.int64))
        cols_parts.append(cols)
        if noise is not None:
            xi_parts.append(noise.rows[n][s])
    levels = np.concatenate(levels_parts)
    cols = np.concatenate(cols_parts)
    h2 = lat.h * lat.h
    areas = np.where(levels == 0, h2, 2.0 * h2)
    if noise is None:
        return levels, cols, areas
    return levels, cols, areas, np.concatenate(xi_parts)
