"""Explicit solver on the characteristic lattice.

The update writes the integral identity cell by cell: a new value is the two
neighbors minus the value below plus sigma at the bottom vertex times the diamond's
noise increment.  Evaluating sigma at the bottom vertex keeps the weight adapted,
so the field mean stays exactly 1 and, for constant sigma, the solution telescopes
to 1 + sigma * (cone noise sum) with no scheme error at all.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, DomainError
from .lattice import LatticeSpec
from .noise import NoiseRealization
from .sigma import CONSTANT_ONE, SigmaSpec

INITIAL_LEVEL = 1.0  # flat initial profile; also the value of u(0, y) for every y


@dataclass(frozen=True)
class WaveField:
    """Solved field on the trapezoid; values[n, j] is u(n*h, (col_lo + n + 2j)*h)."""

    lattice: LatticeSpec
    sigma: SigmaSpec
    seed: int
    values: np.ndarray = field(repr=False)  # padded (n_levels+1, width(0)), NaN beyond row widths

    def level(self, n: int) -> np.ndarray:
        return self.values[n, : self.lattice.width(n)]

    def at_point(self, level: int, col: int) -> float:
        return float(self.values[level, (col - self.lattice.col_lo - level) // 2])

    def gather(self, levels: np.ndarray, cols: np.ndarray) -> np.ndarray:
        """Vectorized lookup at aligned points; levels <= 0 read the initial profile."""
        levels = np.asarray(levels)
        cols = np.asarray(cols)
        safe = np.maximum(levels, 1)
        j = (cols - self.lattice.col_lo - safe) // 2
        out = self.values[safe, j]
        return np.where(levels <= 0, INITIAL_LEVEL, out)


def solve_wave(sigma: SigmaSpec, noise: NoiseRealization) -> WaveField:
    lat = noise.lattice
    n_levels = lat.n_levels
    u = np.full((n_levels + 1, lat.width(0)), np.nan)
    u[0, : lat.width(0)] = INITIAL_LEVEL
    # first layer: each base point sits on the apex of one base triangle
    u[1, : lat.width(1)] = INITIAL_LEVEL + sigma.scalar(INITIAL_LEVEL) * noise.row(0)
    for n in range(1, n_levels):
        w = lat.width(n)
        prev = u[n, :w]
        below = u[n - 1, 1:w]  # columns directly under the new level
        u[n + 1, : w - 1] = prev[:-1] + prev[1:] - below + sigma(below) * noise.row(n)
    return WaveField(lat, sigma, noise.seed, u)


def solve_coupled_linearization(sigma: SigmaSpec, noise: NoiseRealization) -> tuple[WaveField, WaveField]:
    """(nonlinear field, sigma==1 field) driven by the identical noise realization."""
    return solve_wave(sigma, noise), solve_wave(CONSTANT_ONE, noise)


def field_at(fld: WaveField, t: float, x: float) -> float:
    """Value at an exactly aligned lattice point; no interpolation ever.

    Off-lattice coordinates or odd parity raise an alignment error; aligned points
    outside the trapezoid raise a domain error.
    """
    lat = fld.lattice
    n = lat.level_of(t)
    m = lat.col_of(x)
    if not 0 <= n <= lat.n_levels:
        raise DomainError(f"t={t} outside [0, {lat.t_max}]")
    if (n + m) % 2 != 0:
        raise AlignmentError(f"(t, x)=({t}, {x}): t/h + x/h must be even")
    if not lat.col_lo + n <= m <= lat.col_hi - n:
        raise DomainError(f"x={x} outside the trapezoid at t={t}")
    return fld.at_point(n, m)


def cone_boundary_trace(fld: WaveField, t: float, x: float) -> tuple[np.ndarray, np.ndarray]:
    """u along the backward cone boundary of (t, x): y -> u(t - |x - y|, y).

    Every column in [x-t, x+t] carries an aligned boundary point when the apex is
    aligned, so the trace is sampled at spacing h.  Returns (y, values).
    """
    lat = fld.lattice
    n0, m0 = lat.apex(t, x)
    lat.require_cone_inside(n0, m0)
    dm = np.arange(-n0, n0 + 1)
    levels = n0 - np.abs(dm)
    cols = m0 + dm
    ys = cols * lat.h
    return ys, fld.gather(levels, cols)
