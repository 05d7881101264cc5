"""Pathwise linearization probes for both equations under matched noise.

The local picture to test: near a fixed point (t, x), increments of the
nonlinear solution u should (or should not) look like the frozen coefficient
sigma(u(t, x)) times increments of the unit-coefficient solution driven by the
same noise. For each spatial lag d this module reports the raw increment
u(t, x+d) - u(t, x), the matched unit-coefficient increment, and the defect

    u(t, x+d) - u(t, x) - sigma(u(t, x)) * (L(t, x+d) - L(t, x)).

Whether the defect is lower order than the increment as d shrinks is exactly
the question the parabolic and hyperbolic runs answer differently.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .errors import AlignmentError, PreconditionError
from .heat import HeatField
from .wave import WaveField, field_at

__all__ = ["DefectSample", "wave_defect_samples", "heat_defect_samples"]


@dataclass(frozen=True)
class DefectSample:
    lag: float
    field_increment: float
    linear_increment: float
    defect: float


def _require_unit_linear(linear) -> None:
    if not (linear.sigma.is_constant and linear.sigma.scalar(1.0) == 1.0):
        raise PreconditionError(
            f"the comparison field must be solved with constant coefficient 1, "
            f"got {linear.sigma.label()}"
        )


def wave_defect_samples(field: WaveField, linear: WaveField, t: float, x: float,
                        lags: Sequence[float]) -> list[DefectSample]:
    if field.lattice != linear.lattice:
        raise PreconditionError("fields live on different lattices; not coupled")
    if field.seed != linear.seed:
        raise PreconditionError(
            f"seeds differ ({field.seed} vs {linear.seed}); increments are not "
            "driven by the same noise"
        )
    _require_unit_linear(linear)
    frozen = field.sigma.scalar(field_at(field, t, x))
    base_u = field_at(field, t, x)
    base_l = field_at(linear, t, x)
    out = []
    for lag in lags:
        if lag <= 0:
            raise AlignmentError(f"lags must be positive, got {lag}")
        du = field_at(field, t, x + lag) - base_u
        dl = field_at(linear, t, x + lag) - base_l
        out.append(DefectSample(float(lag), du, dl, du - frozen * dl))
    return out


def heat_defect_samples(field: HeatField, linear: HeatField, t: float, x: float,
                        lags: Sequence[float]) -> list[DefectSample]:
    if field.grid != linear.grid:
        raise PreconditionError("fields live on different grids; not coupled")
    if field.seed != linear.seed:
        raise PreconditionError(
            f"seeds differ ({field.seed} vs {linear.seed}); increments are not "
            "driven by the same noise"
        )
    _require_unit_linear(linear)
    base_u = field.at(t, x)
    base_l = linear.at(t, x)
    frozen = field.sigma.scalar(base_u)
    out = []
    for lag in lags:
        if lag <= 0:
            raise AlignmentError(f"lags must be positive, got {lag}")
        du = field.at(t, x + lag) - base_u
        dl = linear.at(t, x + lag) - base_l
        out.append(DefectSample(float(lag), du, dl, du - frozen * dl))
    return out
