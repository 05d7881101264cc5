import numpy as np
import pytest

import oracles
from swelab.errors import AlignmentError, ConfigurationError, DomainError
from swelab.lattice import (
    LatticeSpec,
    NoiseCell,
    Shell,
    cone_area,
    cone_segments,
    segments_area,
    segments_cell_count,
    segments_cells,
    shell_segments,
    side_shell_segments,
    spatial_shell_area,
    temporal_shell_area,
    truncated_shell_area,
)

LAT = LatticeSpec(h=0.125, t_max=2.0, x_lo=-4.0, x_hi=4.0)


# -- spec validation -----------------------------------------------------------


def test_rejects_degenerate_geometry():
    with pytest.raises(ConfigurationError):
        LatticeSpec(h=0.0, t_max=1.0, x_lo=-2.0, x_hi=2.0)
    with pytest.raises(ConfigurationError):
        LatticeSpec(h=0.25, t_max=1.0, x_lo=2.0, x_hi=-2.0)
    with pytest.raises(ConfigurationError, match="multiple of h"):
        LatticeSpec(h=0.25, t_max=1.1, x_lo=-2.0, x_hi=2.0)
    with pytest.raises(ConfigurationError, match="at least one level"):
        LatticeSpec(h=0.25, t_max=0.0, x_lo=-2.0, x_hi=2.0)


def test_rejects_odd_base_columns_with_suggestion():
    with pytest.raises(ConfigurationError, match="nearest admissible"):
        LatticeSpec(h=0.25, t_max=1.0, x_lo=-1.75, x_hi=2.0)


def test_rejects_narrow_base():
    with pytest.raises(ConfigurationError, match="2\\*t_max"):
        LatticeSpec(h=0.25, t_max=2.0, x_lo=-1.0, x_hi=1.0)


# -- index bookkeeping ---------------------------------------------------------


def test_widths_shrink_one_point_per_side():
    for n in range(LAT.n_levels + 1):
        assert LAT.width(n) == LAT.width(0) - n
    assert LAT.width(LAT.n_levels) >= 1


def test_field_point_predicate_counts_match_width():
    for n in range(LAT.n_levels + 1):
        count = sum(
            LAT.is_field_point(n, c) for c in range(LAT.col_lo - 2, LAT.col_hi + 3)
        )
        assert count == LAT.width(n)


def test_cell_predicate_counts_match_cells_at():
    for n in range(LAT.n_levels):
        count = sum(
            LAT.is_cell(NoiseCell(n, c)) for c in range(LAT.col_lo - 2, LAT.col_hi + 3)
        )
        assert count == LAT.cells_at(n)


def test_word_index_is_a_bijection():
    seen = set()
    for n in range(LAT.n_levels):
        for c in range(LAT.col_lo, LAT.col_hi + 1):
            cell = NoiseCell(n, c)
            if LAT.is_cell(cell):
                seen.add(LAT.word_index(cell))
    assert seen == set(range(LAT.total_cells))


def test_apex_validation():
    assert LAT.apex(1.0, 0.5) == (8, 4)
    with pytest.raises(AlignmentError, match="parity"):
        LAT.apex(1.0, 0.625)
    with pytest.raises(AlignmentError):
        LAT.apex(0.9, 0.0)
    with pytest.raises(DomainError):
        LAT.apex(1.0, 3.75)
    with pytest.raises(DomainError):
        LAT.apex(2.25, 0.0)


def test_require_cone_inside():
    LAT.require_cone_inside(8, 24)  # base reaches col 32 = col_hi
    with pytest.raises(DomainError):
        LAT.require_cone_inside(8, 25)


# -- closed forms vs raw enumeration -------------------------------------------


def test_cone_enumeration_matches_area_and_oracle_cells():
    for n0, m0 in [(3, 1), (8, 0), (8, 6), (16, 0), (15, 1)]:
        segs = cone_segments(LAT, n0, m0)
        assert segments_area(LAT, segs) == pytest.approx(cone_area(n0 * LAT.h), rel=1e-12)
        got = {(c.level, c.col) for c in segments_cells(segs)}
        want = {(n, c) for n, c, _ in oracles.cone_cells(n0, m0)}
        assert got == want


def test_temporal_shell_enumeration_matches_oracle():
    for inner, outer in [(2, 4), (4, 10), (7, 9), (2, 16)]:
        m0 = outer % 2
        segs = shell_segments(LAT, m0, inner, outer)
        area = segments_area(LAT, segs)
        assert area == pytest.approx(
            oracles.enum_shell_area(inner, outer, LAT.h), rel=1e-12
        )
        assert area == pytest.approx(
            temporal_shell_area(inner * LAT.h, outer * LAT.h), rel=1e-12
        )


def test_shell_level_validation():
    with pytest.raises(DomainError):
        shell_segments(LAT, 0, 4, 4)
    with pytest.raises(DomainError):
        shell_segments(LAT, 0, 0, LAT.n_levels + 1)


def test_truncated_shell_matches_oracle_and_frozen_form():
    for inner, outer in [(4, 6), (8, 10), (8, 12), (14, 16)]:
        m0 = outer % 2
        segs = shell_segments(LAT, m0, inner, outer, col_cap=inner - 1)
        area = segments_area(LAT, segs)
        assert area == pytest.approx(
            oracles.enum_truncated_shell_area(inner, outer, LAT.h), rel=1e-12
        )
        t, eps = inner * LAT.h, (outer - inner) * LAT.h
        assert area == pytest.approx(truncated_shell_area(t, eps, LAT.h), rel=1e-12)


def test_side_shell_enumeration_matches_oracle():
    for n0, d in [(8, 2), (8, 4), (12, 6), (15, 2)]:
        m0 = n0 % 2
        left = side_shell_segments(LAT, n0, m0, m0 + d, "left")
        right = side_shell_segments(LAT, n0, m0, m0 + d, "right")
        total = segments_area(LAT, left) + segments_area(LAT, right)
        assert total == pytest.approx(
            oracles.enum_side_shell_area(n0, d, LAT.h), rel=1e-12
        )
        one = spatial_shell_area(n0 * LAT.h, d * LAT.h)
        assert segments_area(LAT, left) == pytest.approx(one, rel=1e-12)
        assert segments_area(LAT, right) == pytest.approx(one, rel=1e-12)


def test_side_shells_are_disjoint_and_complementary():
    n0, m0, d = 10, 0, 4
    a = {(c.level, c.col) for c in segments_cells(side_shell_segments(LAT, n0, m0, m0 + d, "left"))}
    b = {(c.level, c.col) for c in segments_cells(side_shell_segments(LAT, n0, m0, m0 + d, "right"))}
    assert not a & b
    cone_a = {(n, c) for n, c, _ in oracles.cone_cells(n0, m0)}
    cone_b = {(n, c) for n, c, _ in oracles.cone_cells(n0, m0 + d)}
    assert a == cone_a - cone_b
    assert b == cone_b - cone_a


def test_side_shell_alignment_rules():
    with pytest.raises(AlignmentError):
        side_shell_segments(LAT, 8, 4, 4, "left")
    with pytest.raises(AlignmentError):
        side_shell_segments(LAT, 8, 0, 3, "left")


# -- Shell wrapper -------------------------------------------------------------


def test_shell_constructors_carry_exact_areas():
    sh = Shell.temporal(LAT, 0, 4, 8)
    assert sh.area == temporal_shell_area(0.5, 1.0)
    assert segments_area(LAT, list(sh.segments)) == pytest.approx(sh.area, rel=1e-12)
    assert sh.cell_count == segments_cell_count(list(sh.segments))

    tr = Shell.truncated(LAT, 0, 8, 12)
    assert tr.area == truncated_shell_area(1.0, 0.5, LAT.h)
    assert segments_area(LAT, list(tr.segments)) == pytest.approx(tr.area, rel=1e-12)

    sd = Shell.side(LAT, 8, 0, 4, "left")
    assert sd.area == spatial_shell_area(1.0, 0.5)
    assert segments_area(LAT, list(sd.segments)) == pytest.approx(sd.area, rel=1e-12)


def test_truncated_shell_needs_positive_inner_time():
    with pytest.raises(DomainError):
        Shell.truncated(LAT, 0, 0, 4)


def test_cells_tile_the_first_slab():
    # the bulk of slab [0, h]: one triangle plus one diamond bottom-half per 2h
    tri = LAT.cells_at(0) * LAT.h**2
    dia_half = LAT.cells_at(1) * LAT.h**2
    span = (LAT.col_hi - LAT.col_lo) * LAT.h
    assert tri + dia_half == pytest.approx(span * LAT.h - LAT.h**2, rel=1e-12)
