import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from strongfield._labeling import label_equal_rank
from strongfield.errors import AmbiguousNullSpaceError, DegeneratePathError, RankRefusalError
from strongfield.foliation import (EXCLUDED, GridSpec, eom_residual, leaf_space_summary,
                                   path_from_points, rank_map, region_summary_json, trace_leaf)
from strongfield.geometry import (ChartPoint, DarbouxPotential, DiscPotential, MonopolePotential,
                                  StackPotential, zero_potential)


def test_grid_parse_and_centers():
    g = GridSpec.parse(["-2:2:4"], 2)
    assert g.shape == (4, 4) and g.lo == (-2.0, -2.0)
    assert np.allclose(g.centers()[:, 0, 0], [-1.5, -0.5, 0.5, 1.5])
    g = GridSpec.parse(["0:1:2", "-1:1:3"], 2)
    assert g.shape == (2, 3)
    for bad in (["1:0:4"], ["0:1"], ["0:1:1"], ["0:1:2", "0:1:2", "0:1:2"]):
        with pytest.raises(ValueError):
            GridSpec.parse(bad, 2)


@pytest.mark.parametrize("cells", [50, 100])
def test_disc_regions(cells):
    rm = rank_map(DiscPotential(), GridSpec.uniform(-2, 2, cells, 2))
    assert rm.n_regions == 2
    assert sorted(r["rank"] for r in rm.regions) == [0, 2]
    summary = leaf_space_summary(rm)
    assert summary["rank_zero_regions"] == 1
    assert "topological sphere" in summary["topology"]
    zero = next(r for r in summary["regions"] if r["rank"] == 0)
    assert zero["note"] == "collapses to a point"


def test_zero_potential_single_region():
    rm = rank_map(zero_potential(2), GridSpec.uniform(-1, 1, 10, 2))
    assert rm.regions == [{"label": 0, "rank": 0, "cells": 100}]
    assert leaf_space_summary(rm)["topology"] == "every region collapses to a point"


def test_monopole_grid_with_exclusion():
    rm = rank_map(MonopolePotential(1), GridSpec.uniform(-1, 1, 20, 3, 0.1))
    assert rm.regions == [{"label": 0, "rank": 2, "cells": 7992}]
    assert np.sum(rm.ranks == EXCLUDED) == 8


def test_monopole_without_exclusion_marks_chart_gap():
    # the north chart drops the negative z axis; cells there are excluded
    rm = rank_map(MonopolePotential(1), GridSpec.uniform(-1, 1, 3, 3))
    assert rm.ranks[1, 1, 0] == EXCLUDED and rm.ranks[1, 1, 1] == EXCLUDED


def test_csv_export():
    rm = rank_map(DiscPotential(), GridSpec.uniform(-2, 2, 4, 2))
    text = rm.to_csv()
    lines = text.splitlines()
    assert lines[0] == "i,j,x,y,rank,region"
    assert lines[1] == "0,0,-1.5,-1.5,0,0"
    assert len(lines) == 17
    buf = io.StringIO()
    rm.to_csv(buf)
    assert buf.getvalue() == text
    doc = json.loads(region_summary_json(rm))
    assert set(doc) == {"regions", "leaf_space"}


def test_grid_dimension_mismatch():
    with pytest.raises(ValueError):
        rank_map(DiscPotential(), GridSpec.uniform(-1, 1, 4, 3))


@pytest.mark.parametrize("use_numba", [True, False])
def test_labeling_small_case(use_numba):
    ranks = np.array([[0, 0, 2],
                      [2, -1, 2],
                      [2, 2, 0]])
    labels = label_equal_rank(ranks, use_numba=use_numba)
    assert labels.tolist() == [[0, 0, 1], [2, -1, 1], [2, 2, 3]]


@settings(max_examples=150, deadline=None)
@given(arrays(np.int64, st.tuples(st.integers(1, 7), st.integers(1, 7), st.integers(1, 4)),
              elements=st.sampled_from([-1, 0, 2])))
def test_labeling_numba_matches_scipy(ranks):
    a = label_equal_rank(ranks, use_numba=True)
    b = label_equal_rank(ranks, use_numba=False)
    assert np.array_equal(a, b)
    assert np.all((a == -1) == (ranks == -1))


def test_monopole_leaf_is_radial():
    mono = MonopolePotential(2)
    path = trace_leaf(mono, ChartPoint([0.3, 0.4, 0.5], "north"), h=0.05, max_steps=20)
    assert len(path) == 21 and path.reason == "max_steps"
    u = path.coords / np.linalg.norm(path.coords, axis=1)[:, None]
    assert np.allclose(u, u[0], atol=1e-12)
    # default orientation: last component of the null vector positive
    assert path.coords[-1, 2] > path.coords[0, 2]
    assert eom_residual(mono, path) < 1e-8


def test_leaf_stops_at_chart_boundary():
    # inward along r in spherical coordinates: r <= 0 is outside the chart
    path = trace_leaf(MonopolePotential(1), ChartPoint([0.45, 1.0, 0.5], "spherical"),
                      h=0.1, max_steps=100, direction=[-1, 0, 0])
    assert path.reason == "chart_boundary"
    assert len(path) == 5 and np.all(path.coords[:, 0] > 0)


def test_leaf_stops_at_rank_change():
    # stack leaves never change rank; a custom field vanishing for z > 1 does
    from strongfield.geometry import PolynomialPotential
    spec = PolynomialPotential(3, [[], [{"exponents": [1, 0, 0], "coeff": 1.0}], []])
    path = trace_leaf(spec, ChartPoint([0.0, 0.0, 0.0]), h=0.1, max_steps=5)
    assert path.reason == "max_steps"
    assert np.allclose(path.coords[:, :2], 0)
    disc = DiscPotential()
    with pytest.raises(RankRefusalError):
        trace_leaf(disc, ChartPoint([1.5, 0.0]))
    with pytest.raises(RankRefusalError):
        trace_leaf(disc, ChartPoint([0.5, 0.0]))


def test_ambiguous_null_space_needs_direction():
    spec = DarbouxPotential(1, 4)
    with pytest.raises(AmbiguousNullSpaceError):
        trace_leaf(spec, ChartPoint([0, 0, 0, 0]))
    path = trace_leaf(spec, ChartPoint([0, 0, 0, 0]), h=0.1, max_steps=3, direction=[0, 0, 1, 1])
    assert np.allclose(path.coords[-1], [0, 0, 0.3 / math.sqrt(2), 0.3 / math.sqrt(2)])
    with pytest.raises(ValueError):
        trace_leaf(spec, ChartPoint([0, 0, 0, 0]), direction=[1, 0, 0, 0])


def test_stack_leaf_is_z_line():
    path = trace_leaf(StackPotential(), ChartPoint([0.2, -0.1, 0.0]), h=0.05, max_steps=40)
    assert np.all(path.coords[:, :2] == path.coords[0, :2])
    assert eom_residual(StackPotential(), path) == 0.0


def test_eom_residual_of_non_solution():
    t = np.linspace(0, 1, 50)
    circle = path_from_points(np.stack([0.5 * np.cos(t), 0.5 * np.sin(t)], axis=1))
    assert eom_residual(DiscPotential(), circle) == pytest.approx(1.0)
    with pytest.raises(DegeneratePathError):
        eom_residual(DiscPotential(), path_from_points([[0, 0], [1, 1]]))
    with pytest.raises(DegeneratePathError):
        eom_residual(DiscPotential(), path_from_points([[0, 0], [0, 0], [0, 0]], step=1.0))


def test_outside_disc_any_path_is_a_solution():
    line = path_from_points([[1.5 + 0.1 * k, 0.3 * k] for k in range(5)])
    assert eom_residual(DiscPotential(), line) == 0.0


def test_rank_map_is_deterministic():
    g = GridSpec.uniform(-2, 2, 30, 2)
    a = rank_map(DiscPotential(power=4), g)
    b = rank_map(DiscPotential(power=4), g, use_numba=False)
    assert a.to_csv() == b.to_csv()
