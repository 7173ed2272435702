import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from cubicalmp.grids import (
    BinaryGrid,
    MultiChannelImage,
    ValueGrid,
    sublevel_set,
    superlevel_set,
)

finite_grids = arrays(
    np.float64,
    st.tuples(st.integers(1, 6), st.integers(1, 6)),
    elements=st.floats(-50, 50, allow_nan=False, width=32),
)


def test_value_grid_validation():
    with pytest.raises(ValueError):
        ValueGrid(np.zeros((0, 3)))
    with pytest.raises(ValueError):
        ValueGrid(np.zeros(4))
    with pytest.raises(ValueError):
        ValueGrid(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        ValueGrid(np.array([[np.inf, 0.0]]))


def test_value_grid_immutable():
    g = ValueGrid(np.ones((2, 2)))
    with pytest.raises(ValueError):
        g.values[0, 0] = 5.0


def test_value_grid_basics():
    g = ValueGrid(np.array([[1, 2], [3, 4]], dtype=np.float64))
    assert g.shape == (2, 2)
    assert g.height == 2 and g.width == 2
    assert g.is_integer_valued()
    assert not ValueGrid(np.array([[0.5]])).is_integer_valued()
    assert np.array_equal(g.negate().values, -g.values)


def test_binary_grid():
    m = BinaryGrid(np.array([[True, False], [True, True]]))
    assert m.count() == 3
    full = BinaryGrid(np.ones((2, 2), dtype=bool))
    assert m.is_subset_of(full)
    assert not full.is_subset_of(m)


def test_multi_channel_shape_check():
    a = ValueGrid(np.zeros((2, 2)))
    b = ValueGrid(np.zeros((3, 2)))
    with pytest.raises(ValueError):
        MultiChannelImage((a, b))
    img = MultiChannelImage((a, a, a))
    assert img.num_channels == 3
    assert img.shape == (2, 2)


def test_sublevel_examples():
    g = ValueGrid(np.array([[0.0, 5.0, 1.0]]))
    assert np.array_equal(sublevel_set(g, 1.0).active, [[True, False, True]])
    assert np.array_equal(sublevel_set(g, -1.0).active, [[False, False, False]])
    assert sublevel_set(g, 5.0).count() == 3
    assert np.array_equal(superlevel_set(g, 1.0).active, [[False, True, True]])


@given(finite_grids, st.floats(-60, 60), st.floats(0, 20))
def test_nestedness(values, tau, bump):
    g = ValueGrid(values)
    low = sublevel_set(g, tau)
    high = sublevel_set(g, tau + bump)
    assert low.is_subset_of(high)


@given(finite_grids, st.floats(-60, 60))
def test_sub_super_duality(values, tau):
    g = ValueGrid(values)
    assert np.array_equal(
        superlevel_set(g, tau).active, sublevel_set(g.negate(), -tau).active
    )
