import time

import numpy as np
import pytest
from hypothesis import given, seed, settings as hypothesis_settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from licnet.core.errors import (
    DeadLinkInModeError,
    DimensionMismatchError,
    EmptyListError,
    InvalidGridError,
    InvalidSchemeError,
)
from licnet.core.multihop import (
    MODES,
    LayeredNetwork,
    Path,
    Scheme,
    best_path,
    feedback_mode_name,
    harmonic_mean,
    identical_layer_sum_capacity,
    layered_region_params,
    mode_allocation,
    mode_values,
    path_allocation,
    resolve_mode,
    sum_capacity,
)
from licnet.core.schemes import flow_imbalance, throughput
from licnet.core.singlehop import IcParameterGrid
from tests.helpers import balance_lp, brute_force_path, example5_grid, valid_grid

EXAMPLE7 = IcParameterGrid([[0.375, 0.6, 1.0], [0.26, 0.35, 1.0], [0.0, 0.25, 0.0]])
# powers of two make path costs exact integers, so ties are exact
DYADIC = st.sampled_from([0.0, 1.0, 0.5, 0.25, 0.125, 0.0625])
LINKS = st.floats(min_value=0.01, max_value=1.0)
SHARES = st.floats(min_value=0.0, max_value=1.0)


def unchecked(sigma: np.ndarray) -> LayeredNetwork:
    return LayeredNetwork(tuple(IcParameterGrid(layer) for layer in sigma), check=False)


@st.composite
def valid_grids(draw):
    lambdas = draw(st.lists(LINKS, min_size=4, max_size=4))
    shares = draw(st.lists(SHARES, min_size=4, max_size=4))
    return IcParameterGrid(valid_grid(lambdas, shares))


# harmonic mean

def test_harmonic_mean_values():
    assert harmonic_mean([0.4]) == pytest.approx(0.4)
    assert harmonic_mean([0.375, 0.6]) == pytest.approx(0.461538461538, abs=1e-12)
    assert harmonic_mean([1.0, 0.25]) == pytest.approx(0.4)
    assert harmonic_mean([0.35, 1.0, 0.26]) == pytest.approx(3 / (1 / 0.35 + 1 + 1 / 0.26))
    assert harmonic_mean([0.5, 0.0, 0.2]) == 0.0


def test_harmonic_mean_empty():
    with pytest.raises(EmptyListError):
        harmonic_mean([])


# networks and schemes

def test_network_construction():
    with pytest.raises(EmptyListError):
        LayeredNetwork(())
    with pytest.raises(EmptyListError):
        LayeredNetwork.replicate(EXAMPLE7, 0)
    bad = example5_grid(0.3)
    bad[0, 1] = 0.5
    with pytest.raises(InvalidGridError) as info:
        LayeredNetwork((EXAMPLE7, IcParameterGrid(bad)))
    assert info.value.context["layer"] == 1
    assert LayeredNetwork.replicate(EXAMPLE7, 3).sigma_sq().shape == (3, 3, 3)


def test_costs_mark_dead_links():
    costs = LayeredNetwork((EXAMPLE7,)).costs()[0]
    assert np.isinf(costs[2, 0])
    assert costs[1, 2] == 1.0
    assert costs[2, 1] == 4.0


def test_scheme_checks():
    assert Scheme(np.eye(3) / 3).num_layers == 1
    with pytest.raises(InvalidSchemeError):
        Scheme(-np.eye(3))
    with pytest.raises(InvalidSchemeError):
        Scheme(np.full((3, 3), 0.2))
    with pytest.raises(DimensionMismatchError):
        Scheme(np.zeros((2, 2)))
    # one layer may exceed 1 as long as the average does not
    two_layers = Scheme(np.stack([np.eye(3) / 2, np.zeros((3, 3))]))
    assert two_layers.normalized_total == pytest.approx(0.75)
    with pytest.raises(InvalidSchemeError):
        Scheme(np.stack([np.eye(3), np.eye(3)]))


# paths

def test_single_layer_path_is_the_entry():
    net = LayeredNetwork((EXAMPLE7,))
    for i in range(3):
        for j in range(3):
            result = best_path(net, i, j)
            assert result.sigma_sq == pytest.approx(EXAMPLE7[i, j])
            assert result.path.nodes == (i, j)
    assert best_path(net, 2, 0).path.dead
    np.testing.assert_allclose(layered_region_params(net).sigma_sq, EXAMPLE7.sigma_sq)


def test_best_path_rejects_unknown_nodes():
    with pytest.raises(DimensionMismatchError):
        best_path(LayeredNetwork((EXAMPLE7,)), 3, 0)


def test_two_layer_common_message_paths():
    first = IcParameterGrid(example5_grid(0.3))
    second = EXAMPLE7
    net = LayeredNetwork((first, second))
    candidates = [harmonic_mean([first[1, k], second[k, 0]]) / 2 for k in range(3)]
    assert best_path(net, 1, 0).sigma_sq == pytest.approx(max(candidates))


def test_region_params_of_identical_layers():
    grid = IcParameterGrid(example5_grid(0.3))
    net = LayeredNetwork.replicate(grid, 2)
    params = layered_region_params(net)
    costs = net.costs()
    for i in range(3):
        for j in range(3):
            total, _ = brute_force_path(costs, [i], [j])
            assert params[i, j] == pytest.approx(1.0 / total)


# 100 draws per depth, 600 networks in all
@pytest.mark.slow
@pytest.mark.parametrize("num_layers", range(1, 7))
@hypothesis_settings(max_examples=100)
@seed(71)
@given(data=st.data(), i=st.integers(0, 2), j=st.integers(0, 2))
def test_best_path_matches_enumeration(num_layers, data, i, j):
    net = unchecked(data.draw(arrays(np.float64, (num_layers, 3, 3), elements=DYADIC)))
    total, nodes = brute_force_path(net.costs(), [i], [j])
    result = best_path(net, i, j)
    assert result.path.nodes == nodes
    assert result.sigma_sq == (0.0 if np.isinf(total) else 1.0 / total)
    assert result.path.dead == bool(np.isinf(total))


@pytest.mark.slow
@pytest.mark.parametrize("num_layers", range(1, 7))
@hypothesis_settings(max_examples=100)
@seed(72)
@given(data=st.data())
def test_sum_capacity_matches_enumeration(num_layers, data):
    net = unchecked(data.draw(arrays(np.float64, (num_layers, 3, 3), elements=DYADIC)))
    total, nodes = brute_force_path(net.costs(), [0, 1, 2], [0, 1, 2])
    result = sum_capacity(net)
    assert result.path.nodes == nodes
    assert result.sigma_sq == (0.0 if np.isinf(total) else num_layers / total)


@pytest.mark.slow
def test_path_search_is_linear_in_depth():
    depths = [8, 16, 32, 64]
    rng = np.random.default_rng(7)
    timings = []
    for num_layers in depths:
        net = unchecked(rng.uniform(0.01, 1.0, size=(num_layers, 3, 3)))
        runs = []
        for _ in range(7):
            start = time.perf_counter()
            for _ in range(20):
                sum_capacity(net)
            runs.append(time.perf_counter() - start)
        timings.append(min(runs))
    slope = np.polyfit(np.log(depths), np.log(timings), 1)[0]
    assert slope <= 1.5
    assert timings[-1] / timings[0] <= 1.5 * depths[-1] / depths[0]


@seed(73)
@given(sigma=arrays(np.float64, (5, 3, 3), elements=st.floats(min_value=0.01, max_value=1.0)))
def test_sum_capacity_value_on_continuous_costs(sigma):
    net = unchecked(sigma)
    total, _ = brute_force_path(net.costs(), [0, 1, 2], [0, 1, 2])
    result = sum_capacity(net)
    assert result.sigma_sq == pytest.approx(5.0 / total, rel=1e-12)
    # the reported path achieves the value
    values = [net.layers[layer][a, b] for layer, a, b in result.path.links]
    assert harmonic_mean(values) == pytest.approx(result.sigma_sq, rel=1e-12)


def test_sum_capacity_single_layer_is_best_entry():
    result = sum_capacity(LayeredNetwork((IcParameterGrid(example5_grid(0.3)),)))
    assert result.sigma_sq == pytest.approx(0.16)
    assert result.path.nodes == (0, 1)


def test_sum_capacity_of_dead_network():
    result = sum_capacity(unchecked(np.zeros((2, 3, 3))))
    assert result.sigma_sq == 0.0
    assert result.path.dead


@pytest.mark.slow
@hypothesis_settings(max_examples=200)
@seed(74)
@given(grid=valid_grids())
def test_replicated_layers_approach_the_mode_value(grid):
    value = identical_layer_sum_capacity(grid).value
    for num_layers in (6, 12):
        finite = sum_capacity(LayeredNetwork.replicate(grid, num_layers)).sigma_sq
        assert value <= finite + 1e-12
        assert finite <= value * num_layers / (num_layers - 2) + 1e-12


def test_path_allocation_equalizes_rates():
    net = LayeredNetwork((IcParameterGrid(example5_grid(0.3)), EXAMPLE7))
    path = Path((1, 1, 2))
    scheme = path_allocation(net, path)
    rate = harmonic_mean([0.08, 1.0])
    assert scheme.delta[0, 1, 1] * 0.08 == pytest.approx(rate)
    assert scheme.delta[1, 1, 2] * 1.0 == pytest.approx(rate)
    assert scheme.total == pytest.approx(2.0)
    assert scheme.normalized_total == pytest.approx(1.0)


def test_path_allocation_of_dead_path():
    net = LayeredNetwork((EXAMPLE7, EXAMPLE7))
    assert path_allocation(net, Path((2, 0, 1))).total == 0.0
    with pytest.raises(DimensionMismatchError):
        path_allocation(net, Path((0, 1)))


# modes

def test_mode_catalogue():
    assert [mode.name for mode in MODES] == [
        "s11", "s00", "s22", "M(s10,s01)", "M(s20,s02)", "M(s12,s21)", "M(s10,s02,s21)", "M(s20,s01,s12)",
    ]
    assert resolve_mode("M(s10fb,s01)").name == "M(s10,s01)"
    assert feedback_mode_name(resolve_mode("M(s20,s01,s12)")) == "M(s20fb,s01,s12)"
    with pytest.raises(DimensionMismatchError):
        resolve_mode("s33")


def test_example7_modes():
    values = mode_values(EXAMPLE7)
    assert values["s00"] == pytest.approx(0.375)
    assert values["M(s12,s21)"] == pytest.approx(0.4)
    assert values["s22"] == 0.0
    result = identical_layer_sum_capacity(EXAMPLE7)
    assert result.value == pytest.approx(0.4)
    assert result.mode.name == "M(s12,s21)"


def test_symmetric_grid_closed_form():
    lam, mu, sig, s00 = 0.2, 0.15, 0.3, 0.18
    grid = IcParameterGrid([[s00, sig, sig], [mu, lam, lam], [mu, lam, lam]])
    closed = max(lam, s00, harmonic_mean([mu, sig]), harmonic_mean([mu, lam, sig]))
    assert identical_layer_sum_capacity(grid).value == pytest.approx(closed)


def test_ties_keep_listed_order():
    assert identical_layer_sum_capacity(IcParameterGrid(np.full((3, 3), 0.3))).mode.name == "s11"


def test_invalid_grid_rejected():
    bad = example5_grid(0.3)
    bad[1, 0] = 0.2
    with pytest.raises(InvalidGridError):
        identical_layer_sum_capacity(IcParameterGrid(bad))
    assert identical_layer_sum_capacity(IcParameterGrid(bad), check=False).value >= 0.0


@pytest.mark.slow
@hypothesis_settings(max_examples=200)
@seed(75)
@given(grid=valid_grids())
def test_modes_match_flow_balance_lp(grid):
    assert identical_layer_sum_capacity(grid).value == pytest.approx(balance_lp(grid.sigma_sq), abs=1e-9)


@pytest.mark.parametrize("mode", [mode.name for mode in MODES])
def test_mode_allocation_is_balanced(mode):
    grid = IcParameterGrid(example5_grid(0.3))
    scheme = mode_allocation(grid, mode)
    report = flow_imbalance(scheme, grid)
    assert report.gamma == pytest.approx(0.0, abs=1e-12)
    assert scheme.total <= 1.0 + 1e-12
    assert throughput(scheme, grid) == pytest.approx(mode_values(grid)[mode], abs=1e-12)


def test_self_loop_mode_uses_whole_budget():
    scheme = mode_allocation(EXAMPLE7, "s00")
    expected = np.zeros((3, 3))
    expected[0, 0] = 1.0
    np.testing.assert_allclose(scheme.layer(), expected)


def test_three_cycle_flows_are_equal():
    scheme = mode_allocation(EXAMPLE7, "M(s10,s02,s21)")
    flow = scheme.layer() * EXAMPLE7.sigma_sq
    value = mode_values(EXAMPLE7)["M(s10,s02,s21)"]
    for a, b in [(1, 0), (0, 2), (2, 1)]:
        assert flow[a, b] == pytest.approx(value / 3)


def test_dead_link_in_mode():
    with pytest.raises(DeadLinkInModeError) as info:
        mode_allocation(EXAMPLE7, "M(s20,s02)")
    assert info.value.context["links"] == ["20"]
