import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from corpus import fixture
from idgraph.controllability import ControlQuery, check_controllability, off_path_parents
from idgraph.model import InfluenceDiagram, Node, NodeKind
from idgraph.oracle import (
    COEFF_MAX,
    COEFF_MIN,
    IndeterminateRank,
    instantiate_linear,
    numeric_controllable,
    numeric_observable,
    rank,
    sensitivity_matrix,
)

P, D, C = NodeKind.PROBABILISTIC, NodeKind.DETERMINISTIC, NodeKind.DECISION


def test_coefficient_counts():
    assert len(instantiate_linear(fixture("coin_flip"), 0).coefficients) == 1
    assert len(instantiate_linear(InfluenceDiagram([]), 0).coefficients) == 0
    inst = instantiate_linear(fixture("factory_t3"), 0)
    assert len(inst.coefficients) == 15
    assert all(COEFF_MIN <= abs(c) <= COEFF_MAX for c in inst.coefficients.values())


def test_same_seed_same_coefficients():
    a = instantiate_linear(fixture("ten_nodes"), 42).coefficients
    b = instantiate_linear(fixture("ten_nodes"), 42).coefficients
    c = instantiate_linear(fixture("ten_nodes"), 43).coefficients
    assert a == b and a != c


def test_rank_basics():
    assert rank(np.eye(3)) == 3
    assert rank(np.zeros((3, 4))) == 0
    assert rank(np.zeros((0, 3))) == 0
    assert rank([[1, 2], [2, 4]]) == 1
    with pytest.raises(ValueError):
        rank([[np.nan]])


def test_three_by_three_pattern_generic_rank():
    pattern = np.array([[1, 0, 1], [1, 1, 1], [1, 1, 0]], dtype=float)
    rng = np.random.default_rng(0)
    full = sum(rank(pattern * rng.uniform(0.1, 2, size=(3, 3)) * rng.choice([-1, 1], size=(3, 3))) == 3 for _ in range(1000))
    assert full >= 990


@settings(max_examples=300)
@given(arrays(float, st.tuples(st.integers(1, 6), st.integers(1, 6)), elements=st.integers(-3, 3).map(float)))
def test_rank_matches_numpy_on_integer_matrices(m):
    assert rank(m) == np.linalg.matrix_rank(m)


def test_coin_flip_numeric():
    inst = instantiate_linear(fixture("coin_flip"), 1)
    assert numeric_observable(inst, {"y"}, "x")
    with pytest.raises(ValueError):
        numeric_observable(inst, {"y"}, "y")


def test_three_by_three_numeric():
    d = fixture("three_by_three")
    for seed in range(5):
        inst = instantiate_linear(d, seed)
        assert all(numeric_observable(inst, d.observed(), x) for x in ("x1", "x2", "x3"))


def test_ten_nodes_j_not_determined():
    d = fixture("ten_nodes")
    for seed in range(5):
        inst = instantiate_linear(d, seed)
        assert not numeric_observable(inst, d.observed(), "J")
        assert numeric_observable(inst, d.observed(), "E")


def test_noise_blocks_inversion():
    # z is a noisy copy of x, so knowing z does not pin x down
    d = InfluenceDiagram([Node("x", P), Node("z", P, True)], [("x", "z")])
    assert not numeric_observable(instantiate_linear(d, 0), {"z"}, "x")
    det = InfluenceDiagram([Node("x", P), Node("z", D, True)], [("x", "z")])
    assert numeric_observable(instantiate_linear(det, 0), {"z"}, "x")


def test_decisions_known_flag():
    d = InfluenceDiagram([Node("u", C), Node("x", P), Node("y", D, True)], [("u", "y"), ("x", "y")])
    inst = instantiate_linear(d, 0)
    assert not numeric_observable(inst, {"y"}, "x")
    assert numeric_observable(inst, {"y"}, "x", decisions_known=True)


def test_wafer_model2_numeric():
    d = fixture("wafer_model2")
    r = check_controllability(d, ControlQuery.of(["wafer_temp"]))
    held = off_path_parents(d, r.certificate.paths)
    for seed in range(5):
        assert numeric_controllable(instantiate_linear(d, seed), ["oven_dial"], ["wafer_temp"], held)


def test_factory_numeric():
    d = fixture("factory_t3")
    targets = ["X0_3", "X1_3", "X2_3"]
    for seed in range(5):
        inst = instantiate_linear(d, seed)
        assert numeric_controllable(inst, d.decisions(), targets)
        assert not numeric_controllable(inst, ["U0_0", "U0_1"], targets)


def test_sensitivity_holds_known_nodes():
    d = InfluenceDiagram([Node("u", C), Node("a", D), Node("y", D)], [("u", "a"), ("a", "y"), ("u", "y")])
    inst = instantiate_linear(d, 3)
    total = sensitivity_matrix(inst, ["u"], ["y"])[0, 0]
    direct = sensitivity_matrix(inst, ["u"], ["y"], known={"a"})[0, 0]
    c = inst.coefficients
    assert total == pytest.approx(c[("u", "y")] + c[("u", "a")] * c[("a", "y")])
    assert direct == pytest.approx(c[("u", "y")])


def test_controllable_edge_cases():
    d = fixture("wafer_model2")
    inst = instantiate_linear(d, 0)
    assert not numeric_controllable(inst, [], ["wafer_temp"])
    assert numeric_controllable(inst, ["oven_dial"], [])
    with pytest.raises(ValueError):
        numeric_controllable(inst, ["oven_dial"], ["oven_dial"])


def test_verdicts_stable_across_seeds():
    for name in ("ten_nodes", "option", "three_by_three", "coin_flip"):
        d = fixture(name)
        for v in d.ids():
            if v in d.observed():
                continue
            answers = {numeric_observable(instantiate_linear(d, s), d.observed(), v) for s in range(5)}
            assert len(answers) == 1, (name, v)


def test_indeterminate_rank_is_raised(monkeypatch):
    import idgraph.oracle as oracle

    monkeypatch.setattr(oracle, "_stable_rank", lambda m, tol: None)
    with pytest.raises(IndeterminateRank):
        numeric_observable(instantiate_linear(fixture("coin_flip"), 0), {"y"}, "x")
    with pytest.raises(IndeterminateRank):
        numeric_controllable(instantiate_linear(fixture("wafer_model2"), 0), ["oven_dial"], ["wafer_temp"])
