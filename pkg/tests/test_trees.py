import numpy as np
import pytest

import systems
from responsum import series, trees
from responsum.errors import OrderTooLarge
from responsum.model import locate_center, taylor_tensors
from responsum.propagator import assemble_D


def setup(spec):
    return taylor_tensors(spec, locate_center(spec))


def test_topology_counts():
    assert [len(trees.enumerate_topologies(k, "theorem1")) for k in range(1, 7)] == [1, 0, 1, 1, 3, 6]
    assert [len(trees.enumerate_topologies(k, "theorem2")) for k in range(1, 6)] == [1, 1, 2, 5, 14]
    with pytest.raises(OrderTooLarge):
        trees.enumerate_topologies(7, "theorem1")


def test_small_topologies():
    (t1,) = trees.enumerate_topologies(1)
    assert t1.order == 1 and t1.end_nodes == [0]
    (t2,) = trees.enumerate_topologies(2, "theorem2")
    assert t2.arity(0) == 1 and t2.unary_nodes == [0]
    for k in range(1, 7):
        for top in trees.enumerate_topologies(k, "theorem1"):
            assert top.order == k
            assert all(top.arity(v) != 1 for v in range(k))


def test_labelled_single_end_node():
    spec = systems.linear()
    T = setup(spec)
    (top,) = trees.enumerate_topologies(1)
    labelled = trees.enumerate_labelled(top, {(1,), (-1,)}, zeta_allowed=True)
    assert sorted(lt.root_momentum for lt in labelled) == [(-1,), (0,), (1,)]
    values = {lt.root_momentum: trees.tree_value(lt, 0.1, np.array([0.3]), T, spec) for lt in labelled}
    assert values[(1,)] == pytest.approx([-0.1j])
    assert values[(-1,)] == pytest.approx([0.1j])
    assert values[(0,)] == pytest.approx([0.3])


def test_zero_momentum_internal_line_discarded():
    (top,) = trees.enumerate_topologies(3, "theorem1")
    assert trees.enumerate_labelled(top, set(), zeta_allowed=True) == []


def test_unary_nodes_skip_zero_mode():
    (top,) = trees.enumerate_topologies(2, "theorem2")
    labelled = trees.enumerate_labelled(top, {(1,), (-1,)}, family="theorem2",
                                        internal_support={(0,), (1,), (-1,)})
    assert labelled and all(lt.modes[0] != (0,) for lt in labelled)


def test_order4_cubic_tree_value():
    spec = systems.cubic()
    T = setup(spec)
    eps = 0.1
    candidates = [lt for lt in trees.labelled_trees(4, spec, T, zeta_allowed=False) if lt.root_momentum == (3,)]
    assert len(candidates) == 1
    val = trees.tree_value(candidates[0], eps, np.zeros(1), T, spec)
    D3 = assemble_D(eps, 3.0, np.eye(1), np.eye(1))[0, 0]
    assert val == pytest.approx([-eps * (-0.1j) ** 3 / D3], rel=1e-14)


def test_oracle_small_orders():
    spec = systems.linear()
    T = setup(spec)
    assert trees.oracle_coefficient(1, (1,), 0.1, np.zeros(1), T, spec) == pytest.approx([-0.1j])
    cubic = systems.cubic()
    Tc = setup(cubic)
    zeta = np.array([0.05])
    assert trees.oracle_order(2, 0.1, zeta, Tc, cubic) == {}
    for nu in [(1,), (3,), (-1,)]:
        assert np.all(trees.oracle_coefficient(3, nu, 0.1, zeta, Tc, cubic) == 0)


@pytest.mark.parametrize("factory,zeta", [(systems.asymmetric_cubic, [0.02]), (systems.coupled, [0.03, -0.02]),
                                          (systems.two_frequency, [0.01]), (systems.forced_potential, [0.01, -0.02])])
def test_oracle_matches_recursion(factory, zeta):
    spec = factory()
    T = setup(spec)
    zeta = np.asarray(zeta)
    orders = series.compute_orders(0.05, spec, T, zeta, 4)
    for k in range(1, 5):
        oracle = trees.oracle_order(k, 0.05, zeta, T, spec)
        for nu, (value, count) in oracle.items():
            assert count >= 1
            ref = orders[k][nu]
            assert np.linalg.norm(value - ref) <= 1e-12 * np.linalg.norm(ref) + 1e-300
        for nu, ref in orders[k].items():
            if nu not in oracle:
                assert np.linalg.norm(ref) == 0.0


def test_find_chains():
    (flat,) = [t for t in trees.enumerate_topologies(4, "theorem2") if t.unary_nodes == []]
    assert trees.find_chains(flat) == []
    (line,) = [t for t in trees.enumerate_topologies(4, "theorem2") if len(t.unary_nodes) == 3]
    (chain,) = trees.find_chains(line)
    assert chain.length == 3
    split = [t for t in trees.enumerate_topologies(5, "theorem2")
             if t.arity(0) == 1 and any(t.arity(v) == 2 for v in range(5))
             and len(t.unary_nodes) == 2 and t.arity(t.children[0][0]) == 2]
    assert split
    assert len(trees.find_chains(split[0])) == 2


def test_counting_bounds_exhaustive():
    for k in range(1, 7):
        for top in trees.enumerate_topologies(k, "theorem1"):
            assert trees.check_counting(top, "theorem1").ok
    for k in range(1, 6):
        for top in trees.enumerate_topologies(k, "theorem2"):
            assert trees.check_counting(top, "theorem2").ok


def test_chain_value_product_of_factors():
    spec = systems.forced_potential()
    T = setup(spec)
    labelled = [lt for lt in trees.labelled_trees(3, spec, T) if len(lt.topology.unary_nodes) == 2]
    assert labelled
    lt = labelled[0]
    (chain,) = trees.find_chains(lt)
    val = trees.chain_value(lt, chain, 0.01, T, spec)
    assert val.shape == (2, 2)
    assert np.all(np.isfinite(val))


def test_chain_value_bound():
    from responsum.verify import chain_bound_constants

    spec = systems.forced_potential()
    T = setup(spec)
    for eps in (1e-3, 0.05):
        cst = chain_bound_constants(eps, spec, T, N=5)
        assert cst["beta"] <= 1.0
        checked = 0
        for k in range(2, 6):
            for lt in trees.labelled_trees(k, spec, T):
                for chain in trees.find_chains(lt):
                    p = chain.length
                    decay = np.prod([np.exp(-0.75 * cst["xi"] * sum(map(abs, lt.modes[v]))) for v in chain.nodes])
                    bound = cst["C0"] ** p * cst["beta"] ** ((p - 1) / 2) * decay
                    assert np.linalg.norm(trees.chain_value(lt, chain, eps, T, spec), 2) <= bound
                    checked += 1
        assert checked > 1000
