import numpy as np
import pytest

from pygon import (BICLIQUE, CLIQUE, DAC, TWO_PLEX, PlantedInstance,
                   SubgraphKind, dense_gnq, gen_gnp, generate_dataset, plant,
                   planted_density, verify_pattern)
from helpers import topological_order


def _inner(inst):
    return inst.graph.adjacency[np.ix_(inst.planted, inst.planted)]


def test_clique_edge_count():
    g = gen_gnp(30, 0.5, seed=1)
    inst = plant(g, CLIQUE, 5, seed=2)
    assert _inner(inst).sum() == 2 * 10  # 10 undirected edges
    assert verify_pattern(inst)


def test_dac_structure():
    g = gen_gnp(30, 0.5, directed=True, seed=1)
    inst = plant(g, DAC, 4, seed=2)
    sub = _inner(inst)
    assert sub.sum() == 6
    assert not (sub & sub.T).any()
    assert ((sub | sub.T) | np.eye(4, dtype=bool)).all()  # undirected form is K4
    assert topological_order(sub) is not None
    assert verify_pattern(inst)


def test_twoplex_degrees():
    g = gen_gnp(30, 0.5, seed=1)
    inst = plant(g, TWO_PLEX, 6, seed=2)
    sub = _inner(inst)
    assert sub.sum() // 2 == 15 - 3
    assert (sub.sum(axis=1) == 4).all()  # every planted vertex at k-2
    assert verify_pattern(inst)


def test_twoplex_odd_k_leaves_one_full_vertex():
    g = gen_gnp(30, 0.5, seed=1)
    inst = plant(g, TWO_PLEX, 7, seed=2)
    degs = np.sort(_inner(inst).sum(axis=1))
    assert list(degs) == [5, 5, 5, 5, 5, 5, 6]


def test_biclique_structure():
    g = gen_gnp(30, 0.5, seed=1)
    inst = plant(g, BICLIQUE, 7, seed=2)
    assert _inner(inst).sum() // 2 == 4 * 3
    assert verify_pattern(inst)


def test_outside_planted_set_untouched():
    for kind in (CLIQUE, DAC, TWO_PLEX, BICLIQUE, dense_gnq(0.9)):
        g = gen_gnp(128, 0.5, directed=kind.directed_host, seed=11)
        inst = plant(g, kind, 10, seed=12)
        outside = np.ones(g.n, dtype=bool)
        outside[inst.planted] = False
        touched = np.zeros((g.n, g.n), dtype=bool)
        touched[np.ix_(~outside, ~outside)] = True
        assert np.array_equal(g.adjacency[~touched], inst.graph.adjacency[~touched])


@pytest.mark.parametrize("kind", [CLIQUE, DAC, TWO_PLEX, BICLIQUE])
def test_pattern_validity_random_instances(kind):
    for trial in range(100):
        g = gen_gnp(40, 0.4, directed=kind.directed_host, seed=trial)
        inst = plant(g, kind, 8, seed=trial + 1000)
        assert verify_pattern(inst)


def test_verify_rejects_broken_patterns():
    g = gen_gnp(30, 0.5, seed=3)
    inst = plant(g, CLIQUE, 5, seed=4)
    adj = inst.graph.adjacency.copy()
    u, v = inst.planted[0], inst.planted[1]
    adj[u, v] = adj[v, u] = False
    from pygon import Graph

    broken = PlantedInstance(
        graph=Graph(n=g.n, directed=False, adjacency=adj, p=g.p),
        planted=inst.planted, kind=CLIQUE, labels=inst.labels)
    assert not verify_pattern(broken)


def test_verify_twoplex_degree_audit():
    g = gen_gnp(30, 0.5, seed=5)
    inst = plant(g, TWO_PLEX, 6, seed=6)
    adj = inst.graph.adjacency.copy()
    s = inst.planted
    sub = adj[np.ix_(s, s)]
    # remove one more edge at a vertex already missing one: degree drops to k-3
    v = int(np.argmin(sub.sum(axis=1)))
    w = int(np.flatnonzero(sub[v])[0])
    adj[s[v], s[w]] = adj[s[w], s[v]] = False
    from pygon import Graph

    broken = PlantedInstance(
        graph=Graph(n=g.n, directed=False, adjacency=adj, p=g.p),
        planted=s, kind=TWO_PLEX, labels=inst.labels)
    assert not verify_pattern(broken)


def test_dense_density():
    fractions = []
    for trial in range(200):
        g = gen_gnp(64, 0.5, seed=trial)
        inst = plant(g, dense_gnq(0.9), 40, seed=trial + 5000)
        fractions.append(planted_density(inst))
        assert verify_pattern(inst)  # dense has no structural test
    se = np.sqrt(0.9 * 0.1 / 780) / np.sqrt(200)
    assert abs(np.mean(fractions) - 0.9) < 3 * se


def test_labels_match_planted():
    g = gen_gnp(50, 0.5, seed=9)
    inst = plant(g, CLIQUE, 12, seed=10)
    assert inst.k == 12
    assert inst.labels.sum() == 12
    assert set(np.flatnonzero(inst.labels)) == set(inst.planted)


def test_generate_dataset():
    data = generate_dataset(500, 0.5, CLIQUE, 20, count=20, seed=77)
    assert len(data) == 20
    assert all(inst.k == 20 for inst in data)
    single = generate_dataset(20, 0.5, CLIQUE, 5, count=1, seed=77)
    assert len(single) == 1
    again = generate_dataset(500, 0.5, CLIQUE, 20, count=20, seed=77)
    for a, b in zip(data, again):
        assert np.array_equal(a.graph.adjacency, b.graph.adjacency)
        assert np.array_equal(a.planted, b.planted)
    # distinct instances differ
    assert not np.array_equal(data[0].planted, data[1].planted) or not np.array_equal(
        data[0].graph.adjacency, data[1].graph.adjacency)


def test_planting_errors():
    und = gen_gnp(20, 0.5, seed=0)
    dire = gen_gnp(20, 0.5, directed=True, seed=0)
    with pytest.raises(ValueError):
        plant(und, CLIQUE, 21, seed=0)
    with pytest.raises(ValueError):
        plant(und, DAC, 5, seed=0)
    with pytest.raises(ValueError):
        plant(dire, CLIQUE, 5, seed=0)
    with pytest.raises(ValueError):
        plant(und, TWO_PLEX, 2, seed=0)
    with pytest.raises(ValueError):
        plant(und, dense_gnq(0.4), 5, seed=0)  # q <= p
    with pytest.raises(ValueError):
        SubgraphKind("dense")  # q missing
    with pytest.raises(ValueError):
        SubgraphKind("clique", q=0.9)
