import itertools

import networkx as nx
import pytest

from fairshare.instance import InstanceError, validate
from fairshare.topology import (
    fat_tree_counts, generate_barabasi_albert, generate_fat_tree,
    generate_requests, domain_is_connected, k_shortest_paths, partition_domains, random_ba_instance,
    servers, topology_links,
)


@pytest.mark.parametrize("pods", [2, 4, 6, 8, 16])
def test_fat_tree_counts(pods):
    topo = generate_fat_tree(pods)
    nodes, links = fat_tree_counts(pods)
    assert (len(topo.nodes), len(topo.edges)) == (nodes, links)
    assert len(servers(topo)) == pods ** 3 // 4
    assert topo.is_connected()


def test_fat_tree_sixteen_pods():
    assert fat_tree_counts(16) == (1345, 3136)
    assert fat_tree_counts(4) == (37, 52)


def test_fat_tree_rejects_odd_pods():
    with pytest.raises(ValueError):
        generate_fat_tree(3)


def test_ba_small_complete_core():
    topo = generate_barabasi_albert(5, 4, seed=0)
    assert len(topo.edges) == 10


def test_ba_minimum_degree_and_determinism():
    a = generate_barabasi_albert(60, 3, seed=5)
    assert a == generate_barabasi_albert(60, 3, seed=5)
    assert a != generate_barabasi_albert(60, 3, seed=6)
    adj = a.adjacency()
    assert min(len(x) for x in adj) >= 3
    assert a.is_connected()
    assert len(a.edges) == 6 + 3 * 56


def test_ba_link_counts_at_scale():
    star = generate_barabasi_albert(500, 4, seed=0, core="star")
    links, _, _ = topology_links(star, link_mode="directed")
    assert len(links) == 3968
    complete = generate_barabasi_albert(500, 4, seed=0)
    assert len(topology_links(complete, link_mode="directed")[0]) == 3980


def test_topology_links_modes():
    topo = generate_fat_tree(2)
    und, meta, lookup = topology_links(topo, 10.0)
    di, _, _ = topology_links(topo, 10.0, "directed")
    assert len(di) == 2 * len(und)
    assert all(l.capacity == 10.0 for l in und)
    u, v = topo.edges[0]
    assert lookup[(u, v)] == lookup[(v, u)]
    with pytest.raises(ValueError):
        topology_links(topo, link_mode="bidirectional")


def _brute_force(graph, s, t, k):
    walks = sorted(nx.all_simple_paths(graph, s, t), key=lambda p: (len(p), p))
    return walks[:k]


def test_k_shortest_matches_enumeration():
    topo = generate_barabasi_albert(12, 2, seed=3)
    adj = topo.adjacency()
    g = nx.Graph()
    g.add_edges_from((u, v) for u, nb in enumerate(adj) for v in nb)
    for s, t in itertools.permutations(range(12), 2):
        assert k_shortest_paths(adj, s, t, 6) == _brute_force(g, s, t, 6)


def test_k_shortest_on_a_path_graph():
    adj = [[1], [0, 2], [1]]
    assert k_shortest_paths(adj, 0, 2, 3) == [[0, 1, 2]]
    assert k_shortest_paths([[], []], 0, 1, 2) == []


def test_fat_tree_request_protocol():
    topo = generate_fat_tree(4)
    reqs, paths = generate_requests(topo, None, (1, 2), seed=0)
    hosts = servers(topo)
    assert len(reqs) == 3 * len(hosts)
    assert [r.source_node for r in reqs[:3]] == [hosts[0]] * 3
    truncated, _ = generate_requests(topo, 10, (1, 2), seed=0)
    assert len(truncated) == 10


def test_generated_instances_are_valid_and_seeded():
    a = random_ba_instance(30, 40, (1, 4), seed=2)
    assert validate(a).ok
    assert a == random_ba_instance(30, 40, (1, 4), seed=2)
    assert all(1 <= len(r.paths) <= 4 for r in a.requests)
    assert all(l.capacity == 100.0 for l in a.links)


def test_ba_scale_path_count():
    inst = random_ba_instance(500, 5000, (2, 4), seed=0)
    assert 11_000 <= len(inst.paths) <= 15_000


def test_drop_unused_links():
    inst = random_ba_instance(30, 5, (1, 1), seed=1, drop_unused_links=True)
    used = {j for p in inst.paths for j in p.links}
    assert {l.id for l in inst.links} == used
    assert validate(inst).ok


# -- partitioning ------------------------------------------------------------

def test_single_domain_partition():
    inst = random_ba_instance(20, 10, seed=0)
    part = partition_domains(inst, 1, seed=0)
    assert part.domain_links[0] == {l.id for l in inst.links}


def test_chain_without_topology(linear):
    part = partition_domains(linear, 2, seed=0)
    assert part.domain_links == ({"j1"}, {"j2"})


@pytest.mark.parametrize("align", [True, False])
def test_partition_covers_and_connects(align):
    inst = random_ba_instance(50, 60, (1, 3), seed=4, link_mode="directed")
    part = partition_domains(inst, 4, seed=1, align_sources=align)
    links = [s for s in part.domain_links]
    assert sum(len(s) for s in links) == len(inst.links)
    assert set().union(*links) == {l.id for l in inst.links}
    assert all(domain_is_connected(inst, part, m) for m in range(4))
    sizes = [len(s) for s in links]
    if not align:
        assert max(sizes) - min(sizes) <= 1
    else:
        assert min(sizes) > 0


def test_aligned_partition_keeps_first_hops_together():
    inst = random_ba_instance(40, 50, (1, 4), seed=7, link_mode="directed")
    part = partition_domains(inst, 3, seed=2)
    pmap = inst.path_map()
    for r in inst.requests:
        home = part.request_domain[r.id]
        assert {part.link_domain[pmap[p].links[0]] for p in r.paths} == {home}
        for p in r.paths:
            assert p in part.domain_paths[home]


def test_partition_set_algebra():
    inst = random_ba_instance(30, 30, (1, 3), seed=3)
    part = partition_domains(inst, 3, seed=0)
    pmap = inst.path_map()
    for m in range(3):
        expected = {p.id for p in inst.paths if any(part.link_domain[j] == m for j in p.links)}
        assert part.domain_paths[m] == expected
    assert set().union(*part.domain_requests) == {r.id for r in inst.requests}
    assert sum(len(s) for s in part.domain_requests) == len(inst.requests)
    assert all(p in pmap for s in part.domain_paths for p in s)


def test_partition_is_seeded():
    inst = random_ba_instance(30, 30, seed=3)
    assert partition_domains(inst, 3, seed=5) == partition_domains(inst, 3, seed=5)


def test_partition_rejects_too_many_domains(linear):
    with pytest.raises(InstanceError):
        partition_domains(linear, 3, seed=0)
