"""Synthetic topologies, request generation and connected domain partitioning."""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass
from typing import Sequence

import networkx as nx
import numpy as np

from .instance import Edge, Instance, InstanceError, Link, Partition, Path, Request, make_partition

LINK_MODES = ("undirected", "directed")


@dataclass(frozen=True)
class Topology:
    kind: str
    nodes: tuple[str, ...]
    edges: tuple[tuple[str, str], ...]

    def adjacency(self) -> list[list[int]]:
        index = {n: i for i, n in enumerate(self.nodes)}
        adj: list[set[int]] = [set() for _ in self.nodes]
        for u, v in self.edges:
            adj[index[u]].add(index[v])
            adj[index[v]].add(index[u])
        return [sorted(a) for a in adj]

    def is_connected(self) -> bool:
        adj = self.adjacency()
        if not adj:
            return True
        seen = {0}
        todo = [0]
        while todo:
            for w in adj[todo.pop()]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        return len(seen) == len(adj)


def generate_barabasi_albert(num_nodes: int, min_degree: int, seed: int, core: str = "complete") -> Topology:
    """Preferential-attachment graph; every node after the seed core attaches ``min_degree`` edges.

    ``core="complete"`` starts from a clique on ``min_degree + 1`` nodes, so every node has
    degree at least ``min_degree``. ``core="star"`` is the networkx default (a star on
    ``min_degree + 1`` nodes, whose leaves may keep a lower degree).
    """
    if not (num_nodes > min_degree >= 1):
        raise ValueError("need num_nodes > min_degree >= 1")
    if core == "complete":
        g = nx.barabasi_albert_graph(num_nodes, min_degree, seed=seed,
                                     initial_graph=nx.complete_graph(min_degree + 1))
    elif core == "star":
        g = nx.barabasi_albert_graph(num_nodes, min_degree, seed=seed)
    else:
        raise ValueError(f"unknown core {core!r}")
    nodes = tuple(f"n{i}" for i in range(num_nodes))
    pairs = sorted((min(u, v), max(u, v)) for u, v in g.edges())
    edges = tuple((f"n{u}", f"n{v}") for u, v in pairs)
    return Topology("barabasi_albert", nodes, edges)


def fat_tree_counts(pods: int) -> tuple[int, int]:
    """Node and undirected link counts of a k-ary fat tree with an extra root above the core."""
    half = pods // 2
    nodes = half * half + pods * pods + pods * half * half + 1
    links = 3 * pods * half * half + half * half
    return nodes, links


def generate_fat_tree(pods: int) -> Topology:
    if pods < 2 or pods % 2:
        raise ValueError("fat tree needs an even number of pods >= 2")
    half = pods // 2
    core = [f"c{i}" for i in range(half * half)]
    nodes: list[str] = ["root", *core]
    edges: list[tuple[str, str]] = [("root", c) for c in core]
    for pod in range(pods):
        aggs = [f"a{pod}_{i}" for i in range(half)]
        edge_sw = [f"e{pod}_{i}" for i in range(half)]
        nodes += aggs + edge_sw
        for i, a in enumerate(aggs):
            edges += [(core[i * half + c], a) for c in range(half)]
        for e in edge_sw:
            edges += [(a, e) for a in aggs]
        for ei, e in enumerate(edge_sw):
            for h in range(half):
                host = f"h{pod}_{ei}_{h}"
                nodes.append(host)
                edges.append((e, host))
    return Topology("fat_tree", tuple(nodes), tuple(edges))


def servers(topology: Topology) -> list[str]:
    return [n for n in topology.nodes if n.startswith("h")]


def topology_links(topology: Topology, capacity: float = 100.0,
                   link_mode: str = "undirected") -> tuple[list[Link], list[Edge], dict]:
    """Turn topology edges into capacity links; returns links, edge metadata and an
    (u, v) -> link id lookup used to map node walks onto links."""
    if link_mode not in LINK_MODES:
        raise ValueError(f"link_mode must be one of {LINK_MODES}")
    links: list[Link] = []
    meta: list[Edge] = []
    lookup: dict[tuple[str, str], str] = {}
    for u, v in topology.edges:
        if link_mode == "undirected":
            lid = f"{u}~{v}"
            links.append(Link(lid, float(capacity)))
            meta.append(Edge(lid, u, v))
            lookup[(u, v)] = lookup[(v, u)] = lid
        else:
            for a, b in ((u, v), (v, u)):
                lid = f"{a}>{b}"
                links.append(Link(lid, float(capacity)))
                meta.append(Edge(lid, a, b))
                lookup[(a, b)] = lid
    return links, meta, lookup


def _spur(adj: Sequence[Sequence[int]], source: int, target: int, banned_nodes: set[int],
          banned_edges: set[tuple[int, int]]) -> list[int] | None:
    """Lexicographically smallest shortest path avoiding the banned nodes and edges."""
    dist = {target: 0}
    q = deque([target])
    while q:
        v = q.popleft()
        for w in adj[v]:
            if w not in dist and w not in banned_nodes and (w, v) not in banned_edges:
                dist[w] = dist[v] + 1
                q.append(w)
    if source not in dist:
        return None
    walk = [source]
    while walk[-1] != target:
        v = walk[-1]
        walk.append(min(w for w in adj[v] if dist.get(w, -1) == dist[v] - 1
                        and (v, w) not in banned_edges))
    return walk


def k_shortest_paths(adj: Sequence[Sequence[int]], source: int, target: int, k: int) -> list[list[int]]:
    """Up to k loop-free paths in increasing hop count, ties broken by the lexicographic
    order of node indices (Yen's algorithm)."""
    if source == target:
        raise ValueError("source and target coincide")
    first = _spur(adj, source, target, set(), set())
    if first is None:
        return []
    found = [first]
    candidates: list[tuple[int, tuple[int, ...]]] = []
    seen = {tuple(first)}
    while len(found) < k:
        last = found[-1]
        for i in range(len(last) - 1):
            root = last[:i + 1]
            banned_edges = {(p[i], p[i + 1]) for p in found if p[:i + 1] == root}
            spur = _spur(adj, root[-1], target, set(root[:-1]), banned_edges)
            if spur is None:
                continue
            cand = tuple(root[:-1] + spur)
            if cand not in seen:
                seen.add(cand)
                heapq.heappush(candidates, (len(cand), cand))
        if not candidates:
            break
        found.append(list(heapq.heappop(candidates)[1]))
    return found


def generate_requests(topology: Topology, count: int | None, paths_per_request: tuple[int, int],
                      seed: int, link_mode: str = "undirected",
                      capacity: float = 100.0) -> tuple[list[Request], list[Path]]:
    """Random requests with k-shortest paths.

    Barabasi-Albert style graphs draw source and destination uniformly. Fat trees
    follow the per-server protocol: two requests to the root and one to a random
    other server; ``count`` then truncates the list when given.
    """
    lo, hi = paths_per_request
    if not (1 <= lo <= hi):
        raise ValueError("paths_per_request must satisfy 1 <= lo <= hi")
    rng = np.random.default_rng(seed)
    adj = topology.adjacency()
    index = {n: i for i, n in enumerate(topology.nodes)}
    _, _, lookup = topology_links(topology, capacity, link_mode)

    pairs: list[tuple[int, int]] = []
    if topology.kind == "fat_tree":
        hosts = [index[h] for h in servers(topology)]
        root = index["root"]
        for h in hosts:
            others = [x for x in hosts if x != h]
            pairs += [(h, root), (h, root), (h, others[int(rng.integers(len(others)))])]
        if count is not None:
            pairs = pairs[:count]
    else:
        if count is None or count < 0:
            raise ValueError("count required")
        n = len(topology.nodes)
        if n < 2:
            raise ValueError("topology too small")
        while len(pairs) < count:
            s, t = (int(v) for v in rng.integers(n, size=2))
            if s != t:
                pairs.append((s, t))

    requests: list[Request] = []
    paths: list[Path] = []
    for i, (s, t) in enumerate(pairs):
        k = int(rng.integers(lo, hi + 1))
        walks = k_shortest_paths(adj, s, t, k)
        if not walks:
            raise InstanceError(f"no path between {topology.nodes[s]} and {topology.nodes[t]}")
        rid = f"r{i}"
        pids = []
        for q, walk in enumerate(walks):
            pid = f"{rid}/{q}"
            names = [topology.nodes[v] for v in walk]
            paths.append(Path(pid, tuple(lookup[(a, b)] for a, b in zip(names, names[1:]))))
            pids.append(pid)
        requests.append(Request(rid, 1.0, tuple(pids), topology.nodes[s]))
    return requests, paths


def generate_instance(topology: Topology, count: int | None, paths_per_request: tuple[int, int],
                      seed: int, alpha: float = 1.0, capacity: float = 100.0,
                      link_mode: str = "undirected") -> Instance:
    links, meta, _ = topology_links(topology, capacity, link_mode)
    requests, paths = generate_requests(topology, count, paths_per_request, seed, link_mode, capacity)
    return Instance(tuple(links), tuple(paths), tuple(requests), float(alpha),
                    tuple(topology.nodes), tuple(meta))


def random_ba_instance(num_nodes: int, num_requests: int, paths_per_request=(1, 4), seed: int = 0,
                       alpha: float = 1.0, capacity: float = 100.0, min_degree: int = 4,
                       drop_unused_links: bool = False, link_mode: str = "undirected") -> Instance:
    """BA topology plus random requests in one call; ``drop_unused_links`` removes links
    no path traverses (they only add empty projection segments)."""
    topo = generate_barabasi_albert(num_nodes, min_degree, seed)
    inst = generate_instance(topo, num_requests, paths_per_request, seed, alpha, capacity, link_mode)
    if drop_unused_links:
        used = {j for p in inst.paths for j in p.links}
        inst = Instance(tuple(l for l in inst.links if l.id in used), inst.paths, inst.requests,
                        inst.alpha, inst.nodes, tuple(e for e in inst.edges if e.link in used))
    return inst


# ---------------------------------------------------------------------------
# Domain partitioning


def _line_graph(instance: Instance) -> list[list[int]]:
    """Link adjacency: two links touch when they share an endpoint node."""
    pos = {l.id: i for i, l in enumerate(instance.links)}
    at_node: dict[str, list[int]] = {}
    for e in instance.edges:
        for n in (e.u, e.v):
            at_node.setdefault(n, []).append(pos[e.link])
    adj: list[set[int]] = [set() for _ in instance.links]
    for members in at_node.values():
        for a in members:
            adj[a].update(members)
    for i, s in enumerate(adj):
        s.discard(i)
    return [sorted(s) for s in adj]


def _connected(members: set[int], adj: list[list[int]]) -> bool:
    if not members:
        return True
    start = next(iter(members))
    seen = {start}
    todo = [start]
    while todo:
        for w in adj[todo.pop()]:
            if w in members and w not in seen:
                seen.add(w)
                todo.append(w)
    return len(seen) == len(members)


def _components(adj: list[list[int]]) -> int:
    seen: set[int] = set()
    count = 0
    for s in range(len(adj)):
        if s in seen:
            continue
        count += 1
        seen.add(s)
        todo = [s]
        while todo:
            for w in adj[todo.pop()]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
    return count


def _grow_regions(adj: list[list[int]], num_domains: int, rng: np.random.Generator,
                  weight: Sequence[int] | None = None) -> list[int]:
    n = len(adj)
    weight = weight or [1] * n
    owner = [-1] * n
    seeds: list[int] = [int(rng.integers(n))]
    while len(seeds) < num_domains:
        # farthest-first seeding; unreachable links count as infinitely far
        dist = [n + 1] * n
        q = deque(seeds)
        for s in seeds:
            dist[s] = 0
        while q:
            v = q.popleft()
            for w in adj[v]:
                if dist[w] > dist[v] + 1:
                    dist[w] = dist[v] + 1
                    q.append(w)
        far = max(dist)
        cands = [i for i in range(n) if dist[i] == far and i not in seeds]
        seeds.append(cands[int(rng.integers(len(cands)))])

    frontier = [deque() for _ in range(num_domains)]
    size = [0] * num_domains
    for m, s in enumerate(seeds):
        owner[s] = m
        size[m] = weight[s]
        frontier[m].extend(adj[s])
    remaining = n - num_domains
    while remaining:
        for m in sorted(range(num_domains), key=lambda d: (size[d], d)):
            f = frontier[m]
            while f and owner[f[0]] != -1:
                f.popleft()
            if f:
                v = f.popleft()
                owner[v] = m
                size[m] += weight[v]
                remaining -= 1
                f.extend(w for w in adj[v] if owner[w] == -1)
                break
        else:
            raise InstanceError("cannot grow connected domains over a disconnected topology; "
                                "use at least as many domains as components")
    return owner


def _rebalance(owner: list[int], adj: list[list[int]], num_domains: int, max_moves: int = 100000) -> None:
    members = [set() for _ in range(num_domains)]
    for i, m in enumerate(owner):
        members[m].add(i)

    def movable(src: int, dst: int) -> int | None:
        if len(members[src]) <= 1:
            return None
        for v in sorted(members[src]):
            if any(owner[w] == dst for w in adj[v]) and _connected(members[src] - {v}, adj):
                return v
        return None

    def neighbours(m: int) -> set[int]:
        return {owner[w] for v in members[m] for w in adj[v]} - {m}

    for _ in range(max_moves):
        sizes = [len(s) for s in members]
        if max(sizes) - min(sizes) <= 1:
            return
        moved = False
        for big in sorted(range(num_domains), key=lambda d: (-sizes[d], d)):
            if moved:
                break
            # breadth-first search for a chain big -> ... -> small with a size deficit of 2
            prev = {big: None}
            q = deque([big])
            target = None
            while q and target is None:
                a = q.popleft()
                for b in sorted(neighbours(a)):
                    if b in prev:
                        continue
                    prev[b] = a
                    if sizes[b] <= sizes[big] - 2:
                        target = b
                        break
                    q.append(b)
            if target is None:
                continue
            chain = [target]
            while prev[chain[-1]] is not None:
                chain.append(prev[chain[-1]])
            chain.reverse()
            snapshot = owner.copy()
            ok = True
            for a, b in zip(chain, chain[1:]):
                v = movable(a, b)
                if v is None:
                    ok = False
                    break
                members[a].discard(v)
                members[b].add(v)
                owner[v] = b
            if not ok:
                owner[:] = snapshot
                _restore(owner, members)
                continue
            moved = True
        if not moved:
            return


def _rebalance_weighted(owner: list[int], adj: list[list[int]], weight: Sequence[int],
                        num_domains: int, max_moves: int = 100000) -> None:
    """Greedy single-unit moves between neighbouring domains that narrow their gap."""
    members = [set() for _ in range(num_domains)]
    size = [0] * num_domains
    for i, m in enumerate(owner):
        members[m].add(i)
        size[m] += weight[i]
    for _ in range(max_moves):
        best = None
        for v in range(len(owner)):
            a = owner[v]
            if len(members[a]) <= 1:
                continue
            for b in sorted({owner[w] for w in adj[v]} - {a}):
                gain = size[a] - size[b] - weight[v]
                if gain > 0 and (best is None or (gain, -v) > best[0]):
                    if _connected(members[a] - {v}, adj):
                        best = ((gain, -v), v, a, b)
        if best is None:
            return
        _, v, a, b = best
        members[a].discard(v)
        members[b].add(v)
        owner[v] = b
        size[a] -= weight[v]
        size[b] += weight[v]


def _restore(owner: list[int], members: list[set[int]]) -> None:
    for m in members:
        m.clear()
    for i, m in enumerate(owner):
        members[m].add(i)


def source_groups(instance: Instance) -> list[int]:
    """Group label per link: the first hops of every request's paths share a label."""
    pos = {l.id: i for i, l in enumerate(instance.links)}
    parent = list(range(len(instance.links)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    paths = instance.path_map()
    for req in instance.requests:
        first = [find(pos[paths[p].links[0]]) for p in req.paths]
        for f in first[1:]:
            parent[find(f)] = find(first[0])
    return [find(i) for i in range(len(parent))]


def partition_domains(instance: Instance, num_domains: int, seed: int,
                      align_sources: bool = True) -> Partition:
    """Split links into ``num_domains`` connected, near-equal groups.

    Seeded multi-source region growing over the link adjacency graph, then a
    rebalancing pass that shifts boundary links toward smaller domains while
    keeping every donor connected. Heuristic: balance within one link is reached
    whenever the moves allow it. Without topology metadata the links are cut into
    contiguous chunks of the declared order.

    With ``align_sources`` the first hops of each request are kept in one domain,
    so every path of a request crosses its hosting domain and no domain exchanges
    values for a path it does not traverse. Balance is then only approximate; it
    works best with directed links, where first hops of different sources never
    coincide.
    """
    n = len(instance.links)
    if not (1 <= num_domains <= n):
        raise InstanceError(f"need 1 <= domains <= {n} links, got {num_domains}")
    if num_domains == 1:
        return make_partition(instance, {l.id: 0 for l in instance.links}, 1)
    if not instance.has_topology:
        bounds = np.linspace(0, n, num_domains + 1).round().astype(int)
        link_domain = {}
        for m in range(num_domains):
            for i in range(bounds[m], bounds[m + 1]):
                link_domain[instance.links[i].id] = m
        return make_partition(instance, link_domain, num_domains)

    adj = _line_graph(instance)
    if _components(adj) > num_domains:
        raise InstanceError("more connected components than domains")
    rng = np.random.default_rng(seed)
    if align_sources:
        owner = _grow_aligned(adj, num_domains, rng, source_groups(instance))
    else:
        owner = _grow_regions(adj, num_domains, rng)
        _rebalance(owner, adj, num_domains)
    return make_partition(instance, {l.id: owner[i] for i, l in enumerate(instance.links)},
                          num_domains)


def _grow_aligned(adj: list[list[int]], num_domains: int, rng: np.random.Generator,
                  label: list[int]) -> list[int]:
    units = sorted(set(label))
    if len(units) < num_domains:
        raise InstanceError(f"only {len(units)} source-aligned link groups for {num_domains} domains")
    unit_of = {u: k for k, u in enumerate(units)}
    weight = [0] * len(units)
    for lab in label:
        weight[unit_of[lab]] += 1
    uadj: list[set[int]] = [set() for _ in units]
    for i, nbrs in enumerate(adj):
        a = unit_of[label[i]]
        uadj[a].update(unit_of[label[w]] for w in nbrs)
    for a, s in enumerate(uadj):
        s.discard(a)
    uadj_l = [sorted(s) for s in uadj]
    owner = _grow_regions(uadj_l, num_domains, rng, weight)
    _rebalance_weighted(owner, uadj_l, weight, num_domains)
    return [owner[unit_of[lab]] for lab in label]


def domain_is_connected(instance: Instance, partition: Partition, m: int) -> bool:
    adj = _line_graph(instance)
    pos = {l.id: i for i, l in enumerate(instance.links)}
    return _connected({pos[j] for j in partition.domain_links[m]}, adj)
