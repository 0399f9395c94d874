import random

import pytest

from eonrsa import Instance, Request, Topology


def make_random_tiny_instance(
    seed: int,
    max_nodes: int = 6,
    max_links: int = 8,
    max_requests: int = 5,
    max_spectrum: int = 8,
    max_demand: int = 3,
) -> Instance:
    """Seeded connected instance within the oracle limits."""
    rng = random.Random(seed)
    n = rng.randint(2, max_nodes)
    nodes = tuple(f"n{i}" for i in range(n))
    links = []
    present = set()
    for i in range(1, n):  # random spanning tree keeps it connected
        j = rng.randrange(i)
        links.append((nodes[j], nodes[i]))
        present.add((j, i))
    budget = min(max_links, n * (n - 1) // 2) - len(links)
    extra = rng.randint(0, max(0, budget))
    guard = 0
    while extra > 0 and guard < 100:
        guard += 1
        i, j = rng.randrange(n), rng.randrange(n)
        if i == j:
            continue
        a, b = min(i, j), max(i, j)
        if (a, b) in present:
            continue
        present.add((a, b))
        links.append((nodes[a], nodes[b]))
        extra -= 1
    topo = Topology(name=f"rand{seed}", nodes=nodes, links=tuple(links))
    spectrum = rng.randint(2, max_spectrum)
    k = rng.randint(1, max_requests)
    requests = []
    for i in range(k):
        a, b = rng.sample(range(n), 2)
        requests.append(Request(i, nodes[a], nodes[b], rng.randint(1, max_demand)))
    return Instance(
        topology=topo, spectrum_slots=spectrum, requests=tuple(requests), name=f"tiny{seed}"
    )


def make_four_node_instance(seed: int) -> Instance:
    rng = random.Random(seed)
    nodes = ("a", "b", "c", "d")
    all_edges = [("a", "b"), ("a", "c"), ("a", "d"), ("b", "c"), ("b", "d"), ("c", "d")]
    rng.shuffle(all_edges)
    links = tuple(sorted(all_edges[: rng.randint(4, 6)]))
    topo = Topology(name=f"quad{seed}", nodes=nodes, links=links)
    spectrum = rng.randint(3, 8)
    k = rng.randint(2, 4)
    requests = tuple(
        Request(i, *rng.sample(nodes, 2), demand=rng.randint(1, 3)) for i in range(k)
    )
    return Instance(topology=topo, spectrum_slots=spectrum, requests=requests, name=f"quad{seed}")


@pytest.fixture
def triangle() -> Topology:
    return Topology(name="triangle", nodes=("a", "b", "c"), links=(("a", "b"), ("b", "c"), ("a", "c")))


@pytest.fixture
def two_node() -> Topology:
    return Topology(name="pair", nodes=("a", "b"), links=(("a", "b"),))
