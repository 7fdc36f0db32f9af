"""Independent brute-force counters used as ground truth for the model zoo.

These deliberately share no code with the evaluators: subset counters walk
bitmasks of the edge set, coloring counters walk labelings edge by edge,
and the permanent expands over permutations.  Agreement with the models is
therefore a genuine cross-check.
"""

from __future__ import annotations

import itertools

SUBSET_CAP_EDGES = 24
COLORING_CAP_STATES = 10 ** 8

COUNT_KINDS = (
    "perfect_matchings",
    "matchings",
    "spanning_2_regular",
    "partial_2_regular",
    "d_regular_subgraphs",
    "proper_edge_colorings",
    "nowhere_zero_Z2xZ2_flows",
    "permanent_adjacency",
)

_NEEDS_PARAM = {"d_regular_subgraphs", "proper_edge_colorings"}


def _check_graph(graph):
    if not graph.is_closed:
        raise ValueError("oracles count on closed graphs only")
    if graph.n_circles:
        raise ValueError("oracles do not accept circles")


def _subset_count(graph, predicate):
    m = len(graph.edges)
    if m > SUBSET_CAP_EDGES:
        raise ValueError(f"too many edges for subset enumeration ({m} > {SUBSET_CAP_EDGES})")
    n = graph.n_vertices
    edges = graph.edges
    count = 0
    for mask in range(1 << m):
        deg = [0] * n
        mm = mask
        i = 0
        while mm:
            if mm & 1:
                u, v = edges[i]
                deg[u] += 1
                deg[v] += 1  # loops hit the same vertex twice
            mm >>= 1
            i += 1
        if all(predicate(x) for x in deg):
            count += 1
    return count


def _coloring_cap(graph, q):
    m = len(graph.edges)
    if q > 1 and q ** m > COLORING_CAP_STATES:
        raise ValueError(f"too many labelings ({q}^{m}) for enumeration")


def _proper_colorings(graph, q):
    _coloring_cap(graph, q)
    incident = [[] for _ in range(graph.n_vertices)]
    for i, (u, v) in enumerate(graph.edges):
        incident[u].append(i)
        incident[v].append(i)  # a loop conflicts with itself
    count = 0
    for coloring in itertools.product(range(q), repeat=len(graph.edges)):
        ok = True
        for slots in incident:
            seen = set()
            for i in slots:
                c = coloring[i]
                if c in seen:
                    ok = False
                    break
                seen.add(c)
            if not ok:
                break
        if ok:
            count += 1
    return count


def _z2z2_flows(graph):
    # edge labels are the nonzero elements of Z2 x Z2, encoded 1, 2, 3;
    # a labeling is a flow iff the XOR of incident labels vanishes everywhere
    _coloring_cap(graph, 3)
    incident = [[] for _ in range(graph.n_vertices)]
    for i, (u, v) in enumerate(graph.edges):
        incident[u].append(i)
        incident[v].append(i)
    count = 0
    for labeling in itertools.product((1, 2, 3), repeat=len(graph.edges)):
        if all(_xor_all(labeling, slots) == 0 for slots in incident):
            count += 1
    return count


def _xor_all(labeling, slots):
    acc = 0
    for i in slots:
        acc ^= labeling[i]
    return acc


def _permanent(graph):
    n = graph.n_vertices
    if n > 10:
        raise ValueError("permanent oracle capped at 10 vertices")
    A = [[0] * n for _ in range(n)]
    for (u, v) in graph.edges:
        A[u][v] = 1
        A[v][u] = 1
    # expansion over permutations, pruned row by row
    used = [False] * n

    def expand(row):
        if row == n:
            return 1
        total = 0
        arow = A[row]
        for col in range(n):
            if arow[col] and not used[col]:
                used[col] = True
                total += expand(row + 1)
                used[col] = False
        return total

    return expand(0)


def oracle_count(graph, kind, param=None):
    """Count structures of the given kind in a closed circle-free graph."""
    _check_graph(graph)
    if kind not in COUNT_KINDS:
        raise ValueError(f"unknown count kind {kind!r}")
    if kind in _NEEDS_PARAM:
        if param is None or int(param) < 1:
            raise ValueError(f"{kind} needs a positive integer parameter")
        param = int(param)
    elif param is not None:
        raise ValueError(f"{kind} takes no parameter")

    if kind == "perfect_matchings":
        return _subset_count(graph, lambda x: x == 1)
    if kind == "matchings":
        return _subset_count(graph, lambda x: x <= 1)
    if kind == "spanning_2_regular":
        return _subset_count(graph, lambda x: x == 2)
    if kind == "partial_2_regular":
        return _subset_count(graph, lambda x: x in (0, 2))
    if kind == "d_regular_subgraphs":
        return _subset_count(graph, lambda x: x in (0, param))
    if kind == "proper_edge_colorings":
        return _proper_colorings(graph, param)
    if kind == "nowhere_zero_Z2xZ2_flows":
        return _z2z2_flows(graph)
    return _permanent(graph)
