"""Partition-function evaluation.

Two independent routes are provided: `eval_enum` sums over all edge
colorings directly, `eval_tensor` contracts per-vertex symmetric weight
tensors over shared edge indices.  They must agree (exactly for the
rational backend), which the test suite asserts everywhere.  Circles never
enter either route; each contributes a plain factor d.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import models as _models
from .poly import Poly

DEFAULT_MAX_STATES = 10 ** 8
DEFAULT_MAX_ARITY = 12
DEFAULT_MAX_ENTRIES = 4 << 20


class EnumerationCapError(RuntimeError):
    pass


class ContractionCapError(RuntimeError):
    """Contraction would exceed its memory caps; fall back to eval_enum."""


def _max_states(override):
    if override is not None:
        return int(override)
    return int(os.environ.get("EMODEL_MAX_STATES", DEFAULT_MAX_STATES))


def _check_enum_cap(d, m, max_states):
    cap = _max_states(max_states)
    if d > 1 and d ** m > cap:
        raise EnumerationCapError(
            f"{d}^{m} colorings exceed the enumeration cap {cap}")


def _incidence(graph):
    inc = [[] for _ in range(graph.n_vertices)]
    for i, (u, v) in enumerate(graph.edges):
        inc[u].append(i)
        inc[v].append(i)  # loops contribute the same edge twice
    return inc


def _circle_factor(model, n_circles):
    return _models.scalar_from_int(model.backend, model.d) ** n_circles


class _WeightCache:
    """Memoizes model weights by the sorted tuple of incident colors."""

    __slots__ = ("model", "base", "cache")

    def __init__(self, model, base=None):
        self.model = model
        self.base = base  # per-vertex color counts contributed by open ends
        self.cache = {}

    def get(self, vertex, colors):
        key = (vertex, colors) if self.base is not None else colors
        w = self.cache.get(key)
        if w is None:
            counts = [0] * self.model.d if self.base is None else list(self.base[vertex])
            for c in colors:
                counts[c] += 1
            w = self.model.weight(tuple(counts))
            self.cache[key] = w
        return w


def eval_enum(model, graph, max_states=None):
    """Sum over all edge colorings; exact in the model's backend."""
    if not graph.is_closed:
        raise ValueError("eval_enum needs a closed graph")
    d = model.d
    m = len(graph.edges)
    _check_enum_cap(d, m, max_states)
    inc = _incidence(graph)
    cache = _WeightCache(model)
    total = model.zero()
    for coloring in itertools.product(range(d), repeat=m):
        term = model.one()
        for v, slots in enumerate(inc):
            w = cache.get(v, tuple(sorted(coloring[i] for i in slots)))
            if not w:
                term = None
                break
            term = term * w
        if term is not None:
            total = total + term
    return total * _circle_factor(model, graph.n_circles)


def boundary_colorings(k, d):
    """All maps {1..k} -> {1..d}, as dicts."""
    for combo in itertools.product(range(1, d + 1), repeat=k):
        yield dict(zip(range(1, k + 1), combo))


def eval_boundary(model, graph, chi, max_states=None):
    """Sum over edge colorings extending the boundary coloring chi."""
    k = graph.k
    if sorted(chi) != list(range(1, k + 1)):
        raise ValueError(f"boundary coloring must be total on 1..{k}")
    if any(not 1 <= c <= model.d for c in chi.values()):
        raise ValueError("boundary colors must lie in 1..d")
    d = model.d
    m = len(graph.edges)
    _check_enum_cap(d, m, max_states)

    circ = _circle_factor(model, graph.n_circles)
    # a bare edge is a single edge, so its two open ends must agree
    for (a, b) in graph.bare_edges:
        if chi[a] != chi[b]:
            return model.zero()
    base = [[0] * d for _ in range(graph.n_vertices)]
    for (label, v) in graph.vertex_ends:
        base[v][chi[label] - 1] += 1
    inc = _incidence(graph)
    cache = _WeightCache(model, base=[tuple(b) for b in base])
    total = model.zero()
    for coloring in itertools.product(range(d), repeat=m):
        term = model.one()
        for v, slots in enumerate(inc):
            w = cache.get(v, tuple(sorted(coloring[i] for i in slots)))
            if not w:
                term = None
                break
            term = term * w
        if term is not None:
            total = total + term
    return total * circ


# ---------------------------------------------------------------------------
# Tensor contraction
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ContractionPlan:
    """Greedy pairwise merge schedule over the vertex/bare-edge tensors."""

    node_axes: tuple        # node id -> tuple of axis ids at build time
    steps: tuple            # (node_a, node_b, merged_node) triples
    free_axes: tuple        # open-end axes in label order
    peak_indices: int
    peak_entries: int


def _plan_axes(graph):
    """Axes per tensor node.  Real edge i is axis ('E', i), shared by its two
    endpoints; open end with label l is the free axis ('O', l)."""
    nodes = {}
    for v in range(graph.n_vertices):
        axes = []
        for i, (a, b) in enumerate(graph.edges):
            if a == v and b == v:
                continue  # loops are traced away inside the vertex tensor
            if a == v or b == v:
                axes.append(("E", i))
        for (label, w) in graph.vertex_ends:
            if w == v:
                axes.append(("O", label))
        nodes[("v", v)] = tuple(axes)
    for j, (a, b) in enumerate(graph.bare_edges):
        nodes[("b", j)] = (("O", a), ("O", b))
    return nodes


def plan_contraction(graph, d, max_arity=DEFAULT_MAX_ARITY, max_entries=DEFAULT_MAX_ENTRIES):
    """Build the greedy contraction plan and check the size caps."""
    for v in range(graph.n_vertices):
        if graph.degree(v) > max_arity:
            raise ContractionCapError(
                f"vertex {v} has degree {graph.degree(v)} > arity cap {max_arity};"
                " fall back to eval_enum")
    node_axes = _plan_axes(graph)

    def entries(axes):
        return d ** len(axes) if d > 0 else (1 if not axes else 0)

    live = {node: frozenset(axes) for node, axes in node_axes.items()}
    min_vid = {node: node for node in live}
    peak_indices = max((len(a) for a in live.values()), default=0)
    peak_entries = max((entries(a) for a in live.values()), default=1)
    if peak_entries > max_entries:
        raise ContractionCapError(
            f"a vertex tensor needs {peak_entries} entries > cap {max_entries};"
            " fall back to eval_enum")
    steps = []
    fresh = itertools.count()
    while True:
        best = None
        nodes = sorted(live, key=lambda n: min_vid[n])
        for ia in range(len(nodes)):
            for ib in range(ia + 1, len(nodes)):
                a, b = nodes[ia], nodes[ib]
                shared = live[a] & live[b]
                if not shared:
                    continue
                result = (live[a] | live[b]) - shared
                cost = (len(result), entries(live[a]) + entries(live[b]),
                        min_vid[a], min_vid[b])
                if best is None or cost < best[0]:
                    best = (cost, a, b, result)
        if best is None:
            break
        _, a, b, result = best
        merged = ("m", next(fresh))
        steps.append((a, b, merged))
        min_vid[merged] = min(min_vid[a], min_vid[b])
        del live[a], live[b]
        live[merged] = result
        peak_indices = max(peak_indices, len(result))
        if entries(result) > max_entries:
            raise ContractionCapError(
                f"intermediate tensor needs {entries(result)} entries > cap"
                f" {max_entries}; fall back to eval_enum")
        peak_entries = max(peak_entries, entries(result))

    free = tuple(sorted(ax for axes in live.values() for ax in axes))
    return ContractionPlan(tuple(sorted(node_axes.items())), steps=tuple(steps),
                           free_axes=free, peak_indices=peak_indices,
                           peak_entries=peak_entries)


def _dtype_for(backend):
    return {_models.RATIONAL: object, _models.REAL: np.float64,
            _models.COMPLEX: np.complex128}[backend]


def _vertex_tensor(model, graph, v, dtype):
    """Dense symmetric weight tensor of a vertex, loops already traced."""
    d = model.d
    loop_count = sum(1 for (a, b) in graph.edges if a == v and b == v)
    plain_axes = []
    for i, (a, b) in enumerate(graph.edges):
        if a == v and b == v:
            continue
        if a == v or b == v:
            plain_axes.append(("E", i))
    open_axes = [("O", label) for (label, w) in graph.vertex_ends if w == v]
    deg = len(plain_axes) + len(open_axes) + 2 * loop_count
    arr = np.empty((d,) * deg, dtype=dtype)
    cache = {}
    if deg == 0:
        value = model.weight((0,) * d)
        return np.array(value, dtype=dtype), []
    for idx in itertools.product(range(d), repeat=deg):
        key = tuple(sorted(idx))
        w = cache.get(key)
        if w is None:
            counts = [0] * d
            for c in idx:
                counts[c] += 1
            w = model.weight(tuple(counts))
            cache[key] = w
        arr[idx] = w
    # trace out loop axis pairs (they occupy the trailing 2*loop_count slots)
    for _ in range(loop_count):
        arr = arr.trace(axis1=arr.ndim - 2, axis2=arr.ndim - 1)
    return arr, plain_axes + open_axes


def _bare_tensor(model, dtype):
    d = model.d
    arr = np.full((d, d), model.zero(), dtype=dtype)
    one = model.one()
    for i in range(d):
        arr[i, i] = one
    return arr


def _contract_all(model, graph, plan):
    dtype = _dtype_for(model.backend)
    tensors = {}
    for node, _ in plan.node_axes:
        if node[0] == "v":
            arr, axes = _vertex_tensor(model, graph, node[1], dtype)
        else:
            arr = _bare_tensor(model, dtype)
            axes = list(dict(plan.node_axes)[node])
        tensors[node] = (arr, list(axes))
    for (a, b, merged) in plan.steps:
        arr_a, ax_a = tensors.pop(a)
        arr_b, ax_b = tensors.pop(b)
        shared = [ax for ax in ax_a if ax in ax_b]
        pos_a = [ax_a.index(ax) for ax in shared]
        pos_b = [ax_b.index(ax) for ax in shared]
        arr = np.tensordot(arr_a, arr_b, axes=(pos_a, pos_b))
        axes = [ax for ax in ax_a if ax not in shared] + \
               [ax for ax in ax_b if ax not in shared]
        tensors[merged] = (arr, axes)
    # disjoint pieces: outer products
    items = sorted(tensors.items())
    arr, axes = items[0][1]
    for _, (arr2, axes2) in items[1:]:
        arr = np.tensordot(arr, arr2, axes=0)
        axes = axes + axes2
    return arr, axes


def eval_tensor(model, graph, max_arity=DEFAULT_MAX_ARITY,
                max_entries=DEFAULT_MAX_ENTRIES):
    """Evaluate a closed graph by tensor contraction; equals eval_enum."""
    if not graph.is_closed:
        raise ValueError("eval_tensor needs a closed graph")
    if graph.n_vertices == 0 and not graph.edges:
        return model.one() * _circle_factor(model, graph.n_circles)
    plan = plan_contraction(graph, model.d, max_arity, max_entries)
    arr, axes = _contract_all(model, graph, plan)
    assert not axes, "closed graph left free axes"
    value = arr.item() if isinstance(arr, np.ndarray) else arr
    return value * _circle_factor(model, graph.n_circles)


def boundary_tensor(model, graph, max_arity=DEFAULT_MAX_ARITY,
                    max_entries=DEFAULT_MAX_ENTRIES):
    """Tensor of boundary values t_chi(G), axes in open-end label order.

    Entry [c1-1, ..., ck-1] equals eval_boundary for chi(i) = ci.
    """
    if graph.k == 0:
        raise ValueError("boundary tensor needs open ends; use eval_tensor")
    plan = plan_contraction(graph, model.d, max_arity, max_entries)
    arr, axes = _contract_all(model, graph, plan)
    order = [axes.index(("O", l)) for l in range(1, graph.k + 1)]
    arr = np.transpose(arr, order)
    circ = _circle_factor(model, graph.n_circles)
    if model.backend == _models.RATIONAL:
        return arr * circ
    return arr * _dtype_for(model.backend)(circ)


def eval_universal(graph, d, max_states=None):
    """The universal-model value t_d(G): a polynomial in the x_v."""
    if not graph.is_closed:
        raise ValueError("eval_universal needs a closed graph")
    m = len(graph.edges)
    _check_enum_cap(d, m, max_states)
    inc = _incidence(graph)
    terms = {}
    for coloring in itertools.product(range(d), repeat=m):
        mono = {}
        for slots in inc:
            counts = [0] * d
            for i in slots:
                counts[coloring[i]] += 1
            cv = tuple(counts)
            mono[cv] = mono.get(cv, 0) + 1
        key = tuple(sorted(mono.items()))
        terms[key] = terms.get(key, 0) + 1
    poly = Poly(d, {mono: Fraction(c) for mono, c in terms.items()})
    return poly * (Fraction(d) ** graph.n_circles)


def eval_quantum(model, q, max_states=None):
    """Linear extension of eval_enum to quantum graphs."""
    total = _models.zero_scalar(model.backend)
    for (coeff, graph) in q.terms:
        if not graph.is_closed:
            raise ValueError("eval_quantum needs closed terms")
        total = total + coeff * eval_enum(model, graph, max_states=max_states)
    return total


def eval_graph(model, graph, method="enum", **kwargs):
    """Front door used by the CLI: method is 'enum', 'tensor' or 'auto'."""
    if method == "enum":
        return eval_enum(model, graph, **kwargs)
    if method == "tensor":
        return eval_tensor(model, graph)
    if method == "auto":
        try:
            return eval_tensor(model, graph)
        except ContractionCapError:
            return eval_enum(model, graph, **kwargs)
    raise ValueError(f"unknown method {method!r}")
