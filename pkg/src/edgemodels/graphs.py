"""Multigraphs with loops, circles and labeled open ends, plus gluing.

A graph here may contain three unusual kinds of edges: loops (both
endpoints equal), circles (edges with no endpoints at all, stored as a
count), and bare edges (both endpoints are open ends).  Open ends are
labeled 1..k and behave like unfinished edges: gluing two graphs with the
same label set splices equally-labeled ends into ordinary edges, possibly
producing new circles.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction


class GraphParseError(ValueError):
    """Raised on malformed graph files; carries the 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


def _norm_pair(u, v):
    return (u, v) if u <= v else (v, u)


@dataclass(frozen=True)
class OpenGraph:
    """A multigraph with loops, circles and labeled open ends.

    `edges` are unordered endpoint pairs between vertices (a loop when both
    endpoints coincide).  `vertex_ends` lists (label, vertex) attachments;
    `bare_edges` lists label pairs joined by an edge that touches no vertex.
    The open-end labels, taken together, must be exactly 1..k.
    """

    n_vertices: int
    edges: tuple = ()
    n_circles: int = 0
    vertex_ends: tuple = ()
    bare_edges: tuple = ()

    def __post_init__(self):
        if self.n_vertices < 0 or self.n_circles < 0:
            raise ValueError("vertex and circle counts must be nonnegative")
        edges = tuple(sorted(_norm_pair(u, v) for (u, v) in self.edges))
        for (u, v) in edges:
            if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
                raise ValueError(f"edge ({u},{v}) references unknown vertex")
        vends = tuple(sorted((int(l), int(v)) for (l, v) in self.vertex_ends))
        bares = tuple(sorted(_norm_pair(a, b) for (a, b) in self.bare_edges))
        labels = [l for (l, _) in vends]
        for (a, b) in bares:
            if a == b:
                raise ValueError("a bare edge needs two distinct labels")
            labels.extend((a, b))
        if sorted(labels) != list(range(1, len(labels) + 1)):
            raise ValueError(f"open-end labels must be exactly 1..k, got {sorted(labels)}")
        for (_, v) in vends:
            if not 0 <= v < self.n_vertices:
                raise ValueError(f"open end attached to unknown vertex {v}")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "vertex_ends", vends)
        object.__setattr__(self, "bare_edges", bares)

    @property
    def k(self):
        """Number of open ends."""
        return len(self.vertex_ends) + 2 * len(self.bare_edges)

    @property
    def is_closed(self):
        return self.k == 0

    @property
    def open_ends(self):
        """Map label -> attachment, ('v', vertex) or ('e', bare_edge_index)."""
        ends = {l: ("v", v) for (l, v) in self.vertex_ends}
        for i, (a, b) in enumerate(self.bare_edges):
            ends[a] = ("e", i)
            ends[b] = ("e", i)
        return ends

    def degree(self, v):
        """Vertex degree; loops count twice, attached open ends count once."""
        deg = 0
        for (a, b) in self.edges:
            deg += (a == v) + (b == v)
        deg += sum(1 for (_, w) in self.vertex_ends if w == v)
        return deg

    def degrees(self):
        deg = [0] * self.n_vertices
        for (a, b) in self.edges:
            deg[a] += 1
            deg[b] += 1
        for (_, w) in self.vertex_ends:
            deg[w] += 1
        return deg

    @property
    def max_degree(self):
        return max(self.degrees(), default=0)

    @property
    def is_simple(self):
        """No loops, parallel edges, circles or open ends."""
        if not self.is_closed or self.n_circles:
            return False
        if any(u == v for (u, v) in self.edges):
            return False
        return len(set(self.edges)) == len(self.edges)

    def __repr__(self):
        bits = [f"OpenGraph(n={self.n_vertices}, m={len(self.edges)}"]
        if self.n_circles:
            bits.append(f", circles={self.n_circles}")
        if self.k:
            bits.append(f", k={self.k}")
        return "".join(bits) + ")"


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def complete_graph(n):
    return OpenGraph(n, tuple(itertools.combinations(range(n), 2)))


def cycle_graph(n):
    if n < 1:
        raise ValueError("cycle needs at least one vertex")
    return OpenGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def path_graph(n_edges):
    """Path with n_edges edges (n_edges + 1 vertices)."""
    return OpenGraph(n_edges + 1, tuple((i, i + 1) for i in range(n_edges)))


def matching_graph(pairs):
    """Vertex-free graph whose edges are bare edges on the given label pairs."""
    return OpenGraph(0, bare_edges=tuple(pairs))


def perm_matching(pi):
    """The matching a_pi in M_2n: end i joined to end pi(i)+n, pi 0-based."""
    n = len(pi)
    return matching_graph((i + 1, pi[i] + 1 + n) for i in range(n))


# ---------------------------------------------------------------------------
# Parsing / serialization
# ---------------------------------------------------------------------------

def parse_graph(text):
    """Parse the line-oriented graph format (see module docs / README)."""
    n_vertices = 0
    saw_vertices = False
    edges = []
    n_circles = 0
    vertex_ends = []
    bare_slots = {}
    seen_labels = set()
    name = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "graph":
                name = parts[1] if len(parts) > 1 else None
            elif kind == "vertices":
                n_vertices = int(parts[1])
                saw_vertices = True
            elif kind == "edge":
                u, v = int(parts[1]), int(parts[2])
                if not (0 <= u < n_vertices and 0 <= v < n_vertices):
                    raise GraphParseError(f"edge ({u},{v}) references unknown vertex", lineno)
                edges.append((u, v))
            elif kind == "circle":
                n_circles += 1
            elif kind == "open":
                label = int(parts[1])
                if label in seen_labels:
                    raise GraphParseError(f"duplicate open label {label}", lineno)
                seen_labels.add(label)
                target = parts[2]
                if target.startswith("*e"):
                    bare_slots.setdefault(target[2:], []).append(label)
                else:
                    v = int(target)
                    if not 0 <= v < n_vertices:
                        raise GraphParseError(f"open end on unknown vertex {v}", lineno)
                    vertex_ends.append((label, v))
            else:
                raise GraphParseError(f"unknown directive {kind!r}", lineno)
        except GraphParseError:
            raise
        except (IndexError, ValueError):
            raise GraphParseError(f"malformed line {line!r}", lineno) from None

    if not saw_vertices and (edges or vertex_ends):
        raise GraphParseError("missing 'vertices' line")
    bare_edges = []
    for eid, labels in sorted(bare_slots.items()):
        if len(labels) != 2:
            raise GraphParseError(f"bare edge *e{eid} must carry exactly two open ends")
    for eid, labels in sorted(bare_slots.items()):
        bare_edges.append((labels[0], labels[1]))

    try:
        g = OpenGraph(n_vertices, tuple(edges), n_circles,
                      tuple(vertex_ends), tuple(bare_edges))
    except ValueError as exc:
        raise GraphParseError(str(exc)) from None
    return g


def graph_to_text(g, name=None):
    """Serialize to the graph file format; parse_graph round-trips it."""
    lines = []
    if name:
        lines.append(f"graph {name}")
    lines.append(f"vertices {g.n_vertices}")
    for (u, v) in g.edges:
        lines.append(f"edge {u} {v}")
    for _ in range(g.n_circles):
        lines.append("circle")
    for (l, v) in g.vertex_ends:
        lines.append(f"open {l} {v}")
    for i, (a, b) in enumerate(g.bare_edges):
        lines.append(f"open {a} *e{i}")
        lines.append(f"open {b} *e{i}")
    return "\n".join(lines) + "\n"


def load_graph(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


# ---------------------------------------------------------------------------
# Disjoint union and gluing
# ---------------------------------------------------------------------------

def disjoint_union(g1, g2):
    """Disjoint union of two closed graphs; counts add, nothing is identified."""
    if not (g1.is_closed and g2.is_closed):
        raise ValueError("disjoint union is defined for closed graphs only")
    n1 = g1.n_vertices
    edges = g1.edges + tuple((u + n1, v + n1) for (u, v) in g2.edges)
    return OpenGraph(n1 + g2.n_vertices, edges, g1.n_circles + g2.n_circles)


def glue(g1, g2, elimination_order=None):
    """Glue two graphs with the same open-end label set.

    Equally-labeled ends are identified into degree-2 junctions which are
    then spliced out, joining their two neighbors by a direct edge.  A
    junction whose two half-edges belong to one edge yields a circle.  The
    result does not depend on the elimination order (the optional argument
    exists so tests can assert exactly that).
    """
    if g1.k != g2.k:
        raise ValueError(f"cannot glue: {g1.k} open ends vs {g2.k}")
    if g1.k == 0:
        return disjoint_union(g1, g2)

    n1 = g1.n_vertices
    # Node space: ('v', vid) for result vertices, ('j', label) for junctions.
    edges = []          # mutable endpoint pairs
    alive = []
    incident = {}       # junction node -> list of edge ids (loops listed twice)

    def add_edge(a, b):
        eid = len(edges)
        edges.append([a, b])
        alive.append(True)
        for node in (a, b):
            if node[0] == "j":
                incident.setdefault(node, []).append(eid)
        return eid

    def install(g, offset):
        for (u, v) in g.edges:
            add_edge(("v", u + offset), ("v", v + offset))
        for (l, v) in g.vertex_ends:
            add_edge(("j", l), ("v", v + offset))
        for (a, b) in g.bare_edges:
            add_edge(("j", a), ("j", b))

    install(g1, 0)
    install(g2, n1)
    circles = g1.n_circles + g2.n_circles

    order = list(elimination_order) if elimination_order is not None else sorted(
        range(1, g1.k + 1))
    if sorted(order) != sorted(range(1, g1.k + 1)):
        raise ValueError("elimination order must be a permutation of the labels")

    for label in order:
        j = ("j", label)
        ids = incident.pop(j)
        assert len(ids) == 2, "junctions always have degree 2"
        e1, e2 = ids
        if e1 == e2:
            # both half-edges of one edge: the splice closes a circle
            alive[e1] = False
            circles += 1
            continue
        others = []
        for eid in (e1, e2):
            a, b = edges[eid]
            others.append(b if a == j else a)
            alive[eid] = False
            other = b if a == j else a
            if other[0] == "j":
                incident[other].remove(eid)
        add_edge(others[0], others[1])

    final_edges = []
    for eid, (a, b) in enumerate(edges):
        if not alive[eid]:
            continue
        assert a[0] == "v" and b[0] == "v"
        final_edges.append((a[1], b[1]))
    return OpenGraph(n1 + g2.n_vertices, tuple(final_edges), circles)


def degree_multiset(g):
    """Sorted tuple of vertex degrees; defined for closed, circle-free graphs."""
    if not g.is_closed:
        raise ValueError("degree multiset is defined for closed graphs")
    if g.n_circles:
        raise ValueError("degree multiset is not defined with circles present")
    return tuple(sorted(g.degrees()))


# ---------------------------------------------------------------------------
# Canonical form
# ---------------------------------------------------------------------------

_CANON_CAP = 10


def canonical_key(g):
    """A hashable key equal for isomorphic graphs (respecting end labels).

    Below _CANON_CAP vertices the key is exact: equal keys imply isomorphism.
    Above the cap a weaker profile key is used; merging quantum-graph terms
    then becomes best-effort, which is sound (a missed merge never changes
    any evaluation, only the term count).
    """
    bare = g.bare_edges
    base = (g.n_vertices, g.n_circles, bare)
    if g.n_vertices == 0:
        return base + ((),)
    if g.n_vertices > _CANON_CAP:
        return base + ("profile", _profile_key(g))
    return base + (_min_representation(g),)


def _vertex_data(g):
    n = g.n_vertices
    adj = [[0] * n for _ in range(n)]
    loops = [0] * n
    for (u, v) in g.edges:
        if u == v:
            loops[u] += 1
        else:
            adj[u][v] += 1
            adj[v][u] += 1
    labels = [[] for _ in range(n)]
    for (l, v) in g.vertex_ends:
        labels[v].append(l)
    labels = [tuple(sorted(ls)) for ls in labels]
    return adj, loops, labels


def _profile_key(g):
    adj, loops, labels = _vertex_data(g)
    deg = g.degrees()
    vprof = tuple(sorted((deg[v], loops[v], labels[v]) for v in range(g.n_vertices)))
    eprof = tuple(sorted(tuple(sorted((deg[u], deg[v]))) for (u, v) in g.edges))
    return (vprof, eprof)


def _refine_classes(g):
    """1-WL color refinement; returns classes sorted by an invariant signature."""
    adj, loops, labels = _vertex_data(g)
    n = g.n_vertices
    deg = g.degrees()
    color = [(deg[v], loops[v], labels[v]) for v in range(n)]
    while True:
        nxt = []
        for v in range(n):
            around = sorted((color[u],) * adj[v][u] for u in range(n) if adj[v][u])
            flat = tuple(c for grp in around for c in grp)
            nxt.append((color[v], flat))
        if len(set(nxt)) == len(set(color)):
            break
        color = nxt
    classes = {}
    for v in range(n):
        classes.setdefault(color[v], []).append(v)
    ordered = [sorted(vs) for _, vs in sorted(classes.items())]
    return ordered, adj, loops, labels


def _min_representation(g):
    """Lexicographically minimal adjacency representation over all
    class-respecting vertex orderings (exact canonical form)."""
    classes, adj, loops, labels = _refine_classes(g)
    n = g.n_vertices
    pos_class = []
    for ci, cls in enumerate(classes):
        pos_class.extend([ci] * len(cls))

    best = None
    assigned = []
    used = set()
    cols = []

    def search():
        nonlocal best
        p = len(assigned)
        if p == n:
            if best is None or cols < best:
                best = list(cols)
            return
        for v in classes[pos_class[p]]:
            if v in used:
                continue
            row = adj[v]
            col = (loops[v], labels[v], tuple(row[u] for u in assigned))
            if best is not None:
                cols.append(col)
                worse = cols > best[: p + 1]
                cols.pop()
                if worse:
                    continue
            used.add(v)
            assigned.append(v)
            cols.append(col)
            search()
            cols.pop()
            assigned.pop()
            used.remove(v)

    search()
    return tuple(best)


# ---------------------------------------------------------------------------
# Quantum graphs
# ---------------------------------------------------------------------------

class QuantumGraph:
    """Formal linear combination of OpenGraphs with exact rational
    coefficients; all terms share one open-end label set."""

    __slots__ = ("terms", "k")

    def __init__(self, terms=()):
        merged = {}
        reps = {}
        k = None
        for coeff, graph in terms:
            coeff = Fraction(coeff)
            if k is None:
                k = graph.k
            elif graph.k != k:
                raise ValueError("all terms of a quantum graph must share k")
            key = canonical_key(graph)
            merged[key] = merged.get(key, Fraction(0)) + coeff
            reps.setdefault(key, graph)
        out = tuple(sorted(
            ((reps[key], c) for key, c in merged.items() if c != 0),
            key=lambda pair: canonical_key(pair[0])))
        self.terms = tuple((c, g) for (g, c) in out)
        self.k = k if self.terms else (k if k is not None else 0)

    @classmethod
    def from_graph(cls, graph, coeff=1):
        return cls([(Fraction(coeff), graph)])

    def __add__(self, other):
        return QuantumGraph(self.terms + other.terms)

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        scalar = Fraction(scalar)
        return QuantumGraph([(scalar * c, g) for (c, g) in self.terms])

    def __eq__(self, other):
        if not isinstance(other, QuantumGraph):
            return NotImplemented
        mine = {canonical_key(g): c for (c, g) in self.terms}
        theirs = {canonical_key(g): c for (c, g) in other.terms}
        return mine == theirs

    def __len__(self):
        return len(self.terms)

    def __repr__(self):
        return f"QuantumGraph({len(self.terms)} terms, k={self.k})"


def glue_quantum(q1, q2):
    """Bilinear extension of glue to quantum graphs; like terms merged."""
    if q1.terms and q2.terms and q1.k != q2.k:
        raise ValueError(f"cannot glue quantum graphs: k={q1.k} vs k={q2.k}")
    out = []
    for (c1, g1) in q1.terms:
        for (c2, g2) in q2.terms:
            out.append((c1 * c2, glue(g1, g2)))
    return QuantumGraph(out)
