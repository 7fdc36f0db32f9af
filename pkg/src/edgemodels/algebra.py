"""Connection matrices and the generalized Brauer diagram algebra.

The connection-matrix side evaluates finite principal submatrices of the
gluing form (so a PSD check here is evidence, never a certificate), plus
the permutation-indexed circle matrices whose alternating eigenvalue is
the falling factorial of the circle value.  The diagram side implements
matchings between multiset-typed boundaries, their product with cycle
factors d^n, the 0/1 coloring representation omega, and the tau maps into
(quantum) graphs.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .evaluate import eval_enum, eval_graph
from .graphs import OpenGraph, QuantumGraph, glue, matching_graph, perm_matching


# ---------------------------------------------------------------------------
# Matchings bases and permutation connection matrices
# ---------------------------------------------------------------------------

def matchings_basis(k):
    """All (k-1)!! vertex-free perfect matchings on k labeled open ends.

    Empty for odd k.  These span the subspace used for the finite
    connection-matrix checks.
    """
    if k < 0 or k > 10:
        raise ValueError("matchings basis supported for 0 <= k <= 10")
    if k % 2 == 1:
        return []
    if k == 0:
        return [OpenGraph(0)]

    def rec(labels):
        if not labels:
            yield []
            return
        first, rest = labels[0], labels[1:]
        for i, partner in enumerate(rest):
            for tail in rec(rest[:i] + rest[i + 1:]):
                yield [(first, partner)] + tail

    return [matching_graph(pairs) for pairs in rec(list(range(1, k + 1)))]


def _cycle_count(perm):
    seen = [False] * len(perm)
    count = 0
    for i in range(len(perm)):
        if seen[i]:
            continue
        count += 1
        j = i
        while not seen[j]:
            seen[j] = True
            j = perm[j]
    return count


def _sign(perm):
    return 1 if (len(perm) - _cycle_count(perm)) % 2 == 0 else -1


def _inverse(perm):
    inv = [0] * len(perm)
    for i, x in enumerate(perm):
        inv[x] = i
    return tuple(inv)


def perm_connection_matrix(d, n):
    """The n! x n! matrix with entry d^(number of cycles of pi rho^-1).

    Returns (perms, rows) with rows of exact scalars; d may be a Fraction.
    """
    if n < 1 or n > 7:
        raise ValueError("permutation matrix supported for 1 <= n <= 7")
    d = Fraction(d)
    perms = list(itertools.permutations(range(n)))
    powers = [d ** c for c in range(n + 1)]
    rows = []
    for pi in perms:
        row = []
        for rho in perms:
            inv = _inverse(rho)
            comp = tuple(pi[inv[i]] for i in range(n))
            row.append(powers[_cycle_count(comp)])
        rows.append(row)
    return perms, rows


def falling_factorial(d, n):
    d = Fraction(d)
    out = Fraction(1)
    for i in range(n):
        out *= d - i
    return out


@dataclass(frozen=True)
class CircleValueReport:
    d: object
    n_max: int
    eigenvalues: tuple          # falling factorials per n = 1..n_max
    identity_ok: bool           # M_n w == lambda_n w, exactly, for all n
    first_violation: int | None  # least n with lambda_n < 0, if any

    @property
    def consistent(self):
        return self.identity_ok and self.first_violation is None

    def to_json(self):
        return {
            "d": str(self.d),
            "n_max": self.n_max,
            "eigenvalues": [str(l) for l in self.eigenvalues],
            "identity_ok": self.identity_ok,
            "first_violation": self.first_violation,
            "consistent": self.consistent,
        }


def circle_integrity_rows(d, n):
    """Exact check that w = sum sgn(pi) pi is an eigenvector of M_n."""
    d = Fraction(d)
    perms = list(itertools.permutations(range(n)))
    powers = [d ** c for c in range(n + 1)]
    lam = falling_factorial(d, n)
    signs = {p: _sign(p) for p in perms}
    for rho in perms:
        inv = _inverse(rho)
        acc = Fraction(0)
        for pi in perms:
            comp = tuple(pi[inv[i]] for i in range(n))
            acc += signs[pi] * powers[_cycle_count(comp)]
        if acc != signs[rho] * lam:
            return False, lam
    return True, lam


def circle_integrality_check(d, n_max=6):
    """Verify the alternating-vector eigenvalue identity for n <= n_max and
    report the first n whose falling factorial goes negative (the witness
    that a fractional circle value breaks positive semidefiniteness)."""
    if n_max < 1 or n_max > 7:
        raise ValueError("supported for 1 <= n_max <= 7")
    d = Fraction(d)
    lams = []
    identity_ok = True
    first_violation = None
    for n in range(1, n_max + 1):
        ok, lam = circle_integrity_rows(d, n)
        identity_ok = identity_ok and ok
        lams.append(lam)
        if first_violation is None and lam < 0:
            first_violation = n
    return CircleValueReport(d=d, n_max=n_max, eigenvalues=tuple(lams),
                             identity_ok=identity_ok, first_violation=first_violation)


# ---------------------------------------------------------------------------
# Connection submatrices
# ---------------------------------------------------------------------------

PSD_TOL = 1e-8
RANK_TOL = 1e-8
SYMMETRY_TOL = 1e-12


@dataclass(frozen=True)
class ConnectionReport:
    k: int
    basis_size: int
    matrix: tuple
    min_eigenvalue: float
    numerical_rank: int
    rank_bound: int
    psd_pass: bool
    rank_pass: bool

    def to_json(self):
        return {
            "k": self.k,
            "basis_size": self.basis_size,
            "matrix": [list(row) for row in self.matrix],
            "min_eigenvalue": self.min_eigenvalue,
            "numerical_rank": self.numerical_rank,
            "rank_bound": self.rank_bound,
            "psd_pass": self.psd_pass,
            "rank_pass": self.rank_pass,
        }


def connection_submatrix(model, k, basis=None, method="enum"):
    """Evaluate the gluing form on a finite basis of graphs with k ends.

    Checks positive semidefiniteness (min eigenvalue >= -PSD_TOL * max|M|)
    and the rank bound: numerical rank <= d^k.
    """
    if basis is None:
        basis = matchings_basis(k)
    for g in basis:
        if g.k != k:
            raise ValueError(f"basis graph has {g.k} ends, expected {k}")
    size = len(basis)
    M = np.zeros((size, size))
    for i in range(size):
        for j in range(i, size):
            value = eval_graph(model, glue(basis[i], basis[j]), method=method)
            M[i, j] = M[j, i] = float(value)
    scale = float(np.max(np.abs(M))) if size else 0.0
    assert np.max(np.abs(M - M.T), initial=0.0) <= SYMMETRY_TOL
    if size:
        eigs = np.linalg.eigvalsh(M)
        min_eig = float(eigs[0])
        rank = int(np.sum(np.abs(eigs) > RANK_TOL * scale)) if scale else 0
    else:
        min_eig, rank = 0.0, 0
    bound = model.d ** k
    return ConnectionReport(
        k=k, basis_size=size, matrix=tuple(map(tuple, M.tolist())),
        min_eigenvalue=min_eig, numerical_rank=rank, rank_bound=bound,
        psd_pass=min_eig >= -PSD_TOL * max(scale, 1e-300),
        rank_pass=rank <= bound)


# ---------------------------------------------------------------------------
# Brauer diagrams
# ---------------------------------------------------------------------------

def _as_multiset(s):
    s = tuple(sorted(int(x) for x in s))
    if any(x < 1 for x in s):
        raise ValueError("multiset entries must be positive integers")
    return s


def _mu(s):
    return sum(s)


def _block_of(s):
    """Map node offset -> block index, for a sorted multiset."""
    out = []
    for b, size in enumerate(s):
        out.extend([b] * size)
    return out


@dataclass(frozen=True)
class MatchingDiagram:
    """A triple (S1, S2, M): a perfect matching M between the node sets
    O(S1) and O(S2), whose partitions have block sizes S1 and S2.

    Nodes are (side, offset) with side 0 for O(S1) and 1 for O(S2); the
    partition blocks are consecutive offset ranges of the sorted multiset,
    so equal multisets always present identical node sets.
    """

    s1: tuple
    s2: tuple
    pairs: tuple

    def __post_init__(self):
        s1, s2 = _as_multiset(self.s1), _as_multiset(self.s2)
        if (_mu(s1) + _mu(s2)) % 2:
            raise ValueError("total node count must be even")
        nodes = {(0, i) for i in range(_mu(s1))} | {(1, i) for i in range(_mu(s2))}
        covered = set()
        pairs = []
        for pair in self.pairs:
            a, b = pair
            a, b = tuple(a), tuple(b)
            if a == b or a not in nodes or b not in nodes:
                raise ValueError(f"bad matching pair {pair}")
            if a in covered or b in covered:
                raise ValueError("matching covers a node twice")
            covered.update((a, b))
            pairs.append(tuple(sorted((a, b))))
        if covered != nodes:
            raise ValueError("matching must cover every node exactly once")
        object.__setattr__(self, "s1", s1)
        object.__setattr__(self, "s2", s2)
        object.__setattr__(self, "pairs", tuple(sorted(pairs)))

    def transpose(self):
        flip = {0: 1, 1: 0}
        pairs = [((flip[sa], ia), (flip[sb], ib)) for ((sa, ia), (sb, ib)) in self.pairs]
        return MatchingDiagram(self.s2, self.s1, pairs)


def identity_diagram(s):
    """The through-strand diagram on (S, S): node i matched to node i."""
    s = _as_multiset(s)
    return MatchingDiagram(s, s, [((0, i), (1, i)) for i in range(_mu(s))])


def _diagram_product(x, y):
    """Resolve M1 union M2: paths become edges, cycles become a count.

    Returns (n_cycles, MatchingDiagram) or None when the middle multisets
    differ (the product is zero then).
    """
    if x.s2 != y.s1:
        return None
    edges = []
    for ((sa, ia), (sb, ib)) in x.pairs:
        edges.append((("L", ia) if sa == 0 else ("M", ia),
                      ("L", ib) if sb == 0 else ("M", ib)))
    for ((sa, ia), (sb, ib)) in y.pairs:
        edges.append((("M", ia) if sa == 0 else ("R", ia),
                      ("M", ib) if sb == 0 else ("R", ib)))
    incident = {}
    for eid, (a, b) in enumerate(edges):
        incident.setdefault(a, []).append(eid)
        incident.setdefault(b, []).append(eid)

    visited = [False] * len(edges)
    new_pairs = []
    terminals = sorted(node for node in incident if node[0] != "M")
    for start in terminals:
        eid = incident[start][0]
        if visited[eid]:
            continue
        node, cur = start, eid
        while True:
            visited[cur] = True
            a, b = edges[cur]
            node = b if a == node else a
            if node[0] != "M":
                break
            e1, e2 = incident[node]
            cur = e2 if e1 == cur else e1
        end = node
        side_a = (0, start[1]) if start[0] == "L" else (1, start[1])
        side_b = (0, end[1]) if end[0] == "L" else (1, end[1])
        new_pairs.append((side_a, side_b))

    cycles = 0
    for eid in range(len(edges)):
        if visited[eid]:
            continue
        cycles += 1
        node, cur = edges[eid][0], eid
        while not visited[cur]:
            visited[cur] = True
            a, b = edges[cur]
            node = b if a == node else a
            e1, e2 = incident[node]
            cur = e2 if e1 == cur else e1
    return cycles, MatchingDiagram(x.s1, y.s2, new_pairs)


class BrauerElement:
    """Formal rational combination of matching diagrams, with the circle
    parameter d carried along (exact, so fractional d stays exact)."""

    __slots__ = ("d", "terms")

    def __init__(self, d, terms=()):
        self.d = Fraction(d)
        merged = {}
        items = terms.items() if isinstance(terms, dict) else terms
        for diagram, coeff in items:
            coeff = Fraction(coeff)
            if coeff:
                merged[diagram] = merged.get(diagram, Fraction(0)) + coeff
        self.terms = {dg: c for dg, c in merged.items() if c != 0}

    @classmethod
    def from_diagram(cls, d, diagram, coeff=1):
        return cls(d, [(diagram, coeff)])

    def __add__(self, other):
        self._check(other)
        return BrauerElement(self.d, list(self.terms.items()) + list(other.terms.items()))

    def __sub__(self, other):
        return self + (-1) * other

    def __rmul__(self, scalar):
        return BrauerElement(self.d, [(dg, Fraction(scalar) * c)
                                      for dg, c in self.terms.items()])

    def __eq__(self, other):
        return isinstance(other, BrauerElement) and self.d == other.d \
            and self.terms == other.terms

    def _check(self, other):
        if self.d != other.d:
            raise ValueError(f"mixed circle parameters: {self.d} vs {other.d}")

    def __repr__(self):
        return f"BrauerElement(d={self.d}, {len(self.terms)} diagrams)"


def brauer_mul(a, b):
    """Bilinear diagram product; closed cycles contribute factors of d."""
    a._check(b)
    out = []
    for dx, cx in a.terms.items():
        for dy, cy in b.terms.items():
            res = _diagram_product(dx, dy)
            if res is None:
                continue
            cycles, diagram = res
            out.append((diagram, cx * cy * a.d ** cycles))
    return BrauerElement(a.d, out)


def brauer_transpose(a):
    return BrauerElement(a.d, [(dg.transpose(), c) for dg, c in a.terms.items()])


# ---------------------------------------------------------------------------
# The coloring representation omega
# ---------------------------------------------------------------------------

class OmegaMatrix:
    """Block matrix over colorings: one block per boundary pair (S1, S2),
    rows indexed by colorings of O(S1), columns by colorings of O(S2)."""

    __slots__ = ("d", "blocks")

    def __init__(self, d, blocks=None):
        self.d = int(d)
        self.blocks = {}
        for key, arr in (blocks or {}).items():
            if np.any(arr != 0):
                self.blocks[key] = arr

    def __matmul__(self, other):
        if self.d != other.d:
            raise ValueError("mixed color counts")
        blocks = {}
        for (s1, s2), A in self.blocks.items():
            for (s3, s4), B in other.blocks.items():
                if s2 != s3:
                    continue
                C = np.dot(A, B)
                key = (s1, s4)
                blocks[key] = blocks.get(key, 0) + C
        return OmegaMatrix(self.d, blocks)

    @property
    def T(self):
        return OmegaMatrix(self.d, {(s2, s1): arr.T
                                    for (s1, s2), arr in self.blocks.items()})

    def __eq__(self, other):
        if not isinstance(other, OmegaMatrix) or self.d != other.d:
            return NotImplemented
        if set(self.blocks) != set(other.blocks):
            return False
        return all(bool(np.all(self.blocks[k] == other.blocks[k]))
                   for k in self.blocks)


def _diagram_block(diagram, d):
    """0/1 compatibility matrix of one diagram: entry 1 iff every matching
    edge joins equal colors under (row coloring, column coloring)."""
    mu1, mu2 = _mu(diagram.s1), _mu(diagram.s2)
    rows = list(itertools.product(range(d), repeat=mu1))
    cols = list(itertools.product(range(d), repeat=mu2))
    ll, rr, lr = [], [], []
    for ((sa, ia), (sb, ib)) in diagram.pairs:
        if sa == 0 and sb == 0:
            ll.append((ia, ib))
        elif sa == 1 and sb == 1:
            rr.append((ia, ib))
        else:
            (li, ri) = (ia, ib) if sa == 0 else (ib, ia)
            lr.append((li, ri))
    arr = np.zeros((len(rows), len(cols)), dtype=np.int64)
    for ri, row in enumerate(rows):
        if any(row[i] != row[j] for (i, j) in ll):
            continue
        for ci, col in enumerate(cols):
            if any(col[i] != col[j] for (i, j) in rr):
                continue
            if all(row[i] == col[j] for (i, j) in lr):
                arr[ri, ci] = 1
    return arr


def brauer_omega(a, d=None):
    """The matrix representation omega; an algebra homomorphism with
    omega(b^T) = omega(b)^T.  Needs an integer color count."""
    if d is None:
        if a.d.denominator != 1:
            raise ValueError("omega needs an integer color count")
        d = int(a.d)
    d = int(d)
    if d < 1:
        raise ValueError("omega needs d >= 1")
    if a.d != d:
        raise ValueError(f"element has circle parameter {a.d}, omega got d={d}")
    for diagram in a.terms:
        if max(_mu(diagram.s1), _mu(diagram.s2)) > 8:
            raise ValueError("omega capped at boundary size 8")
    exact_int = all(c.denominator == 1 for c in a.terms.values())
    blocks = {}
    for diagram, coeff in a.terms.items():
        key = (diagram.s1, diagram.s2)
        block = _diagram_block(diagram, d)
        if exact_int:
            contrib = int(coeff) * block
        else:
            contrib = np.array([[coeff * int(x) for x in row] for row in block],
                               dtype=object)
        if key in blocks:
            blocks[key] = blocks[key] + contrib
        else:
            blocks[key] = contrib
    return OmegaMatrix(d, blocks)


# ---------------------------------------------------------------------------
# The tau maps into (quantum) graphs
# ---------------------------------------------------------------------------

def _tau_graph(diagram):
    block1 = _block_of(diagram.s1)
    block2 = _block_of(diagram.s2)
    n1 = len(diagram.s1)

    def vmap(node):
        side, i = node
        return block1[i] if side == 0 else n1 + block2[i]

    edges = [(vmap(a), vmap(b)) for (a, b) in diagram.pairs]
    return OpenGraph(n1 + len(diagram.s2), tuple(edges))


def brauer_tau(a):
    """Contract both boundary partitions to vertices; matching edges become
    graph edges (loops when both ends fall in one block)."""
    return QuantumGraph([(c, _tau_graph(dg)) for dg, c in a.terms.items()])


def _tau_open_graph(diagram, contract_side):
    s_contract = diagram.s1 if contract_side == 0 else diagram.s2
    block = _block_of(s_contract)
    open_side = 1 - contract_side
    edges, vertex_ends, bare_edges = [], [], []
    for (a, b) in diagram.pairs:
        (sa, ia), (sb, ib) = a, b
        if sa == contract_side and sb == contract_side:
            edges.append((block[ia], block[ib]))
        elif sa == open_side and sb == open_side:
            bare_edges.append((ia + 1, ib + 1))
        else:
            (ci, oi) = (ia, ib) if sa == contract_side else (ib, ia)
            vertex_ends.append((oi + 1, block[ci]))
    return OpenGraph(len(s_contract), tuple(edges), 0,
                     tuple(vertex_ends), tuple(bare_edges))


def _tau_partial(a, contract_side, shared_index):
    shared = None
    out = []
    for diagram, coeff in a.terms.items():
        boundary = (diagram.s1, diagram.s2)[shared_index]
        if shared is None:
            shared = boundary
        elif boundary != shared:
            raise ValueError("all terms must share the open boundary multiset")
        out.append((coeff, _tau_open_graph(diagram, contract_side)))
    return QuantumGraph(out)


def brauer_tau1(a):
    """Contract P(S1) only; O(S2) becomes open ends labeled by node order.
    Defined on elements whose terms share the second boundary multiset."""
    return _tau_partial(a, contract_side=0, shared_index=1)


def brauer_tau2(a):
    """Mirror of tau1: contract P(S2), O(S1) becomes the open ends."""
    return _tau_partial(a, contract_side=1, shared_index=0)


# ---------------------------------------------------------------------------
# Positivity of f(tau(b b^T))
# ---------------------------------------------------------------------------

POSITIVITY_TOL = 1e-9


@dataclass(frozen=True)
class PositivityReport:
    value: object
    scale: float
    passed: bool

    def to_json(self):
        return {"value": float(self.value), "scale": self.scale, "pass": self.passed}


def brauer_positivity_check(b, model):
    """Evaluate model on tau(b b^T); must be >= -POSITIVITY_TOL * scale."""
    if b.d.denominator != 1 or int(b.d) != model.d:
        raise ValueError(
            f"element circle parameter {b.d} must equal the model's color count {model.d}")
    q = brauer_tau(brauer_mul(b, brauer_transpose(b)))
    value = eval_enum(model, OpenGraph(0)) * 0  # zero in the model's backend
    scale = 1.0
    for (coeff, graph) in q.terms:
        term = eval_enum(model, graph)
        value = value + coeff * term
        scale += abs(float(coeff)) * abs(float(term))
    return PositivityReport(value=value, scale=scale,
                            passed=float(value) >= -POSITIVITY_TOL * scale)
