"""Edge coloring models, the combinatorial model zoo, and vertex coloring
models with their conversion to (complex) edge coloring models.

A model assigns a weight to every count vector v in N^d; a graph's value
sums, over all edge colorings, the product of per-vertex weights of the
incident color counts.  Scalar backends (exact rational, real double,
complex double) are fixed per model and never silently mixed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

RATIONAL = "rational"
REAL = "real"
COMPLEX = "complex"
_BACKENDS = (RATIONAL, REAL, COMPLEX)


class ModelParseError(ValueError):
    pass


def zero_scalar(backend):
    return {RATIONAL: Fraction(0), REAL: 0.0, COMPLEX: 0j}[backend]


def one_scalar(backend):
    return {RATIONAL: Fraction(1), REAL: 1.0, COMPLEX: 1 + 0j}[backend]


def scalar_from_int(backend, n):
    return {RATIONAL: Fraction(n), REAL: float(n), COMPLEX: complex(n)}[backend]


def coerce_scalar(backend, value):
    """Normalize a stored weight to the model's backend type."""
    if backend == RATIONAL:
        if isinstance(value, float):
            raise ValueError("rational backend cannot hold floats; use Fraction")
        return Fraction(value)
    if backend == REAL:
        if isinstance(value, complex):
            raise ValueError("real backend cannot hold complex values")
        return float(value)
    return complex(value)


class HeightCapError(ValueError):
    """Weight requested above the height up to which a model is defined."""


@dataclass(frozen=True)
class Rule:
    """Named closed-form weight rule, for models with infinite support."""
    name: str
    fn: object
    params: tuple = ()

    def __call__(self, cv):
        return self.fn(cv)


@dataclass(frozen=True)
class EdgeModel:
    """Weight function t: N^d -> scalars with a fixed scalar backend.

    Lookup precedence: explicit table entry, then the closed-form rule,
    then the default.  `height_cap`, when set, bounds the heights at which
    the model is defined at all (used by rotated models).
    """

    d: int
    backend: str
    table: dict = field(default_factory=dict)
    rule: Rule | None = None
    default: object = None
    max_arity_hint: int | None = None
    height_cap: int | None = None
    name: str = "model"

    def __post_init__(self):
        if self.d < 0:
            raise ValueError("color count must be nonnegative")
        if self.backend not in _BACKENDS:
            raise ValueError(f"unknown scalar backend {self.backend!r}")
        table = {}
        for cv, value in self.table.items():
            cv = tuple(int(c) for c in cv)
            if len(cv) != self.d:
                raise ValueError(f"table key {cv} has length {len(cv)}, expected {self.d}")
            table[cv] = coerce_scalar(self.backend, value)
        object.__setattr__(self, "table", table)
        default = self.default
        if default is not None:
            default = coerce_scalar(self.backend, default)
        object.__setattr__(self, "default", default)

    def weight(self, cv):
        cv = tuple(cv)
        if len(cv) != self.d:
            raise ValueError(f"count vector {cv} has length {len(cv)}, expected d={self.d}")
        if self.height_cap is not None and sum(cv) > self.height_cap:
            raise HeightCapError(
                f"model {self.name!r} is only defined up to height {self.height_cap}")
        hit = self.table.get(cv)
        if hit is not None:
            return hit
        if self.rule is not None:
            return coerce_scalar(self.backend, self.rule(cv))
        if self.default is not None:
            return self.default
        raise KeyError(f"no weight for count vector {cv} in model {self.name!r}")

    def zero(self):
        return zero_scalar(self.backend)

    def one(self):
        return one_scalar(self.backend)


# ---------------------------------------------------------------------------
# The model zoo
# ---------------------------------------------------------------------------

_ONE, _NIL = Fraction(1), Fraction(0)


def _indicator(pred):
    return lambda cv: _ONE if pred(cv) else _NIL


_ZOO_BUILDERS = {}


def _zoo(name, d, needs_param=False):
    def wrap(builder):
        _ZOO_BUILDERS[name] = (builder, d, needs_param)
        return builder
    return wrap


@_zoo("perfect_matchings", 2)
def _pm(_):
    return _indicator(lambda v: v[0] == 1)


@_zoo("fully_packed_loops", 2)
def _fpl(_):
    return _indicator(lambda v: v[0] == 2)


@_zoo("matchings", 2)
def _matchings(_):
    return _indicator(lambda v: v[0] <= 1)


@_zoo("loop_configs", 2)
def _loops(_):
    return _indicator(lambda v: v[0] in (0, 2))


@_zoo("d_regular_subgraphs", 2, needs_param=True)
def _dreg(r):
    return _indicator(lambda v: v[0] in (0, r))


@_zoo("proper_edge_colorings", None, needs_param=True)
def _proper(_):
    return _indicator(lambda v: all(c <= 1 for c in v))


@_zoo("nowhere_zero_4_flows", 3)
def _flows(_):
    # colors are the nonzero elements (1,0), (0,1), (1,1) of Z2 x Z2
    return _indicator(lambda v: (v[0] + v[2]) % 2 == 0 and (v[1] + v[2]) % 2 == 0)


@_zoo("permanent", 4)
def _permanent(_):
    return _indicator(lambda v: v[:3] in ((2, 0, 0), (0, 2, 0), (0, 0, 1)))


@_zoo("pm_rotated_scaled", 2)
def _pm_rot(_):
    # the 45-degree-rotated perfect matching model, scaled by sqrt(2)^(a+b)
    return lambda v: Fraction(v[0] - v[1])


def zoo_names():
    return sorted(_ZOO_BUILDERS)


def make_zoo_model(kind, param=None):
    """Build one of the combinatorial indicator models by name."""
    if kind not in _ZOO_BUILDERS:
        raise ValueError(f"unknown zoo model {kind!r}; known: {', '.join(zoo_names())}")
    builder, d, needs_param = _ZOO_BUILDERS[kind]
    if needs_param:
        if param is None or int(param) < 1:
            raise ValueError(f"zoo model {kind!r} needs a positive integer parameter")
        param = int(param)
    elif param is not None:
        raise ValueError(f"zoo model {kind!r} takes no parameter")
    if d is None:
        d = param  # proper edge colorings use one color per crayon
    return EdgeModel(
        d=d, backend=RATIONAL, rule=Rule(kind, builder(param), (param,) if needs_param else ()),
        name=kind if param is None else f"{kind}({param})")


def ising_edge_model(a, b):
    """The d=2 real edge coloring model of the Ising vertex model.

    t(s1, s2) = 2 ((a+b)/2)^(s1/2) ((a-b)/2)^(s2/2) for even s2, else 0.
    """
    a, b = float(a), float(b)
    if a < 0 or b < 0:
        raise ValueError("Ising weights must be nonnegative")

    def fn(v):
        s1, s2 = v
        if s2 % 2:
            return 0.0
        return 2.0 * ((a + b) / 2.0) ** (s1 / 2.0) * ((a - b) / 2.0) ** (s2 // 2)

    return EdgeModel(d=2, backend=REAL, rule=Rule("ising", fn, (a, b)),
                     name=f"ising({a},{b})")


# ---------------------------------------------------------------------------
# Vertex coloring models
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class VertexModel:
    """Weighted graph H: positive vertex weights alpha, symmetric real edge
    weights beta."""

    n: int
    alpha: tuple
    beta: tuple

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        beta = tuple(tuple(float(x) for x in row) for row in self.beta)
        if len(alpha) != self.n or len(beta) != self.n or any(len(r) != self.n for r in beta):
            raise ValueError("alpha/beta dimensions must match n")
        if any(a <= 0 for a in alpha):
            raise ValueError("vertex weights must be strictly positive")
        for i in range(self.n):
            for j in range(self.n):
                if beta[i][j] != beta[j][i]:
                    raise ValueError("beta must be symmetric")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)


def ising_vertex_model(a, b):
    return VertexModel(2, (1.0, 1.0), ((a, b), (b, a)))


def hom_partition(graph, H):
    """Weighted homomorphism count hom(G, H) for simple closed G."""
    if not graph.is_simple:
        raise ValueError("hom is defined for simple closed graphs")
    n, total = H.n, 0.0
    import itertools
    for phi in itertools.product(range(n), repeat=graph.n_vertices):
        w = 1.0
        for v in range(graph.n_vertices):
            w *= H.alpha[phi[v]]
        for (u, v) in graph.edges:
            w *= H.beta[phi[u]][phi[v]]
            if w == 0.0:
                break
        total += w
    return total


def vertex_to_edge(H, rank_tol_factor=1e-10):
    """Convert a vertex coloring model into a complex edge coloring model.

    Decomposes beta = sum_i lambda_i u_i u_i^T with lambda_i = +-1 (small
    eigenvalues dropped by rank_tol = rank_tol_factor * max|beta|) and sets
    t(s_1..s_r) = sum_j alpha(j) prod_i (u_i(j) sqrt(lambda_i))^{s_i}.
    Retained eigenvalues are ordered decreasingly and each eigenvector's
    largest-magnitude entry is made positive, so the result is deterministic.
    """
    B = np.array(H.beta, dtype=float)
    if H.n == 0:
        return EdgeModel(d=0, backend=COMPLEX, table={(): 0j}, name="vertex_to_edge(empty)")
    scale = float(np.max(np.abs(B)))
    if scale == 0.0:
        alpha_sum = complex(sum(H.alpha))
        return EdgeModel(d=0, backend=COMPLEX, table={(): alpha_sum},
                         name="vertex_to_edge(zero)")
    mu, Q = np.linalg.eigh(B)
    rank_tol = rank_tol_factor * scale
    keep = [i for i in range(H.n) if abs(mu[i]) >= rank_tol]
    keep.sort(key=lambda i: -mu[i])
    r = len(keep)
    U = np.empty((H.n, r))
    signs = []
    for col, i in enumerate(keep):
        vec = Q[:, i].copy()
        pivot = int(np.argmax(np.abs(vec)))
        if vec[pivot] < 0:
            vec = -vec
        U[:, col] = vec * math.sqrt(abs(mu[i]))
        signs.append(1 if mu[i] > 0 else -1)
    roots = [1 + 0j if s > 0 else 1j for s in signs]
    alpha = tuple(H.alpha)

    def fn(cv):
        total = 0j
        for j in range(len(alpha)):
            term = complex(alpha[j])
            for i, s in enumerate(cv):
                if s:
                    term *= (U[j, i] * roots[i]) ** s
            total += term
        return total

    params = (tuple(signs), tuple(map(tuple, U.tolist())), alpha)
    return EdgeModel(d=r, backend=COMPLEX, rule=Rule("vertex_to_edge", fn, params),
                     name="vertex_to_edge", max_arity_hint=None)


# ---------------------------------------------------------------------------
# File formats
# ---------------------------------------------------------------------------

def _parse_value(text, backend):
    try:
        if backend == RATIONAL:
            return Fraction(text)
        if backend == REAL:
            return float(text)
        return complex(text)
    except (ValueError, ZeroDivisionError):
        raise ModelParseError(f"bad {backend} value {text!r}") from None


def _render_value(value, backend):
    if backend == RATIONAL:
        return str(value)
    if backend == REAL:
        return repr(float(value))
    z = complex(value)
    return f"{z.real!r}{z.imag:+}j"


def parse_model(text):
    """Parse the edge-model file format (see README)."""
    name = "model"
    d = None
    backend = None
    default = None
    rows = []
    builtin = None

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        kind = parts[0]
        try:
            if kind == "model":
                name = parts[1]
            elif kind == "colors":
                d = int(parts[1])
            elif kind == "scalar":
                if parts[1] not in _BACKENDS:
                    raise ModelParseError(f"line {lineno}: unknown scalar kind {parts[1]!r}")
                backend = parts[1]
            elif kind == "default":
                default = parts[1]
            elif kind == "w":
                eq = parts.index("=")
                rows.append((lineno, parts[1:eq], parts[eq + 1]))
            elif kind == "builtin":
                builtin = (parts[1], int(parts[2]) if len(parts) > 2 else None)
            else:
                raise ModelParseError(f"line {lineno}: unknown directive {kind!r}")
        except ModelParseError:
            raise
        except (IndexError, ValueError):
            raise ModelParseError(f"line {lineno}: malformed line {line!r}") from None

    if builtin is not None:
        model = make_zoo_model(*builtin)
        return EdgeModel(d=model.d, backend=model.backend, table=model.table,
                         rule=model.rule, default=model.default, name=name)
    if d is None:
        raise ModelParseError("missing 'colors' line")
    backend = backend or RATIONAL
    table = {}
    for lineno, coords, value in rows:
        if len(coords) != d:
            raise ModelParseError(f"line {lineno}: expected {d} coordinates")
        cv = tuple(int(c) for c in coords)
        table[cv] = _parse_value(value, backend)
    default_value = _parse_value(default, backend) if default is not None else zero_scalar(backend)
    return EdgeModel(d=d, backend=backend, table=table, default=default_value, name=name)


def model_to_text(model, max_height=None):
    """Serialize a model; rule-based models are tabulated up to max_height."""
    lines = [f"model {model.name}", f"colors {model.d}", f"scalar {model.backend}"]
    if model.rule is not None and model.rule.name in _ZOO_BUILDERS and max_height is None:
        param = model.rule.params[0] if model.rule.params else None
        lines.append(f"builtin {model.rule.name}" + (f" {param}" if param else ""))
        return "\n".join(lines) + "\n"
    default = model.default if model.default is not None else zero_scalar(model.backend)
    lines.append(f"default {_render_value(default, model.backend)}")
    entries = dict(model.table)
    if model.rule is not None:
        if max_height is None:
            raise ValueError("rule-based model needs max_height to serialize")
        lines.insert(0, f"# weights tabulated up to height {max_height}")
        for cv in count_vectors_up_to(model.d, max_height):
            entries[cv] = model.weight(cv)
    for cv in sorted(entries):
        value = entries[cv]
        if value != default:
            coords = " ".join(str(c) for c in cv)
            lines.append(f"w {coords} = {_render_value(value, model.backend)}")
    return "\n".join(lines) + "\n"


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())


def parse_vertex_model(text):
    """Parse the vertex-model file format (see README)."""
    name = "vertexmodel"
    n = None
    alpha = None
    beta_rows = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0] == "vertexmodel":
                name = parts[1]
            elif parts[0] == "nodes":
                n = int(parts[1])
            elif parts[0] == "alpha":
                alpha = [float(x) for x in parts[1:]]
            elif parts[0] == "beta":
                beta_rows.append((int(parts[1]), int(parts[2]), float(parts[3])))
            else:
                raise ModelParseError(f"line {lineno}: unknown directive {parts[0]!r}")
        except ModelParseError:
            raise
        except (IndexError, ValueError):
            raise ModelParseError(f"line {lineno}: malformed line {line!r}") from None
    if n is None:
        raise ModelParseError("missing 'nodes' line")
    if alpha is None:
        alpha = [1.0] * n
    beta = [[0.0] * n for _ in range(n)]
    for (i, j, x) in beta_rows:
        if not (0 <= i < n and 0 <= j < n):
            raise ModelParseError(f"beta index ({i},{j}) out of range")
        beta[i][j] = beta[j][i] = x
    return VertexModel(n, tuple(alpha), tuple(tuple(r) for r in beta)), name


def load_vertex_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_vertex_model(fh.read())


# ---------------------------------------------------------------------------

def count_vectors(d, n):
    """All count vectors of length d with height exactly n, lexicographic."""
    if d == 0:
        if n == 0:
            yield ()
        return
    if d == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in count_vectors(d - 1, n - first):
            yield (first,) + rest


def count_vectors_up_to(d, n_max):
    for n in range(n_max + 1):
        yield from count_vectors(d, n)
