"""The orthogonal-group action on edge coloring models.

A d x d orthogonal matrix alpha acts on a model t through its symmetric
multilinear forms: the arity-n form is re-read in the rotated basis
c_i^alpha = sum_k alpha[k, i] c_k, giving a new model t^alpha with the same
partition function on every graph.  With this column convention the action
is a right action: rotating by alpha then beta equals rotating by
alpha @ beta.
"""

from __future__ import annotations

import itertools
import math
import random

import numpy as np

from . import models as _models
from .evaluate import ContractionCapError, eval_enum, eval_tensor
from .models import EdgeModel, count_vectors, count_vectors_up_to

ORTHO_TOL = 1e-12
DEFAULT_N_MAX = 8


class OrthogonalMatrix:
    """A real d x d matrix verified orthogonal to ORTHO_TOL at construction."""

    __slots__ = ("matrix",)

    def __init__(self, matrix):
        A = np.array(matrix, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise ValueError("orthogonal matrix must be square")
        err = np.max(np.abs(A.T @ A - np.eye(A.shape[0])))
        if err > ORTHO_TOL:
            raise ValueError(f"matrix is not orthogonal (|A^T A - I| = {err:.3g})")
        self.matrix = A
        A.setflags(write=False)

    @property
    def d(self):
        return self.matrix.shape[0]

    def inverse(self):
        return OrthogonalMatrix(self.matrix.T)

    def compose(self, other):
        """The rotation 'self then other' under the right action."""
        return OrthogonalMatrix(self.matrix @ other.matrix)

    def __repr__(self):
        return f"OrthogonalMatrix(d={self.d})"


def rotation_2d(theta):
    c, s = math.cos(theta), math.sin(theta)
    return OrthogonalMatrix([[c, -s], [s, c]])


def random_orthogonal(d, seed):
    """Product of d(d-1)/2 seeded Givens rotations times a random sign
    diagonal; bitwise deterministic per seed."""
    if d < 1:
        raise ValueError("need d >= 1")
    rng = random.Random(seed)
    A = np.eye(d)
    for i in range(d):
        for j in range(i + 1, d):
            theta = rng.uniform(0.0, 2.0 * math.pi)
            c, s = math.cos(theta), math.sin(theta)
            G = np.eye(d)
            G[i, i] = c
            G[j, j] = c
            G[i, j] = -s
            G[j, i] = s
            A = G @ A
    signs = np.array([rng.choice((-1.0, 1.0)) for _ in range(d)])
    return OrthogonalMatrix(A * signs)


def _arity_tensor(model, n):
    """Dense symmetric form l_n of the model, as a float tensor."""
    d = model.d
    arr = np.empty((d,) * n)
    cache = {}
    for idx in itertools.product(range(d), repeat=n):
        key = tuple(sorted(idx))
        w = cache.get(key)
        if w is None:
            counts = [0] * d
            for c in idx:
                counts[c] += 1
            w = float(model.weight(tuple(counts)))
            cache[key] = w
        arr[idx] = w
    return arr


def rotate_model(model, alpha, n_max=DEFAULT_N_MAX):
    """The rotated model t^alpha, defined on heights up to n_max.

    Rational weights are converted to doubles here: rotation introduces
    irrational entries, so exactness is surrendered on purpose.  Looking up
    a weight above n_max raises; evaluate only on graphs whose degrees fit.
    """
    if model.backend not in (_models.RATIONAL, _models.REAL):
        raise ValueError("only rational- or real-valued models can be rotated")
    if alpha.d != model.d:
        raise ValueError(f"matrix is {alpha.d}x{alpha.d} but the model has d={model.d}")
    d = model.d
    A = alpha.matrix
    table = {}
    for n in range(n_max + 1):
        if d == 0:
            if n == 0:
                table[()] = float(model.weight(()))
            continue
        T = _arity_tensor(model, n)
        for _ in range(n):
            # rotate one slot: T'[..., j] = sum_k T[k, ...] A[k, j]
            T = np.tensordot(T, A, axes=([0], [0]))
        for cv in count_vectors(d, n):
            rep = tuple(c for c, mult in enumerate(cv) for _ in range(mult))
            table[cv] = float(T[rep]) if n else float(T)
    return EdgeModel(d=d, backend=_models.REAL, table=table, height_cap=n_max,
                     name=f"{model.name}^alpha")


def rotate_universal_variable(d, alpha, cv):
    """Expansion of x_v^alpha over the variables, as a dict cv -> float.

    Used to check that the induced action on the polynomial ring maps a
    variable of height n into the span of height-n variables only.
    """
    if len(cv) != d:
        raise ValueError("count vector length must equal d")
    A = alpha.matrix
    rep = tuple(c for c, mult in enumerate(cv) for _ in range(mult))
    n = len(rep)
    out = {}
    for ks in itertools.product(range(d), repeat=n):
        coeff = 1.0
        for slot, k in enumerate(ks):
            coeff *= A[k, rep[slot]]
        counts = [0] * d
        for k in ks:
            counts[k] += 1
        key = tuple(counts)
        out[key] = out.get(key, 0.0) + coeff
    return {k: v for k, v in out.items() if v != 0.0}


def _eval_float(model, graph):
    try:
        value = eval_tensor(model, graph)
    except ContractionCapError:
        value = eval_enum(model, graph)
    return float(value)


def check_invariance(model, graph, trials, seed, tol=1e-8, n_max_cap=DEFAULT_N_MAX):
    """Compare eval(t^alpha, G) with eval(t, G) over seeded random rotations.

    Returns a JSON-ready report; passes iff the maximum relative deviation
    (measured against max(1, |t(G)|)) stays within tol.
    """
    if not graph.is_closed:
        raise ValueError("invariance check needs a closed graph")
    n_max = graph.max_degree
    if n_max > n_max_cap:
        raise ValueError(f"max degree {n_max} exceeds the rotation cap {n_max_cap}")
    base = _eval_float(model, graph)
    max_abs = 0.0
    for trial in range(trials):
        alpha = random_orthogonal(model.d, seed + trial)
        rotated = rotate_model(model, alpha, n_max=n_max)
        value = _eval_float(rotated, graph)
        max_abs = max(max_abs, abs(value - base))
    max_rel = max_abs / max(1.0, abs(base))
    return {
        "model": model.name,
        "value": base,
        "trials": trials,
        "seed": seed,
        "max_abs_dev": max_abs,
        "max_rel_dev": max_rel,
        "pass": max_rel <= tol,
    }
