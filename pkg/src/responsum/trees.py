"""Diagrammatic oracle for the series coefficients.

Each coefficient ``u^(k)_nu`` is a sum over labelled rooted trees with ``k``
nodes. Trees are planar: the children of a node are ordered, and two trees are
the same only if they coincide together with that order. The canonical form
of a topology is therefore the nested tuple of its children, e.g. ``((), ())``
is a root with two end nodes.

Two families are supported.

``theorem1``
    internal nodes have at least two children and carry mode 0; end nodes
    carry a forcing mode (factor ``eps f_nu``) or mode 0 (factor ``zeta``);
    internal nodes carry ``-eps G_p``.
``theorem2``
    internal nodes may have a single child; every node carries a mode. Unary
    nodes need a nonzero mode. Internal nodes carry ``-eps H_{p,nu}``, end
    nodes ``-eps h_nu(c)`` or ``zeta``.

Lines exiting internal nodes must carry nonzero momentum; a line with zero
momentum (from a ``zeta`` end node) has the identity as propagator, all
others ``D^-1(eps, omega . nu_l)``.

This module is a brute-force test fixture, not a solver.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import OrderTooLarge
from .model import SystemSpec, TaylorTensors
from .propagator import apply_D_inverse, assemble_D

THEOREM1 = "theorem1"
THEOREM2 = "theorem2"
FAMILIES = (THEOREM1, THEOREM2)
CEILING = {THEOREM1: 6, THEOREM2: 5}


def _compositions(n: int, parts: int):
    """Ordered tuples of ``parts`` positive ints summing to ``n``."""
    if parts == 1:
        yield (n,)
        return
    for first in range(1, n - parts + 2):
        for rest in _compositions(n - first, parts - 1):
            yield (first,) + rest


@lru_cache(maxsize=None)
def _shapes(k: int, min_arity: int) -> tuple:
    if k == 1:
        return ((),)
    out = []
    for p in range(min_arity, k):
        for comp in _compositions(k - 1, p):
            for kids in itertools.product(*(_shapes(c, min_arity) for c in comp)):
                out.append(tuple(kids))
    return tuple(sorted(out, key=repr))


@dataclass(frozen=True)
class TreeTopology:
    """Rooted planar tree in pre-order.

    ``parent[v]`` is the parent of node ``v`` (``-1`` for the root, node 0);
    ``children[v]`` lists the children of ``v`` in order.
    """

    shape: tuple
    parent: tuple
    children: tuple

    @classmethod
    def from_shape(cls, shape) -> "TreeTopology":
        parent, children = [], []

        def visit(node, par):
            v = len(parent)
            parent.append(par)
            children.append([])
            if par >= 0:
                children[par].append(v)
            for child in node:
                visit(child, v)

        visit(shape, -1)
        return cls(shape=shape, parent=tuple(parent), children=tuple(tuple(c) for c in children))

    @property
    def order(self) -> int:
        return len(self.parent)

    def arity(self, v: int) -> int:
        return len(self.children[v])

    @property
    def end_nodes(self) -> list[int]:
        return [v for v in range(self.order) if not self.children[v]]

    @property
    def internal_nodes(self) -> list[int]:
        return [v for v in range(self.order) if self.children[v]]

    @property
    def unary_nodes(self) -> list[int]:
        return [v for v in range(self.order) if len(self.children[v]) == 1]


def enumerate_topologies(k: int, family: str = THEOREM1) -> list[TreeTopology]:
    """All planar rooted trees with ``k`` nodes allowed in ``family``.

    Raises
    ------
    OrderTooLarge
        beyond ``k = 6`` (theorem1) or ``k = 5`` (theorem2).
    """
    if family not in FAMILIES:
        raise ValueError(f"family must be one of {FAMILIES}")
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > CEILING[family]:
        raise OrderTooLarge(f"tree enumeration is capped at k = {CEILING[family]} for {family}")
    min_arity = 2 if family == THEOREM1 else 1
    return [TreeTopology.from_shape(s) for s in _shapes(k, min_arity)]


@dataclass(frozen=True)
class LabelledTree:
    """Topology plus node modes and line momenta.

    ``modes[v]`` is the mode label of node ``v``; ``momenta[v]`` the momentum
    of the line exiting ``v`` (sum of the modes in the subtree of ``v``).
    """

    topology: TreeTopology
    modes: tuple
    momenta: tuple
    family: str

    @property
    def order(self) -> int:
        return self.topology.order

    @property
    def root_momentum(self) -> tuple:
        return self.momenta[0]

    def is_zeta_node(self, v: int) -> bool:
        return not self.topology.children[v] and not any(self.modes[v])


def _momenta(top: TreeTopology, modes) -> tuple:
    mom = [None] * top.order
    for v in reversed(range(top.order)):  # children follow parents in pre-order
        tot = list(modes[v])
        for c in top.children[v]:
            tot = [a + b for a, b in zip(tot, mom[c])]
        mom[v] = tuple(tot)
    return tuple(mom)


def enumerate_labelled(topology: TreeTopology, mode_support, zeta_allowed: bool = True,
                       family: str = THEOREM1, internal_support=None) -> list[LabelledTree]:
    """All admissible labellings of ``topology``.

    ``mode_support`` lists the nonzero end-node modes (forcing support);
    mode 0 on an end node (a ``zeta`` node) is added when ``zeta_allowed``.
    For the theorem2 family, ``internal_support`` lists the internal-node
    modes (the potential's support, zero included); unary nodes skip 0.
    """
    support = sorted({tuple(int(n) for n in nu) for nu in mode_support if any(nu)})
    if not support and not zeta_allowed:
        return []
    d = len(support[0]) if support else len(next(iter(internal_support or [(0,)])))
    zero = (0,) * d
    end_labels = support + ([zero] if zeta_allowed else [])
    if family == THEOREM2:
        internal = sorted({tuple(int(n) for n in nu) for nu in (internal_support or [zero])})
    else:
        internal = [zero]
    choices = []
    for v in range(topology.order):
        arity = topology.arity(v)
        if arity == 0:
            choices.append(end_labels)
        elif arity == 1:
            choices.append([nu for nu in internal if any(nu)])
        else:
            choices.append(internal)
    out = []
    for modes in itertools.product(*choices):
        mom = _momenta(topology, modes)
        if any(not any(mom[v]) for v in topology.internal_nodes):
            continue
        out.append(LabelledTree(topology=topology, modes=tuple(modes), momenta=mom, family=family))
    return out


# ---------------------------------------------------------------------------
# values


class _Factors:
    """Node factors and propagators for one system and ``eps``."""

    def __init__(self, eps, zeta, tensors: TaylorTensors, spec: SystemSpec):
        self.eps, self.spec, self.tensors = float(eps), spec, tensors
        self.zeta = np.asarray(zeta, dtype=complex).reshape(spec.m)
        self.A = tensors.A

    def propagate(self, nu, vec):
        if not any(nu):
            return vec
        s = float(np.dot(self.spec.omega, nu))
        D = assemble_D(self.eps, s, self.spec.damping, self.A, self.spec.mass)
        return apply_D_inverse(D, vec)

    def end_factor(self, nu):
        if not any(nu):
            return self.zeta
        if self.spec.is_forced:
            return -self.eps * self.tensors.get(0, nu).astype(complex)
        return self.eps * self.spec.forcing[nu]

    def internal_tensor(self, p, nu):
        if self.spec.is_forced:
            return -self.eps * self.tensors.get(p, nu)
        return -self.eps * self.tensors.get(p)


def _contract(T, vecs):
    """``out_i = sum T[i, i1..ip] prod_j vecs[j][i_j]`` by explicit loops."""
    m = T.shape[0]
    out = np.zeros(m, dtype=complex)
    for i in range(m):
        acc = 0.0
        for idx in itertools.product(range(m), repeat=len(vecs)):
            term = T[(i,) + idx]
            if term == 0:
                continue
            for vec, j in zip(vecs, idx):
                term = term * vec[j]
            acc = acc + term
        out[i] = acc
    return out


def _line_value(tree: LabelledTree, v: int, fac: _Factors):
    top = tree.topology
    kids = top.children[v]
    if not kids:
        vec = fac.end_factor(tree.modes[v])
    else:
        T = fac.internal_tensor(len(kids), tree.modes[v])
        vec = _contract(T, [_line_value(tree, c, fac) for c in kids])
    return fac.propagate(tree.momenta[v], vec)


def tree_value(tree: LabelledTree, eps, zeta, tensors: TaylorTensors, spec: SystemSpec) -> np.ndarray:
    """Value of the tree: product of node factors and propagators, contracted."""
    return _line_value(tree, 0, _Factors(eps, zeta, tensors, spec))


def family_of(spec: SystemSpec) -> str:
    return THEOREM2 if spec.is_forced else THEOREM1


def label_supports(spec: SystemSpec, tensors: TaylorTensors):
    """End-node and internal-node mode supports for ``spec``."""
    zero = (0,) * spec.d
    if spec.is_forced:
        end = [nu for (p, nu) in tensors.tensors if p == 0 and nu != zero]
        internal = sorted({nu for (p, nu) in tensors.tensors if p >= 1} | {zero})
        return sorted(set(end)), internal
    return [nu for nu in spec.forcing.modes if nu != zero], [zero]


def labelled_trees(k: int, spec: SystemSpec, tensors: TaylorTensors, zeta_allowed: bool = True):
    family = family_of(spec)
    end, internal = label_supports(spec, tensors)
    for top in enumerate_topologies(k, family):
        yield from enumerate_labelled(top, end, zeta_allowed, family, internal)


def oracle_order(k: int, eps, zeta, tensors: TaylorTensors, spec: SystemSpec):
    """All coefficients of order ``k``: ``{nu: (sum of tree values, tree count)}``."""
    zeta = np.asarray(zeta, dtype=float)
    fac = _Factors(eps, zeta, tensors, spec)
    out: dict = {}
    for tree in labelled_trees(k, spec, tensors, zeta_allowed=True):
        nu = tree.root_momentum
        val = _line_value(tree, 0, fac)
        acc, count = out.get(nu, (np.zeros(spec.m, dtype=complex), 0))
        out[nu] = (acc + val, count + 1)
    return dict(sorted(out.items()))


def oracle_coefficient(k: int, nu, eps, zeta, tensors: TaylorTensors, spec: SystemSpec,
                       return_count: bool = False):
    """``u^(k)_nu`` as the sum of tree values over all trees of order ``k``.

    Raises
    ------
    OrderTooLarge
        beyond the enumeration ceiling of the system's tree family.
    """
    nu = tuple(int(n) for n in np.atleast_1d(nu))
    val, count = oracle_order(k, eps, zeta, tensors, spec).get(nu, (np.zeros(spec.m, dtype=complex), 0))
    return (val, count) if return_count else val


# ---------------------------------------------------------------------------
# chains and counting


@dataclass(frozen=True)
class Chain:
    """Maximal run of unary internal nodes, listed from the root downwards."""

    nodes: tuple
    lines: tuple

    @property
    def length(self) -> int:
        return len(self.nodes)


def _topology(tree):
    return tree.topology if isinstance(tree, LabelledTree) else tree


def find_chains(tree) -> list[Chain]:
    """All maximal chains of a tree (or topology)."""
    top = _topology(tree)
    unary = set(top.unary_nodes)
    chains = []
    for v in range(top.order):
        if v not in unary or top.parent[v] in unary:
            continue
        run = [v]
        while top.children[run[-1]][0] in unary:
            run.append(top.children[run[-1]][0])
        # the line exiting a node is identified with the node itself
        chains.append(Chain(nodes=tuple(run), lines=tuple(run)))
    return chains


def chain_value(tree: LabelledTree, chain: Chain, eps, tensors: TaylorTensors, spec: SystemSpec) -> np.ndarray:
    """Matrix ``prod_i (G_{l_i} F_{v_i})`` along the chain, top to bottom."""
    fac = _Factors(eps, np.zeros(spec.m), tensors, spec)
    mat = np.eye(spec.m, dtype=complex)
    for v in chain.nodes:
        F = fac.internal_tensor(1, tree.modes[v])
        nu = tree.momenta[v]
        s = float(np.dot(spec.omega, nu))
        D = assemble_D(eps, s, spec.damping, fac.A, spec.mass)
        mat = mat @ apply_D_inverse(D, F)
    return mat


@dataclass(frozen=True)
class CountingReport:
    order: int
    ends: int
    unary: int
    chains: int
    theorem1_ok: bool | None
    theorem2_ok: bool | None

    @property
    def ok(self) -> bool:
        return all(x is not False for x in (self.theorem1_ok, self.theorem2_ok))


def check_counting(tree, family: str | None = None) -> CountingReport:
    """Evaluate the two counting inequalities.

    theorem1: ``|E| >= (k + 1) / 2``.
    theorem2: ``4|E| + 2|V_1| - 2|chains| >= k + 2``.
    The inequality not belonging to ``family`` is reported as ``None``
    (``family=None`` evaluates both).
    """
    top = _topology(tree)
    if family is None and isinstance(tree, LabelledTree):
        family = tree.family
    k, E, V1 = top.order, len(top.end_nodes), len(top.unary_nodes)
    C = len(find_chains(top))
    t1 = 2 * E >= k + 1 if family in (None, THEOREM1) else None
    t2 = 4 * E + 2 * V1 - 2 * C >= k + 2 if family in (None, THEOREM2) else None
    return CountingReport(order=k, ends=E, unary=V1, chains=C, theorem1_ok=t1, theorem2_ok=t2)
