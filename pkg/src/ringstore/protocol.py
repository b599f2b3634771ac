"""Reconstruction and exact-repair plans, and their hop-by-hop execution.

A plan is a value object: an ordered list of link transfers. Each transfer
records the vectors it carries (coefficients over the original data) and a
``mix`` matrix telling the sending node how to form its outgoing symbols
from what it received plus its own ``alpha`` stored symbols. Executing a plan
only ever touches stored symbols through those mix matrices.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .algebra import IncrementalBasis, Matrix, mat_inverse, row_vec_solve, vec_mat
from .errors import (
    BadNodeIndex,
    ContextMismatch,
    NotOrdss,
    PlanSchemeMismatch,
    RingTooShort,
    Singular,
    SingularBasis,
    SingularFinalSystem,
)
from .scheme import USER, CutConstraint, Scheme, StoredState, validate_ordss

NODE = "node"
USER_RECEIVER = "user"
SUBSTITUTE = "substitute"

Vector = tuple[int, ...]


@dataclass(frozen=True)
class LinkTransfer:
    from_node: int
    to_node: int
    receiver: str
    payload: tuple[Vector, ...]
    # rows: outgoing symbols; columns: received symbols, then the sender's
    # own alpha symbols. None marks the decode hop toward a user.
    mix: Matrix | None

    @property
    def size(self) -> int:
        return len(self.payload)

    @property
    def label(self) -> str:
        if self.receiver == USER_RECEIVER:
            return f"N{self.from_node}->U{self.to_node}"
        if self.receiver == SUBSTITUTE:
            return f"N{self.from_node}->N{self.to_node}'"
        return f"N{self.from_node}->N{self.to_node}"

    @property
    def physical_link(self) -> str:
        """Ring edge (or node-to-user edge) the transfer occupies."""
        if self.receiver == USER_RECEIVER:
            return f"N{self.from_node}->U{self.to_node}"
        return f"N{self.from_node}->N{self.to_node}"


@dataclass(frozen=True)
class ReconstructionPlan:
    user_node: int
    n: int
    alpha: int
    m: int
    hops: tuple[LinkTransfer, ...]
    basis_columns: tuple[int, ...]
    bandwidth: int

    @property
    def hop_sizes(self) -> tuple[int, ...]:
        return tuple(h.size for h in self.hops)


@dataclass(frozen=True)
class RepairPlan:
    failed_node: int
    n: int
    alpha: int
    m: int
    hops: tuple[LinkTransfer, ...]
    basis_columns: tuple[int, ...]
    extra_columns: tuple[int, ...]
    # row r: coefficients of column extra_columns[r] over basis_columns
    expression_coeffs: Matrix
    # the substituted node solves  unknown @ final_system == delivered
    final_system: Matrix
    # k == 1 only: the unknown is the original data, re-encoded with this block
    reencode: Matrix | None
    bandwidth: int

    @property
    def hop_sizes(self) -> tuple[int, ...]:
        return tuple(h.size for h in self.hops)


@lru_cache(maxsize=512)
def _is_ordss(s: Scheme) -> bool:
    return validate_ordss(s).is_ordss


def _require_ordss(s: Scheme) -> None:
    if not _is_ordss(s):
        report = validate_ordss(s)
        raise NotOrdss(
            f"condition (i) fails at {list(report.failed_window_condition_i)}, "
            f"condition (ii) fails at {list(report.failed_window_condition_ii)}"
        )


def _require_node(s: Scheme, i: int) -> None:
    if not 1 <= i <= s.n:
        raise BadNodeIndex(f"node {i} outside 1..{s.n}")


def _greedy_extend(s: Scheme, basis: IncrementalBasis, node: int, target: int) -> list[int]:
    """Lowest-index columns of ``node`` that raise ``basis`` to rank ``target``."""
    chosen = []
    for c in s.node_columns(node):
        if basis.rank == target:
            break
        if basis.add(s.g.column(c)):
            chosen.append(c)
    return chosen


def _add_all(s: Scheme, basis: IncrementalBasis, nodes: Sequence[int]) -> None:
    for node in nodes:
        for c in s.node_columns(node):
            if not basis.add(s.g.column(c)):
                raise NotOrdss(f"column {c} of node {node} is dependent inside its window")


def _combine(s: Scheme, cols: Sequence[int], coeffs: Sequence[int]) -> Vector:
    p = s.field.p
    acc = np.zeros(s.m, dtype=s.field.dtype)
    for c, w in zip(cols, coeffs):
        if w:
            acc = (acc + int(w) * s.g.array[:, c]) % p
    return tuple(int(v) for v in acc)


def _unit(length: int, at: int) -> list[int]:
    row = [0] * length
    row[at] = 1
    return row


def plan_reconstruction(s: Scheme, user_node: int) -> ReconstructionPlan:
    """Forward-and-accumulate plan for the user attached at ``user_node``.

    Nodes ``u+k-1 .. u+1`` relay toward ``u``: the farthest sends ``gamma``
    rank-extending columns, every other relay appends all of its own. Node
    ``u`` decodes and hands the ``m`` original symbols to the user.
    """
    _require_node(s, user_node)
    _require_ordss(s)
    k, alpha, m = s.k, s.alpha, s.m
    path = [s.wrap(user_node + j) for j in range(k)]

    basis = IncrementalBasis(m, s.field)
    _add_all(s, basis, path[:-1])
    last = _greedy_extend(s, basis, path[-1], m)
    if basis.rank != m:
        raise NotOrdss(f"nodes {path} do not span the data space")
    contributed = {node: list(s.node_columns(node)) for node in path[:-1]}
    contributed[path[-1]] = last

    hops: list[LinkTransfer] = []
    carried: list[Vector] = []
    for j in range(k - 1, 0, -1):
        node = path[j]
        own = list(s.node_columns(node))
        width = len(carried) + alpha
        rows = [_unit(width, i) for i in range(len(carried))]
        rows += [_unit(width, len(carried) + own.index(c)) for c in contributed[node]]
        carried = carried + [s.g.column(c) for c in contributed[node]]
        hops.append(
            LinkTransfer(node, path[j - 1], NODE, tuple(carried), Matrix(rows, s.field))
        )
    identity = tuple(tuple(_unit(m, i)) for i in range(m))
    hops.append(LinkTransfer(path[0], path[0], USER_RECEIVER, identity, None))

    basis_columns = tuple(c for node in path for c in contributed[node])
    return ReconstructionPlan(
        user_node=user_node,
        n=s.n,
        alpha=alpha,
        m=m,
        hops=tuple(hops),
        basis_columns=basis_columns,
        bandwidth=sum(h.size for h in hops),
    )


def plan_repair(s: Scheme, failed_node: int) -> RepairPlan:
    """Exact repair of ``failed_node`` from the ``k`` nodes upstream of it.

    Write the failed node as R1 and its upstream neighbours R2..R(k+1).
    The decoding basis is all of R1..R(k-1) plus ``gamma`` columns of Rk;
    the ``alpha`` extra vectors are ``gamma`` columns of R(k+1) and the
    non-basis columns of Rk. Each relay strips its own basis terms from
    every extra vector, so R2 delivers ``alpha`` vectors that involve R1's
    columns only.
    """
    _require_node(s, failed_node)
    _require_ordss(s)
    k, gamma, alpha, m = s.k, s.gamma, s.alpha, s.m
    if s.n < k + 1:
        raise RingTooShort(f"repair needs n >= k+1 = {k + 1} nodes, ring has {s.n}")
    ring = [s.wrap(failed_node + j) for j in range(k + 1)]
    if k == 1:
        return _plan_repair_single_hop(s, ring)

    basis = IncrementalBasis(m, s.field)
    _add_all(s, basis, ring[: k - 1])
    sel_k = _greedy_extend(s, basis, ring[k - 1], m)
    helpers = IncrementalBasis(m, s.field)
    _add_all(s, helpers, ring[1:k])
    sel_next = _greedy_extend(s, helpers, ring[k], m)
    if len(sel_k) != gamma or len(sel_next) != gamma:
        raise NotOrdss(f"windows around node {failed_node} do not span the data space")

    basis_columns = [c for node in ring[: k - 1] for c in s.node_columns(node)] + sel_k
    extra_columns = sel_next + [c for c in s.node_columns(ring[k - 1]) if c not in sel_k]
    bmat = s.g.columns(basis_columns)
    coeffs = (mat_inverse(bmat) @ s.g.columns(extra_columns)).T
    p = s.field.p

    def residual(row: int, upto: int) -> Vector:
        # extra vector with every basis term of ring[upto:] stripped
        keep = [c for node in ring[:upto] for c in s.node_columns(node)]
        return _combine(s, keep, [coeffs[row, basis_columns.index(c)] for c in keep])

    def strip_rows(node: int, n_in: int, own_extra: Sequence[int]) -> list[list[int]]:
        own = list(s.node_columns(node))
        rows = []
        for r, e in enumerate(extra_columns):
            row = [0] * (n_in + alpha)
            if r < n_in:
                row[r] = 1
            else:
                row[n_in + own.index(own_extra[r - n_in])] = 1
            for c in own:
                if c in basis_columns:
                    row[n_in + own.index(c)] = (row[n_in + own.index(c)] - coeffs[r, basis_columns.index(c)]) % p
            rows.append(row)
        return rows

    def receiver(to_index: int) -> str:
        return SUBSTITUTE if to_index == 0 else NODE

    hops: list[LinkTransfer] = []
    own_k1 = list(s.node_columns(ring[k]))
    hops.append(
        LinkTransfer(
            ring[k],
            ring[k - 1],
            NODE,
            tuple(s.g.column(c) for c in sel_next),
            Matrix([_unit(alpha, own_k1.index(c)) for c in sel_next], s.field),
        )
    )
    own_extra = [c for c in s.node_columns(ring[k - 1]) if c not in sel_k]
    hops.append(
        LinkTransfer(
            ring[k - 1],
            ring[k - 2],
            receiver(k - 2),
            tuple(residual(r, k - 1) for r in range(alpha)),
            Matrix(strip_rows(ring[k - 1], gamma, own_extra), s.field),
        )
    )
    for j in range(k - 2, 0, -1):
        hops.append(
            LinkTransfer(
                ring[j],
                ring[j - 1],
                receiver(j - 1),
                tuple(residual(r, j) for r in range(alpha)),
                Matrix(strip_rows(ring[j], alpha, []), s.field),
            )
        )

    failed_cols = list(s.node_columns(failed_node))
    weights = Matrix(
        [[coeffs[r, basis_columns.index(c)] for c in failed_cols] for r in range(alpha)],
        s.field,
    )
    final_system = weights.T
    try:
        mat_inverse(final_system)
    except Singular as exc:
        raise SingularFinalSystem(f"delivered vectors for node {failed_node} are dependent") from exc

    return RepairPlan(
        failed_node=failed_node,
        n=s.n,
        alpha=alpha,
        m=m,
        hops=tuple(hops),
        basis_columns=tuple(basis_columns),
        extra_columns=tuple(extra_columns),
        expression_coeffs=coeffs,
        final_system=final_system,
        reencode=None,
        bandwidth=sum(h.size for h in hops),
    )


def _plan_repair_single_hop(s: Scheme, ring: list[int]) -> RepairPlan:
    # k == 1: one neighbour alone spans the data, so the substitute decodes
    # the data from m symbols and re-encodes its own block
    failed, helper = ring[0], ring[1]
    basis = IncrementalBasis(s.m, s.field)
    sel = _greedy_extend(s, basis, helper, s.m)
    if basis.rank != s.m:
        raise NotOrdss(f"node {helper} does not span the data space")
    own = list(s.node_columns(helper))
    bmat = s.g.columns(sel)
    failed_block = s.node_matrix(failed)
    hop = LinkTransfer(
        helper,
        failed,
        SUBSTITUTE,
        tuple(s.g.column(c) for c in sel),
        Matrix([_unit(s.alpha, own.index(c)) for c in sel], s.field),
    )
    return RepairPlan(
        failed_node=failed,
        n=s.n,
        alpha=s.alpha,
        m=s.m,
        hops=(hop,),
        basis_columns=tuple(sel),
        extra_columns=tuple(s.node_columns(failed)),
        expression_coeffs=(mat_inverse(bmat) @ failed_block).T,
        final_system=bmat,
        reencode=failed_block,
        bandwidth=hop.size,
    )


def _check_context(s: Scheme, plan) -> None:
    if (plan.n, plan.alpha, plan.m) != (s.n, s.alpha, s.m):
        raise PlanSchemeMismatch(
            f"plan is for (n, alpha, M) = {(plan.n, plan.alpha, plan.m)}, "
            f"scheme is {(s.n, s.alpha, s.m)}"
        )


def _relay(
    s: Scheme, st: StoredState, hops: Sequence[LinkTransfer]
) -> tuple[list[int], list[Vector]]:
    """Run relay hops; returns what the last receiver holds (symbols, vectors)."""
    p = s.field.p
    syms: list[int] = []
    vecs: list[Vector] = []
    expected_sender = None
    for hop in hops:
        if expected_sender is not None and hop.from_node != expected_sender:
            raise PlanSchemeMismatch(f"hop from N{hop.from_node} does not follow N{expected_sender}")
        if hop.to_node != s.wrap(hop.from_node - 1):
            raise PlanSchemeMismatch(f"{hop.label} is not a ring link")
        own_cols = list(s.node_columns(hop.from_node))
        mix = hop.mix
        if mix is None or mix.cols != len(syms) + len(own_cols) or mix.rows != hop.size:
            raise PlanSchemeMismatch(f"mix matrix of {hop.label} does not fit its inputs")
        in_syms = np.array(syms + list(st.node(hop.from_node)), dtype=s.field.dtype)
        in_vecs = np.array(
            [list(v) for v in vecs] + [list(s.g.column(c)) for c in own_cols],
            dtype=s.field.dtype,
        )
        out_syms = (mix.array @ in_syms) % p
        out_vecs = (mix.array @ in_vecs) % p
        if [tuple(int(t) for t in r) for r in out_vecs] != list(hop.payload):
            raise PlanSchemeMismatch(f"payload of {hop.label} disagrees with the scheme")
        syms = [int(t) for t in out_syms]
        vecs = list(hop.payload)
        expected_sender = hop.to_node
    return syms, vecs


def execute_reconstruction(
    s: Scheme, st: StoredState, plan: ReconstructionPlan
) -> tuple[tuple[int, ...], int]:
    _check_context(s, plan)
    *relays, final = plan.hops
    if final.receiver != USER_RECEIVER or final.from_node != plan.user_node:
        raise PlanSchemeMismatch("plan does not end at the user's node")
    syms, vecs = _relay(s, st, relays)
    if relays and relays[-1].to_node != final.from_node:
        raise PlanSchemeMismatch("relay chain does not reach the user's node")
    # with k == 1 only part of the user's node is needed
    stored = st.node(final.from_node)
    own = [(j, c) for j, c in enumerate(s.node_columns(final.from_node)) if c in plan.basis_columns]
    syms = syms + [stored[j] for j, _ in own]
    vecs = vecs + [s.g.column(c) for _, c in own]
    if len(vecs) != s.m:
        raise PlanSchemeMismatch(f"user's node holds {len(vecs)} symbols, needs {s.m}")
    try:
        x = row_vec_solve(Matrix.from_columns(vecs, s.field), syms)
    except Singular as exc:
        raise SingularBasis("collected vectors do not span the data space") from exc
    return x, sum(h.size for h in plan.hops)


def execute_repair(
    s: Scheme, st: StoredState, plan: RepairPlan
) -> tuple[tuple[int, ...], int]:
    _check_context(s, plan)
    if any(h.from_node == plan.failed_node for h in plan.hops):
        raise PlanSchemeMismatch("repair plan reads from the failed node")
    final = plan.hops[-1]
    if final.receiver != SUBSTITUTE or final.to_node != plan.failed_node:
        raise PlanSchemeMismatch("plan does not deliver to the substituted node")
    delivered, _ = _relay(s, st, plan.hops)
    try:
        unknown = row_vec_solve(plan.final_system, delivered)
    except Singular as exc:
        raise SingularFinalSystem("delivered symbols do not determine the lost node") from exc
    if plan.reencode is not None:
        unknown = vec_mat(unknown, plan.reencode)
    return unknown, sum(h.size for h in plan.hops)


def link_loads(plan: ReconstructionPlan) -> dict[int, int]:
    """Payload size per link, indexed relative to the user's node.

    Link ``i`` runs from the ``i``-th node counted from the user (the
    user's own node is 1) toward the user; link 1 is the node-to-user edge.
    """
    loads: dict[int, int] = {}
    for hop in plan.hops:
        i = (hop.from_node - plan.user_node) % plan.n + 1
        loads[i] = loads.get(i, 0) + hop.size
    return loads


def verify_plan_against_cuts(plan: ReconstructionPlan, constraints: Sequence[CutConstraint]) -> bool:
    if not constraints or constraints[0].link != (1, USER) or constraints[0].min_symbols != plan.m:
        raise ContextMismatch(f"constraints do not describe a user needing {plan.m} symbols")
    for c in constraints:
        i, j = c.link
        if not 1 <= i <= plan.n or j != i - 1:
            raise ContextMismatch(f"link {c.link} is not a ring link of {plan.n} nodes")
    loads = link_loads(plan)
    bounded = {c.link[0]: c.min_symbols for c in constraints}
    if any(loads.get(i, 0) < need for i, need in bounded.items()):
        return False
    return all(size == 0 for i, size in loads.items() if i not in bounded)
