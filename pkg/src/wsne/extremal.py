"""Short cycles in bipartite digraphs with large minimum in-degree.

Tools around the statement that a k x k bipartite digraph whose in-degrees
all exceed k/3 has a directed cycle of length at most 4: exhaustive
verification at small k, the blow-up of the directed 6-cycle showing k/3 is
tight, weighted blow-ups that turn a mixed-strategy profile into an
unweighted graph, and the neighbourhood sets used in the counting argument.
Also a checker for the "short cycle or undominated triple" digraph question.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, permutations, product
from math import lcm
from typing import Optional

from .auxgame import (
    LEFT,
    RIGHT,
    BipartiteDigraph,
    WinLoseGame,
    game_to_digraph,
    other_side,
    shortest_cycle,
    vertex_json,
)
from .equilibrium import Profile
from .errors import InvalidParameter
from .tournament import bits_of, lowest_bit, mask_of

CYCLE_LE_4 = "cycle_le_4"
PURE_4_CYCLE = "pure_4_cycle"
DEFAULT_CH_BUDGET = 50_000_000


def min_in_degree(H: BipartiteDigraph) -> int:
    degs = H.in_degrees(LEFT) + H.in_degrees(RIGHT)
    return min(degs) if degs else 0


def max_out_degree(H: BipartiteDigraph) -> int:
    degs = [m.bit_count() for m in H.lr + H.rl]
    return max(degs) if degs else 0


def has_short_cycle(H: BipartiteDigraph, max_len: int) -> Optional[list]:
    """A shortest directed cycle if its length is at most ``max_len``, else None."""
    if max_len < 2 or max_len % 2:
        raise InvalidParameter(f"max_len must be a positive even integer, got {max_len}")
    c = shortest_cycle(H)
    if c is None or len(c) > max_len:
        return None
    return c


def is_cycle(H: BipartiteDigraph, cycle) -> bool:
    """True if ``cycle`` lists distinct vertices joined consecutively (and last to first) by arcs."""
    if len(cycle) < 2 or len(set(cycle)) != len(cycle):
        return False
    return all(H.has_arc(u, v) for u, v in zip(cycle, cycle[1:] + cycle[:1]))


# -- exhaustive threshold verification --------------------------------------


@dataclass
class ChVerdict:
    k: int
    d: int
    property: str
    holds: Optional[bool]
    counterexample: Optional[BipartiteDigraph] = None
    graphs_checked: int = 0
    exhaustive: bool = True
    isomorph_rejection: bool = False
    wall_time: float = 0.0

    def to_json(self) -> dict:
        out = {
            "k": self.k,
            "d": self.d,
            "property": self.property,
            "holds": self.holds,
            "exhaustive": self.exhaustive,
            "isomorph_rejection": self.isomorph_rejection,
            "graphs_checked": self.graphs_checked,
            "counterexample": None,
        }
        if self.counterexample is not None:
            H = self.counterexample
            out["counterexample"] = {
                "digraph": H.to_json(),
                "shortest_cycle": [vertex_json(v) for v in (shortest_cycle(H) or [])],
            }
        return out


def _matrices_with_min_col_sum(k: int, d: int) -> list:
    """All k x k 0/1 matrices (as k row masks) whose every column sums to at least ``d``.

    Ordered by the row-major bitstring, first entry most significant.
    """
    out = []
    for bits in range(1 << (k * k)):
        rows = []
        for i in range(k):
            chunk = bits >> (k * (k - 1 - i)) & ((1 << k) - 1)
            # bit t of a row mask is column t; in the bitstring column 0 comes first
            rows.append(int(format(chunk, f"0{k}b")[::-1], 2))
        if all(sum(r >> j & 1 for r in rows) >= d for j in range(k)):
            out.append(tuple(rows))
    return out


def _short_cycle_masks(lr, rl, k, prop):
    """Whether the graph (lr, rl) has the requested short cycle."""
    if prop == CYCLE_LE_4:
        for i in range(k):
            reach = 0
            for j in bits_of(lr[i]):
                reach |= rl[j]
            if reach >> i & 1:
                return True  # digon through i
            for i2 in bits_of(reach):
                back = 0
                for j in bits_of(lr[i2]):
                    back |= rl[j]
                if back >> i & 1:
                    return True
        return False
    # pure 4-cycle: i -> j -> i2 -> j2 -> i with i != i2 and j != j2
    for i in range(k):
        for j in bits_of(lr[i]):
            for i2 in bits_of(rl[j] & ~(1 << i)):
                for j2 in bits_of(lr[i2] & ~(1 << j)):
                    if rl[j2] >> i & 1:
                        return True
    return False


def _permute_rows_cols(rows, rperm, cperm, k):
    out = [0] * k
    for i, r in enumerate(rows):
        m = 0
        for j in bits_of(r):
            m |= 1 << cperm[j]
        out[rperm[i]] = m
    return tuple(out)


def _canonical_reps(mats, k):
    """One representative per orbit of row/column permutations, taking the smallest in list order."""
    order = {m: t for t, m in enumerate(mats)}
    perms = list(permutations(range(k)))
    seen = set()
    reps = []
    for m in mats:
        if m in seen:
            continue
        reps.append(m)
        for rp in perms:
            for cp in perms:
                img = _permute_rows_cols(m, rp, cp, k)
                if img in order:
                    seen.add(img)
    return reps


def verify_bipartite_ch(k: int, d: int, prop: str = CYCLE_LE_4, budget: int = DEFAULT_CH_BUDGET,
                        isomorph_rejection: Optional[bool] = None) -> ChVerdict:
    """Check every k x k bipartite digraph with all in-degrees >= d for a short cycle.

    Graphs are encoded as the row-major bitstring of the left-to-right arcs
    followed by that of the right-to-left arcs and scanned in increasing
    order, so without isomorph rejection the reported counterexample is the
    lexicographically smallest. With rejection (default for k > 3) only one
    left-to-right pattern per orbit under side-preserving relabelling is
    kept, paired with every right-to-left pattern; the property is invariant
    under relabelling, so the verdict is unchanged.
    """
    if prop not in (CYCLE_LE_4, PURE_4_CYCLE):
        raise InvalidParameter(f"unknown property {prop!r}")
    if k < 1 or d < 0:
        raise InvalidParameter("need k >= 1 and d >= 0")
    if isomorph_rejection is None:
        isomorph_rejection = k > 3
    t0 = time.perf_counter()
    if 1 << (k * k) > budget:
        # even listing the one-directional patterns would exceed the budget
        return ChVerdict(k, d, prop, None, None, 0, False, isomorph_rejection, time.perf_counter() - t0)
    mats = _matrices_with_min_col_sum(k, d)
    left_patterns = _canonical_reps(mats, k) if isomorph_rejection else mats
    # rl[j] is the mask of left vertices hit by right vertex j; its in-degree
    # condition is on left vertices, i.e. column sums of the rl matrix
    rl_patterns = mats
    checked = 0
    for lr in left_patterns:
        for rl in rl_patterns:
            if checked >= budget:
                return ChVerdict(k, d, prop, None, None, checked, False, isomorph_rejection,
                                 time.perf_counter() - t0)
            checked += 1
            if not _short_cycle_masks(lr, rl, k, prop):
                H = BipartiteDigraph(k, k, lr, rl)
                return ChVerdict(k, d, prop, False, H, checked, True, isomorph_rejection,
                                 time.perf_counter() - t0)
    return ChVerdict(k, d, prop, True, None, checked, True, isomorph_rejection, time.perf_counter() - t0)


# -- constructions -----------------------------------------------------------


def directed_cycle(length: int) -> BipartiteDigraph:
    """The directed cycle L0 -> R0 -> L1 -> R1 -> ... -> L0 of even ``length``."""
    if length < 2 or length % 2:
        raise InvalidParameter("a bipartite cycle has even length >= 2")
    h = length // 2
    return BipartiteDigraph.from_arcs(h, h, [(i, i) for i in range(h)], [(j, (j + 1) % h) for j in range(h)])


def sixcycle_blowup(t: int) -> BipartiteDigraph:
    """Replace each vertex of the directed 6-cycle by ``t`` copies.

    Each cycle arc becomes a complete one-way t x t bipartite block, giving a
    3t x 3t digraph with every in- and out-degree equal to t and girth 6.
    """
    if t < 1:
        raise InvalidParameter("t must be at least 1")
    base = directed_cycle(6)
    return blowup_counts(base, [t] * 3, [t] * 3)


def blowup_counts(H: BipartiteDigraph, left_counts, right_counts) -> BipartiteDigraph:
    """Replace vertex v by ``counts[v]`` copies; copies inherit every arc of v."""
    if len(left_counts) != H.left_size or len(right_counts) != H.right_size:
        raise InvalidParameter("one copy count per vertex is required")
    lstart = [0]
    for c in left_counts:
        lstart.append(lstart[-1] + c)
    rstart = [0]
    for c in right_counts:
        rstart.append(rstart[-1] + c)

    def block(start, counts, mask):
        out = 0
        for v in bits_of(mask):
            out |= ((1 << counts[v]) - 1) << start[v]
        return out

    lr, rl = [], []
    for i, m in enumerate(H.lr):
        lr.extend([block(rstart, right_counts, m)] * left_counts[i])
    for j, m in enumerate(H.rl):
        rl.extend([block(lstart, left_counts, m)] * right_counts[j])
    return BipartiteDigraph(lstart[-1], rstart[-1], tuple(lr), tuple(rl))


@dataclass(frozen=True)
class WeightedBipartiteDigraph:
    graph: BipartiteDigraph
    left_weights: tuple
    right_weights: tuple
    left_labels: tuple = ()
    right_labels: tuple = ()

    def __post_init__(self):
        lw = tuple(Fraction(w) for w in self.left_weights)
        rw = tuple(Fraction(w) for w in self.right_weights)
        if len(lw) != self.graph.left_size or len(rw) != self.graph.right_size:
            raise InvalidParameter("one weight per vertex is required")
        if any(w <= 0 for w in lw + rw):
            raise InvalidParameter("weights must be positive")
        if sum(lw) != 1 or sum(rw) != 1:
            raise InvalidParameter("weights on each side must sum to 1")
        object.__setattr__(self, "left_weights", lw)
        object.__setattr__(self, "right_weights", rw)

    def weighted_in_degree(self, v) -> Fraction:
        side, i = v
        src_w = self.right_weights if side == LEFT else self.left_weights
        masks = self.graph.rl if side == LEFT else self.graph.lr
        return sum((src_w[j] for j, m in enumerate(masks) if m >> i & 1), Fraction(0))

    def default_scale(self) -> int:
        return lcm(*(w.denominator for w in self.left_weights + self.right_weights))


def blowup(W: WeightedBipartiteDigraph, L: Optional[int] = None) -> BipartiteDigraph:
    """Make ``L * w_v`` copies of every vertex; both sides end up with ``L`` vertices.

    ``L`` defaults to the least common multiple of the weight denominators.
    """
    if L is None:
        L = W.default_scale()
    if L < 1:
        raise InvalidParameter("L must be a positive integer")
    counts = {}
    for side, weights in ((LEFT, W.left_weights), (RIGHT, W.right_weights)):
        cs = []
        for i, w in enumerate(weights):
            c = L * w
            if c.denominator != 1:
                raise InvalidParameter(f"L * w is not an integer for vertex ({side}, {i}): {L} * {w}")
            cs.append(int(c))
        counts[side] = cs
    return blowup_counts(W.graph, counts[LEFT], counts[RIGHT])


def induced_subgraph(H: BipartiteDigraph, left, right) -> BipartiteDigraph:
    left, right = list(left), list(right)
    lpos = {v: t for t, v in enumerate(left)}
    rpos = {v: t for t, v in enumerate(right)}

    def remap(mask, pos):
        return mask_of(pos[v] for v in bits_of(mask) if v in pos)

    lr = tuple(remap(H.lr[i], rpos) for i in left)
    rl = tuple(remap(H.rl[j], lpos) for j in right)
    return BipartiteDigraph(len(left), len(right), lr, rl)


def profile_to_weighted_graph(g: WinLoseGame, prof: Profile) -> WeightedBipartiteDigraph:
    """Subgraph of the game digraph induced by the two supports, weighted by probability."""
    prof.check(g)
    S1, S2 = prof.p.support, prof.q.support
    H = induced_subgraph(game_to_digraph(g), S1, S2)
    return WeightedBipartiteDigraph(
        H,
        tuple(prof.p.probs[i] for i in S1),
        tuple(prof.q.probs[j] for j in S2),
        tuple(S1),
        tuple(S2),
    )


# -- neighbourhood decomposition ---------------------------------------------


@dataclass
class NeighborhoodDecomposition:
    pivot: tuple
    A1: tuple
    B1: tuple
    B2: tuple
    C1: tuple
    alpha1: Fraction
    beta1: Fraction
    beta2: Fraction
    gamma1: Fraction

    def to_json(self) -> dict:
        out = {"pivot": vertex_json(self.pivot)}
        for name in ("A1", "B1", "B2", "C1"):
            out[name] = [vertex_json(v) for v in getattr(self, name)]
        for name in ("alpha1", "beta1", "beta2", "gamma1"):
            v = getattr(self, name)
            out[name] = f"{v.numerator}/{v.denominator}"
        return out


def decompose_neighborhoods(H: BipartiteDigraph, v) -> NeighborhoodDecomposition:
    """Sets around pivot ``v``.

    A1: out-neighbours of v. B1: in-neighbours of v. B2: vertices other
    than v with a 2-arc path to v. C1: vertices on the A1 side in neither A1
    nor B1. Ratios divide by the size of the side each set lives on.
    """
    side, i = v
    if not 0 <= i < H.size(side):
        raise InvalidParameter(f"vertex {v} does not exist")
    opp = other_side(side)
    a1 = H.out_mask(v)
    b1 = H.in_masks(side)[i]
    opp_in = H.in_masks(opp)
    b2 = 0
    for u in bits_of(b1):
        b2 |= opp_in[u]
    b2 &= ~(1 << i)
    full = (1 << H.size(opp)) - 1
    c1 = full & ~(a1 | b1)
    n_opp = H.size(opp) or 1
    n_same = H.size(side) or 1

    def verts(s, mask):
        return tuple((s, t) for t in bits_of(mask))

    return NeighborhoodDecomposition(
        v,
        verts(opp, a1),
        verts(opp, b1),
        verts(side, b2),
        verts(opp, c1),
        Fraction(a1.bit_count(), n_opp),
        Fraction(b1.bit_count(), n_opp),
        Fraction(b2.bit_count(), n_same),
        Fraction(c1.bit_count(), n_opp),
    )


def max_out_degree_vertex(H: BipartiteDigraph):
    """First vertex (left side first) of maximum out-degree."""
    best = None
    for v in H.vertices():
        d = H.out_mask(v).bit_count()
        if best is None or d > best[0]:
            best = (d, v)
    return None if best is None else best[1]


# -- the "cycle of length <= 3 or undominated triple" check ------------------


@dataclass(frozen=True)
class GeneralDigraph:
    n: int
    out: tuple

    def __post_init__(self):
        if len(self.out) != self.n:
            raise InvalidParameter("one out-mask per vertex is required")
        for v, m in enumerate(self.out):
            if m >> v & 1:
                raise InvalidParameter(f"self-loop at {v}")
            if m >> self.n:
                raise InvalidParameter(f"arc from {v} out of range")

    @classmethod
    def from_arcs(cls, n, arcs):
        out = [0] * n
        for u, v in arcs:
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidParameter(f"arc {(u, v)} out of range")
            if u == v:
                raise InvalidParameter(f"self-loop at {u}")
            out[u] |= 1 << v
        return cls(n, tuple(out))

    @classmethod
    def from_tournament(cls, T):
        return cls(T.n, tuple(T.out_masks))

    def arcs(self):
        return [(u, v) for u in range(self.n) for v in bits_of(self.out[u])]

    def to_json(self) -> dict:
        return {"n": self.n, "arcs": [list(a) for a in self.arcs()]}

    @classmethod
    def from_json(cls, data: dict) -> "GeneralDigraph":
        try:
            return cls.from_arcs(int(data["n"]), [tuple(a) for a in data["arcs"]])
        except KeyError as exc:
            raise InvalidParameter(f"digraph JSON missing field {exc}") from None


HOLDS_VIA_CYCLE = "holds_via_cycle"
HOLDS_VIA_TRIPLE = "holds_via_undominated_triple"
COUNTEREXAMPLE = "counterexample"


def find_cycle_le3(D: GeneralDigraph) -> Optional[list]:
    """A digon if one exists, else a directed triangle, else None."""
    out = D.out
    for u in range(D.n):
        for v in bits_of(out[u]):
            if out[v] >> u & 1:
                return [u, v]
    for u in range(D.n):
        for v in bits_of(out[u]):
            w = lowest_bit(out[v] & _in_mask(D, u))
            if w is not None:
                return [u, v, w]
    return None


def _in_mask(D, u):
    return mask_of(v for v in range(D.n) if D.out[v] >> u & 1)


def check_conjecture_dmp(D: GeneralDigraph):
    """Return ``(verdict, witness)``: a short cycle, an undominated triple, or neither."""
    if D.n < 3:
        raise InvalidParameter("need at least 3 vertices")
    cyc = find_cycle_le3(D)
    if cyc is not None:
        return HOLDS_VIA_CYCLE, cyc
    inn = [_in_mask(D, u) for u in range(D.n)]
    for S in combinations(range(D.n), 3):
        if not (inn[S[0]] & inn[S[1]] & inn[S[2]]):
            return HOLDS_VIA_TRIPLE, list(S)
    return COUNTEREXAMPLE, None


def all_bipartite_digraphs(k: int):
    """Every k x k bipartite digraph, for brute-force cross checks at tiny k."""
    for lr in product(range(1 << k), repeat=k):
        for rl in product(range(1 << k), repeat=k):
            yield BipartiteDigraph(k, k, lr, rl)
