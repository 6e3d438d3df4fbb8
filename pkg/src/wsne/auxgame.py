"""The auxiliary bipartite game G(T) and its structural certificates.

A win-lose game with payoff matrices ``A`` (row player) and ``B`` (column
player) is the same thing as a bipartite digraph on rows and columns:
``r_i -> c_j`` iff ``B[i, j] = 1`` and ``c_j -> r_i`` iff ``A[i, j] = 1``.
Rows are the left side and columns the right side throughout.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional, Sequence

import mpmath
import numpy as np

from .errors import CapacityError, InvalidParameter
from .tournament import Tournament, bits_of, is_m_dominated, lowest_bit

LEFT, RIGHT = "L", "R"
DEFAULT_MAX_COLUMNS = 1 << 22
DEFAULT_COVER_BUDGET = 5_000_000


@dataclass(frozen=True, eq=False)
class WinLoseGame:
    A: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        A = np.array(self.A, dtype=np.int8, copy=True)
        B = np.array(self.B, dtype=np.int8, copy=True)
        if A.ndim != 2 or A.shape != B.shape:
            raise InvalidParameter(f"payoff matrices must share a 2-d shape, got {A.shape} and {B.shape}")
        if A.shape[0] < 1 or A.shape[1] < 1:
            raise InvalidParameter("a game needs at least one row and one column")
        if not (np.isin(A, (0, 1)).all() and np.isin(B, (0, 1)).all()):
            raise InvalidParameter("win-lose payoffs must be 0 or 1")
        A.setflags(write=False)
        B.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def __eq__(self, other):
        if not isinstance(other, WinLoseGame):
            return NotImplemented
        return np.array_equal(self.A, other.A) and np.array_equal(self.B, other.B)

    def __hash__(self):
        return hash((self.A.tobytes(), self.B.tobytes(), self.A.shape))

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "n": self.n,
            "A": ["".join(map(str, row)) for row in self.A.tolist()],
            "B": ["".join(map(str, row)) for row in self.B.tolist()],
        }

    @classmethod
    def from_json(cls, data: dict) -> "WinLoseGame":
        try:
            m, n = int(data["m"]), int(data["n"])
            A = _parse_bitrows(data["A"], m, n)
            B = _parse_bitrows(data["B"], m, n)
        except KeyError as exc:
            raise InvalidParameter(f"game JSON missing field {exc}") from None
        return cls(A, B)

    def digest(self) -> str:
        blob = json.dumps(self.to_json(), sort_keys=True, separators=(",", ":")).encode()
        return hashlib.sha256(blob).hexdigest()


def _parse_bitrows(rows, m, n):
    if len(rows) != m or any(len(r) != n for r in rows):
        raise InvalidParameter(f"expected {m} bitstrings of length {n}")
    if any(set(r) - {"0", "1"} for r in rows):
        raise InvalidParameter("payoff rows must be strings of '0'/'1'")
    return [[int(c) for c in r] for r in rows]


@dataclass(frozen=True)
class BipartiteDigraph:
    """Bipartite digraph stored as adjacency bitmasks.

    ``lr[i]`` is the mask of right vertices receiving an arc from left
    vertex ``i``; ``rl[j]`` is the mask of left vertices receiving an arc
    from right vertex ``j``.
    """

    left_size: int
    right_size: int
    lr: tuple
    rl: tuple

    def __post_init__(self):
        if len(self.lr) != self.left_size or len(self.rl) != self.right_size:
            raise InvalidParameter("adjacency lists do not match side sizes")
        if any(m >> self.right_size for m in self.lr) or any(m >> self.left_size for m in self.rl):
            raise InvalidParameter("arc points past the end of a side")

    @classmethod
    def from_arcs(cls, left_size, right_size, arcs_lr=(), arcs_rl=()):
        lr = [0] * left_size
        rl = [0] * right_size
        for i, j in arcs_lr:
            lr[i] |= 1 << j
        for j, i in arcs_rl:
            rl[j] |= 1 << i
        return cls(left_size, right_size, tuple(lr), tuple(rl))

    def size(self, side: str) -> int:
        return self.left_size if side == LEFT else self.right_size

    def out_mask(self, v) -> int:
        side, i = v
        return self.lr[i] if side == LEFT else self.rl[i]

    def in_masks(self, side: str) -> tuple:
        """For each vertex on ``side``, the mask of opposite vertices pointing at it."""
        src = self.rl if side == LEFT else self.lr
        out = [0] * self.size(side)
        for j, m in enumerate(src):
            for i in bits_of(m):
                out[i] |= 1 << j
        return tuple(out)

    def in_degrees(self, side: str) -> list:
        return [m.bit_count() for m in self.in_masks(side)]

    def vertices(self):
        return [(LEFT, i) for i in range(self.left_size)] + [(RIGHT, j) for j in range(self.right_size)]

    def has_arc(self, u, v) -> bool:
        if u[0] == v[0]:
            return False
        return bool(self.out_mask(u) >> v[1] & 1)

    def arc_count(self) -> int:
        return sum(m.bit_count() for m in self.lr) + sum(m.bit_count() for m in self.rl)

    def to_json(self) -> dict:
        return {
            "left_size": self.left_size,
            "right_size": self.right_size,
            "arcs_lr": [_mask_bits(m, self.right_size) for m in self.lr],
            "arcs_rl": [_mask_bits(m, self.left_size) for m in self.rl],
        }

    @classmethod
    def from_json(cls, data: dict) -> "BipartiteDigraph":
        try:
            left, right = int(data["left_size"]), int(data["right_size"])
            lr = tuple(_bits_mask(s) for s in data["arcs_lr"])
            rl = tuple(_bits_mask(s) for s in data["arcs_rl"])
        except KeyError as exc:
            raise InvalidParameter(f"digraph JSON missing field {exc}") from None
        return cls(left, right, lr, rl)


def _mask_bits(mask, width):
    return "".join("1" if mask >> t & 1 else "0" for t in range(width))


def _bits_mask(s):
    return sum(1 << t for t, c in enumerate(s) if c == "1")


def other_side(side: str) -> str:
    return RIGHT if side == LEFT else LEFT


def vertex_json(v) -> list:
    return [v[0], v[1]]


# -- column indexing ---------------------------------------------------------


@dataclass(frozen=True)
class ColumnIndexMap:
    """Colexicographic bijection between k-subsets of ``range(n_nodes)`` and columns."""

    k: int
    n_nodes: int

    def __len__(self):
        return comb(self.n_nodes, self.k)

    def rank(self, subset: Sequence[int]) -> int:
        s = sorted(subset)
        if len(s) != self.k or len(set(s)) != self.k or (s and (s[0] < 0 or s[-1] >= self.n_nodes)):
            raise InvalidParameter(f"{subset} is not a {self.k}-subset of range({self.n_nodes})")
        return sum(comb(c, i + 1) for i, c in enumerate(s))

    def unrank(self, r: int) -> tuple:
        if not 0 <= r < len(self):
            raise InvalidParameter(f"column index {r} out of range")
        out = []
        for i in range(self.k, 0, -1):
            c = i - 1
            while comb(c + 1, i) <= r:
                c += 1
            out.append(c)
            r -= comb(c, i)
        return tuple(reversed(out))

    def subsets(self):
        """All k-subsets in column order."""
        return sorted(combinations(range(self.n_nodes), self.k), key=lambda s: s[::-1])


def build_auxiliary_game(T: Tournament, k: int, max_columns: int = DEFAULT_MAX_COLUMNS):
    """Rows are tournament nodes, columns are k-subsets X.

    ``B[i, X] = 1`` iff ``i`` is in ``X`` and ``A[i, X] = 1`` iff ``i``
    dominates ``X``.
    """
    if k < 1 or k > T.n:
        raise InvalidParameter(f"need 1 <= k <= n, got k={k}, n={T.n}")
    cmap = ColumnIndexMap(k, T.n)
    ncols = len(cmap)
    if ncols > max_columns:
        raise CapacityError(f"C({T.n},{k}) = {ncols} columns exceeds the limit of {max_columns}")
    A = np.zeros((T.n, ncols), dtype=np.int8)
    B = np.zeros((T.n, ncols), dtype=np.int8)
    full = (1 << T.n) - 1
    for col, X in enumerate(cmap.subsets()):
        dom = full
        for v in X:
            B[v, col] = 1
            dom &= T.in_masks[v]
        for u in bits_of(dom):
            A[u, col] = 1
    return WinLoseGame(A, B), cmap


def game_to_digraph(g: WinLoseGame) -> BipartiteDigraph:
    weights_r = 1 << np.arange(g.n, dtype=object)
    weights_c = 1 << np.arange(g.m, dtype=object)
    lr = tuple(int((g.B[i].astype(object) * weights_r).sum()) for i in range(g.m))
    rl = tuple(int((g.A[:, j].astype(object) * weights_c).sum()) for j in range(g.n))
    return BipartiteDigraph(g.m, g.n, lr, rl)


def digraph_to_game(G: BipartiteDigraph) -> WinLoseGame:
    A = np.zeros((G.left_size, G.right_size), dtype=np.int8)
    B = np.zeros((G.left_size, G.right_size), dtype=np.int8)
    for i, m in enumerate(G.lr):
        B[i, bits_of(m)] = 1
    for j, m in enumerate(G.rl):
        A[bits_of(m), j] = 1
    return WinLoseGame(A, B)


# -- certificates ------------------------------------------------------------


@dataclass
class Certificate:
    property: str
    holds: Optional[bool]
    mode: str
    witness: object = None
    details: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "property": self.property,
            "holds": self.holds,
            "witness": self.witness,
            "mode": self.mode,
            "details": self.details,
        }


def is_covered(G: BipartiteDigraph, W) -> Optional[tuple]:
    """Smallest opposite-side vertex receiving an arc from every member of ``W``.

    ``W`` is a non-empty collection of ``(side, index)`` vertices, all on one side.
    """
    W = list(W)
    if not W:
        raise InvalidParameter("W must be non-empty")
    sides = {v[0] for v in W}
    if len(sides) != 1:
        raise InvalidParameter("all vertices of W must lie on the same side")
    side = sides.pop()
    common = (1 << G.size(other_side(side))) - 1
    for v in W:
        common &= G.out_mask(v)
    y = lowest_bit(common)
    return None if y is None else (other_side(side), y)


def is_k_covered(G: BipartiteDigraph, k: int, mode: str = "exact", tournament: Optional[Tournament] = None,
                 construction_k: Optional[int] = None, budget: int = DEFAULT_COVER_BUDGET) -> Certificate:
    """Check that every k vertices on one side share an out-neighbour.

    ``mode="exact"`` enumerates k-subsets of both sides (left first, each in
    lex order) until ``budget`` subsets have been checked. ``mode="sufficient"``
    needs the tournament ``G`` was built from (with column size
    ``construction_k``, default ``k``): rows are covered by construction,
    and a union of k columns spans at most ``k * construction_k`` nodes, so
    domination of all node sets that small certifies the column side. A
    failed sufficient check is inconclusive (``holds=None``).
    """
    if k < 1 or k > min(G.left_size, G.right_size):
        raise InvalidParameter(f"need 1 <= k <= min side size, got k={k}")
    prop = f"{k}-covered"
    if mode == "sufficient":
        if tournament is None:
            raise InvalidParameter("sufficient mode needs the originating tournament")
        ck = k if construction_k is None else construction_k
        if G.left_size != tournament.n or G.right_size != comb(tournament.n, ck):
            raise InvalidParameter("digraph dimensions do not match G(T, k) for the given tournament")
        if k > ck:
            # rows are only guaranteed covered for sets of at most construction_k nodes
            return Certificate(prop, None, "sufficient", None,
                               {"reason": f"k = {k} exceeds the column size {ck}"})
        m = k * ck
        if m >= tournament.n:
            return Certificate(prop, None, "sufficient", None,
                               {"reason": f"{m} >= N = {tournament.n}; domination test not applicable"})
        ok, undominated = is_m_dominated(tournament, m)
        if ok:
            return Certificate(prop, True, "sufficient", None, {"dominated_up_to": m})
        return Certificate(prop, None, "sufficient", None,
                           {"reason": f"tournament is not {m}-dominated", "undominated_set": list(undominated)})
    if mode != "exact":
        raise InvalidParameter(f"unknown coverage mode {mode!r}")
    checked = 0
    for side in (LEFT, RIGHT):
        masks = G.lr if side == LEFT else G.rl
        full = (1 << G.size(other_side(side))) - 1
        for W in combinations(range(G.size(side)), k):
            if checked >= budget:
                return Certificate(prop, None, "budget_exceeded", None, {"checked": checked, "budget": budget})
            checked += 1
            common = full
            for w in W:
                common &= masks[w]
                if not common:
                    break
            if not common:
                return Certificate(prop, False, "exact", [vertex_json((side, w)) for w in W], {"checked": checked})
    return Certificate(prop, True, "exact", None, {"checked": checked})


def has_digon(G: BipartiteDigraph) -> Optional[tuple]:
    """First pair ``(left i, right j)`` with arcs both ways, in lex order."""
    for i, m in enumerate(G.lr):
        for j in bits_of(m):
            if G.rl[j] >> i & 1:
                return (LEFT, i), (RIGHT, j)
    return None


def _two_step(G: BipartiteDigraph, side: str) -> list:
    """Mask of same-side vertices reachable in exactly two arcs, per vertex of ``side``."""
    first = G.lr if side == LEFT else G.rl
    second = G.rl if side == LEFT else G.lr
    out = []
    for m in first:
        r = 0
        for j in bits_of(m):
            r |= second[j]
        out.append(r)
    return out


def shortest_cycle(G: BipartiteDigraph) -> Optional[list]:
    """A shortest directed cycle as a vertex list, or None if acyclic.

    Every cycle alternates sides, so a shortest cycle of length ``2d`` is a
    shortest closed walk of length ``d`` in the two-step graph on one side.
    A shortest closed walk there is a simple cycle, and its intermediate
    vertices are distinct or a shorter walk would exist. The smaller side is
    used; BFS runs from each of its vertices.
    """
    side = LEFT if G.left_size <= G.right_size else RIGHT
    n = G.size(side)
    if n == 0 or G.size(other_side(side)) == 0:
        return None
    adj = _two_step(G, side)
    best = None
    for s in range(n):
        layers = _bfs_to_self(adj, s, None if best is None else len(best) - 1)
        if layers is not None and (best is None or len(layers) < len(best)):
            best = layers
            if len(best) == 2:
                break
    if best is None:
        return None
    # recover a path s -> ... -> s through the BFS layers
    s = lowest_bit(best[0])
    d = len(best) - 1
    path = [s]
    target = s
    for level in range(d - 1, 0, -1):
        cands = [u for u in bits_of(best[level]) if adj[u] >> target & 1]
        target = min(cands)
        path.append(target)
    path.append(s)
    path.reverse()  # path[0] = s, path[-1] = s, consecutive entries linked in adj
    inn = G.in_masks(side)
    first = G.lr if side == LEFT else G.rl
    cycle = []
    for a, b in zip(path, path[1:]):
        c = lowest_bit(first[a] & inn[b])
        cycle.append((side, a))
        cycle.append((other_side(side), c))
    return cycle


def _bfs_to_self(adj, s, max_len):
    """BFS layers from ``s`` until ``s`` is reached again.

    Returns ``[layer0, ..., layer_{d-1}, {s}]`` for the shortest closed walk
    length ``d``, or None if none exists within ``max_len`` steps.
    """
    layers = [1 << s]
    visited = 1 << s
    frontier = 1 << s
    depth = 0
    while frontier:
        depth += 1
        if max_len is not None and depth > max_len:
            return None
        nxt = 0
        for u in bits_of(frontier):
            nxt |= adj[u]
        if nxt >> s & 1:
            layers.append(1 << s)
            return layers
        frontier = nxt & ~visited
        visited |= frontier
        layers.append(frontier)
    return None


def shortest_cycle_length(G: BipartiteDigraph) -> Optional[int]:
    c = shortest_cycle(G)
    return None if c is None else len(c)


# -- union-bound evaluators --------------------------------------------------


def union_bound_value(N: int, k: int) -> Fraction:
    """Exact value of C(C(N,k), k) * (1 - 2^-(k^2))^(N - k^2).

    Below 1 means a random tournament on N nodes gives a k-covered G(T)
    with positive probability.
    """
    if k < 1:
        raise InvalidParameter("k must be at least 1")
    if N <= k * k:
        raise InvalidParameter(f"need N > k^2, got N={N}, k={k}")
    n = comb(N, k)
    p = 1 << (k * k)
    return comb(n, k) * Fraction(p - 1, p) ** (N - k * k)


def union_bound_threshold(k: int, limit: int = 100_000) -> Optional[int]:
    """First N > k^2 at which the union bound drops below 1."""
    for N in range(k * k + 1, limit + 1):
        if union_bound_value(N, k) < 1:
            return N
    return None


def _iv_log(x, base):
    if base == "e":
        return mpmath.iv.log(x)
    return mpmath.iv.log(x) / mpmath.iv.log(mpmath.iv.mpf(base))


def asymptotic_sides(n: int, k: int, log_base="e", prec: int = 96):
    """Outward-rounded intervals for both sides of e^(k^2 log 2) * k * log n < n^(1/k)."""
    if n < 2 or k < 1:
        raise InvalidParameter(f"need n >= 2 and k >= 1, got n={n}, k={k}")
    iv = mpmath.iv
    with mpmath.workprec(prec):
        old = iv.prec
        iv.prec = prec
        try:
            nn = iv.mpf(n)
            left = iv.exp(k * k * _iv_log(iv.mpf(2), log_base)) * k * _iv_log(nn, log_base)
            right = iv.exp(iv.log(nn) / k)
        finally:
            iv.prec = old
    return left, right


def check_asymptotic_inequality(n: int, k: int, log_base="e") -> bool:
    """True only when the inequality is certain under interval evaluation."""
    left, right = asymptotic_sides(n, k, log_base)
    return bool(left.b < right.a)


def asymptotic_threshold(k: int, log_base="e", start: int = 2, limit: int = 10**7) -> Optional[int]:
    """Smallest n >= start at which the inequality is certified to hold."""
    n = start
    while n <= limit:
        if check_asymptotic_inequality(n, k, log_base):
            return n
        n += 1
    return None
