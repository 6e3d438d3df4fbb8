"""Tournaments, their generators, and domination queries.

Nodes are ``0..n-1``. The orientation is stored as one bit per unordered
pair ``{i, j}`` with ``i < j`` in lexicographic pair order; bit 1 means the
arc points ``i -> j``. For fast queries each node also keeps bitmasks of
its out- and in-neighbours.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Optional, Sequence

from .errors import InvalidParameter

PRNG_ID = "python-random-mt19937/getrandbits"


def pair_count(n: int) -> int:
    return n * (n - 1) // 2


def iter_pairs(n: int):
    for i in range(n):
        for j in range(i + 1, n):
            yield i, j


def node_set(nodes: Iterable[int], n: Optional[int] = None) -> tuple:
    """Normalize ``nodes`` to a strictly increasing tuple, checking bounds."""
    s = tuple(sorted(set(nodes)))
    if n is not None and s and (s[0] < 0 or s[-1] >= n):
        raise InvalidParameter(f"node set {s} out of range for n={n}")
    return s


def mask_of(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


def bits_of(mask: int) -> list:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def lowest_bit(mask: int) -> Optional[int]:
    if not mask:
        return None
    return (mask & -mask).bit_length() - 1


@dataclass(frozen=True)
class Tournament:
    n: int
    orientation: str
    generator: dict = field(default_factory=lambda: {"kind": "explicit"}, compare=False)
    out_masks: tuple = field(init=False, repr=False, compare=False)
    in_masks: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise InvalidParameter("a tournament needs at least one node")
        if len(self.orientation) != pair_count(self.n):
            raise InvalidParameter(
                f"orientation has length {len(self.orientation)}, "
                f"expected {pair_count(self.n)}"
            )
        if set(self.orientation) - {"0", "1"}:
            raise InvalidParameter("orientation must be a string of '0'/'1'")
        out = [0] * self.n
        inn = [0] * self.n
        for bit, (i, j) in zip(self.orientation, iter_pairs(self.n)):
            if bit == "1":
                out[i] |= 1 << j
                inn[j] |= 1 << i
            else:
                out[j] |= 1 << i
                inn[i] |= 1 << j
        object.__setattr__(self, "out_masks", tuple(out))
        object.__setattr__(self, "in_masks", tuple(inn))

    @classmethod
    def from_arcs(cls, n: int, arcs: Iterable[Sequence[int]], generator=None):
        """Build from an explicit arc list; every pair must appear exactly once."""
        index = {p: t for t, p in enumerate(iter_pairs(n))}
        bits = [None] * pair_count(n)
        for u, v in arcs:
            if u == v:
                raise InvalidParameter(f"self-loop at {u}")
            key = (min(u, v), max(u, v))
            if key not in index:
                raise InvalidParameter(f"arc {(u, v)} out of range")
            t = index[key]
            if bits[t] is not None:
                raise InvalidParameter(f"pair {key} oriented twice")
            bits[t] = "1" if u < v else "0"
        if None in bits:
            raise InvalidParameter("some pair has no arc")
        return cls(n, "".join(bits), generator or {"kind": "explicit"})

    def has_arc(self, u: int, v: int) -> bool:
        return bool(self.out_masks[u] >> v & 1)

    def out_neighbors(self, u: int) -> list:
        return bits_of(self.out_masks[u])

    def out_degree(self, u: int) -> int:
        return self.out_masks[u].bit_count()

    def in_degree(self, u: int) -> int:
        return self.in_masks[u].bit_count()

    def arcs(self) -> list:
        return [(u, v) for u in range(self.n) for v in bits_of(self.out_masks[u])]

    def relabel(self, perm: Sequence[int]) -> "Tournament":
        """The tournament with node ``v`` renamed ``perm[v]``."""
        return Tournament.from_arcs(self.n, [(perm[u], perm[v]) for u, v in self.arcs()])

    def to_json(self) -> dict:
        return {"n": self.n, "orientation": self.orientation, "generator": dict(self.generator)}

    @classmethod
    def from_json(cls, data: dict) -> "Tournament":
        try:
            return cls(int(data["n"]), str(data["orientation"]), dict(data.get("generator", {"kind": "explicit"})))
        except KeyError as exc:
            raise InvalidParameter(f"tournament JSON missing field {exc}") from None


def random_tournament(n: int, seed: int) -> Tournament:
    """Orient every pair by an independent fair coin.

    The coins are the bits of one ``getrandbits`` call on a Mersenne Twister
    seeded with ``seed``; bit ``t`` (least significant first) orients pair ``t``.
    """
    if n < 1:
        raise InvalidParameter("n must be at least 1")
    npairs = pair_count(n)
    word = random.Random(seed).getrandbits(npairs) if npairs else 0
    bits = "".join("1" if word >> t & 1 else "0" for t in range(npairs))
    return Tournament(n, bits, {"kind": "random", "seed": seed, "prng": PRNG_ID})


def is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    d = 3
    while d * d <= q:
        if q % d == 0:
            return False
        d += 2
    return True


def quadratic_residues(q: int) -> set:
    return {x * x % q for x in range(1, q)}


def paley_tournament(q: int) -> Tournament:
    """Arc ``i -> j`` iff ``j - i`` is a nonzero square mod ``q``.

    Requires ``q`` prime with ``q % 4 == 3``, which makes ``-1`` a
    non-residue so exactly one direction of every pair is a residue.
    """
    if not is_prime(q) or q % 4 != 3:
        raise InvalidParameter(f"q={q} must be a prime congruent to 3 mod 4")
    res = quadratic_residues(q)
    bits = "".join("1" if (j - i) % q in res else "0" for i, j in iter_pairs(q))
    return Tournament(q, bits, {"kind": "paley", "q": q})


def paley_primes(limit: int):
    """Primes ``q <= limit`` with ``q % 4 == 3``, ascending."""
    return [q for q in range(3, limit + 1, 4) if is_prime(q)]


def dominators_mask(T: Tournament, S: Sequence[int]) -> int:
    """Bitmask of all nodes with an arc to every member of ``S``.

    No member of ``S`` can appear: the in-mask of ``v`` never contains ``v``.
    """
    m = (1 << T.n) - 1
    for v in S:
        m &= T.in_masks[v]
    return m


def dominates(T: Tournament, u: int, S: Sequence[int]) -> bool:
    if not 0 <= u < T.n:
        raise InvalidParameter(f"node {u} out of range")
    mask = mask_of(S)
    if mask >> u & 1:
        return False
    return mask & ~T.out_masks[u] == 0


def find_dominator(T: Tournament, S: Sequence[int]) -> Optional[int]:
    """Smallest node dominating ``S``, or None."""
    return lowest_bit(dominators_mask(T, node_set(S, T.n)))


def is_m_dominated(T: Tournament, m: int):
    """Check that every node set of size at most ``m`` has a dominator.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness is the
    first undominated set in size-then-lex order, hence a smallest one.
    """
    if m < 1 or m >= T.n:
        raise InvalidParameter(f"need 1 <= m < n, got m={m}, n={T.n}")
    inn = T.in_masks
    full = (1 << T.n) - 1
    for size in range(1, m + 1):
        for S in combinations(range(T.n), size):
            d = full
            for v in S:
                d &= inn[v]
                if not d:
                    return False, S
    return True, None


def smallest_dominated_paley(m: int, limit: int = 500) -> Optional[int]:
    """Smallest prime ``q = 3 mod 4`` whose Paley tournament is ``m``-dominated."""
    for q in paley_primes(limit):
        if q <= m:
            continue
        if is_m_dominated(paley_tournament(q), m)[0]:
            return q
    return None
