"""Well-supported equilibria of win-lose games: evaluation and exact search.

For a fixed pair of candidate supports ``(S1, S2)`` the smallest achievable
epsilon splits into two independent linear programs. The row player's
conditions involve only the column strategy ``q`` and vice versa:

    row LP:  min e  s.t.  (Aq)_l - (Aq)_i <= e   for i in S1, every row l
    col LP:  min e  s.t.  (pB)_l - (pB)_j <= e   for j in S2, every column l

with ``q`` a distribution on ``S2`` and ``p`` one on ``S1``. The pair's value
is the larger optimum. Every designated support index is constrained even if
the optimum puts zero mass on it; searches stay exact because each subset of
a designated support is enumerated on its own.
"""

from __future__ import annotations

import logging
import random
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import Optional, Sequence

import numpy as np

from . import ratlp
from .auxgame import (
    Certificate,
    WinLoseGame,
    game_to_digraph,
    has_digon,
    is_k_covered,
    shortest_cycle,
    vertex_json,
)
from .errors import InvalidParameter
from .ratlp import frac_str

log = logging.getLogger(__name__)

_ZERO = Fraction(0)
_ONE = Fraction(1)
DEFAULT_SEARCH_BUDGET = 200_000


@dataclass(frozen=True)
class MixedStrategy:
    probs: tuple

    def __post_init__(self):
        probs = tuple(p if type(p) is Fraction else Fraction(p) for p in self.probs)
        if not probs:
            raise InvalidParameter("a mixed strategy needs at least one entry")
        nonzero = [p for p in probs if p]
        if any(p < 0 for p in nonzero):
            raise InvalidParameter("probabilities must be nonnegative")
        total = sum(nonzero, _ZERO)
        if total != 1:
            raise InvalidParameter(f"probabilities sum to {total}, not 1")
        object.__setattr__(self, "probs", probs)

    @classmethod
    def pure(cls, dim: int, i: int) -> "MixedStrategy":
        return cls(tuple(_ONE if t == i else _ZERO for t in range(dim)))

    @classmethod
    def uniform_on(cls, dim: int, support: Sequence[int]) -> "MixedStrategy":
        w = Fraction(1, len(support))
        s = set(support)
        return cls(tuple(w if t in s else _ZERO for t in range(dim)))

    @property
    def dimension(self) -> int:
        return len(self.probs)

    @property
    def support(self) -> tuple:
        return tuple(i for i, p in enumerate(self.probs) if p > 0)

    def to_json(self) -> list:
        return [frac_str(p) for p in self.probs]


@dataclass(frozen=True)
class Profile:
    p: MixedStrategy
    q: MixedStrategy

    def check(self, g: WinLoseGame):
        if self.p.dimension != g.m or self.q.dimension != g.n:
            raise InvalidParameter(
                f"profile dimensions ({self.p.dimension}, {self.q.dimension}) do not match game ({g.m}, {g.n})"
            )

    def to_json(self) -> dict:
        return {"p": self.p.to_json(), "q": self.q.to_json()}

    @classmethod
    def from_json(cls, data: dict) -> "Profile":
        try:
            return cls(MixedStrategy(tuple(Fraction(x) for x in data["p"])),
                       MixedStrategy(tuple(Fraction(x) for x in data["q"])))
        except KeyError as exc:
            raise InvalidParameter(f"profile JSON missing field {exc}") from None


@dataclass(frozen=True)
class SupportPair:
    S1: tuple
    S2: tuple

    def __post_init__(self):
        S1, S2 = tuple(sorted(set(self.S1))), tuple(sorted(set(self.S2)))
        if not S1 or not S2:
            raise InvalidParameter("supports must be non-empty")
        object.__setattr__(self, "S1", S1)
        object.__setattr__(self, "S2", S2)

    def check(self, g: WinLoseGame):
        if self.S1[0] < 0 or self.S1[-1] >= g.m or self.S2[0] < 0 or self.S2[-1] >= g.n:
            raise InvalidParameter(f"supports {self.S1}, {self.S2} out of range for a {g.m}x{g.n} game")

    def order_key(self):
        return support_key(self.S1) + support_key(self.S2)

    def to_json(self) -> dict:
        return {"S1": list(self.S1), "S2": list(self.S2)}


def support_key(S):
    """Size-then-colex order on index sets."""
    return (len(S), tuple(reversed(S)))


@dataclass
class EpsResult:
    eps: Fraction
    witness: Profile
    supports: SupportPair
    row_eps: Fraction = None
    col_eps: Fraction = None

    def to_json(self) -> dict:
        return {
            "eps": frac_str(self.eps),
            "row_eps": frac_str(self.row_eps),
            "col_eps": frac_str(self.col_eps),
            "witness": self.witness.to_json(),
            "supports": self.supports.to_json(),
        }


# -- payoffs -----------------------------------------------------------------


def row_payoffs(g: WinLoseGame, q: MixedStrategy) -> list:
    """Expected payoff ``(Aq)_i`` of every pure row against ``q``."""
    if q.dimension != g.n:
        raise InvalidParameter(f"column strategy has dimension {q.dimension}, game has {g.n} columns")
    supp = q.support
    cols = g.A[:, supp]
    w = [q.probs[j] for j in supp]
    return [sum((w[t] for t in np.flatnonzero(row)), _ZERO) for row in cols]


def col_payoffs(g: WinLoseGame, p: MixedStrategy) -> list:
    """Expected payoff ``(pB)_j`` of every pure column against ``p``."""
    if p.dimension != g.m:
        raise InvalidParameter(f"row strategy has dimension {p.dimension}, game has {g.m} rows")
    supp = p.support
    rows = g.B[supp, :].T
    w = [p.probs[i] for i in supp]
    return [sum((w[t] for t in np.flatnonzero(col)), _ZERO) for col in rows]


def wsne_epsilon(g: WinLoseGame, prof: Profile) -> Fraction:
    """Smallest epsilon for which ``prof`` is an epsilon-well-supported equilibrium."""
    prof.check(g)
    a = row_payoffs(g, prof.q)
    b = col_payoffs(g, prof.p)
    row_gap = max(a) - min(a[i] for i in prof.p.support)
    col_gap = max(b) - min(b[j] for j in prof.q.support)
    return max(row_gap, col_gap)


# -- per-support LPs ---------------------------------------------------------


def _gap_rows(P: np.ndarray, designated: Sequence[int], free: Sequence[int]) -> np.ndarray:
    """Distinct nonredundant rows ``P[l, free] - P[i, free]`` for ``i`` in ``designated``.

    ``P`` has one row per pure strategy of the player being constrained.
    Rows with no positive entry hold for every distribution and are dropped.
    """
    sub = P[:, free].astype(np.int16)
    diffs = (sub[None, :, :] - sub[list(designated)][:, None, :]).reshape(-1, len(free))
    diffs = np.unique(diffs, axis=0)
    return diffs[(diffs > 0).any(axis=1)]


def _eps_lp(diffs: np.ndarray, width: int) -> ratlp.LinearProgram:
    """min e over (x_1..x_width, e): x a distribution, diffs.x - e <= 0, 0 <= e <= 1."""
    cons = [([int(v) for v in row] + [-1], ratlp.LE, 0) for row in diffs]
    cons.append(([1] * width + [0], ratlp.EQ, 1))
    return ratlp.LinearProgram(
        objective=[0] * width + [1],
        constraints=cons,
        lower=[0] * (width + 1),
        upper=[None] * width + [1],
    )


def support_lps(g: WinLoseGame, sp: SupportPair):
    """The (row LP over q on S2, column LP over p on S1) for a support pair."""
    sp.check(g)
    row_lp = _eps_lp(_gap_rows(g.A, sp.S1, sp.S2), len(sp.S2))
    col_lp = _eps_lp(_gap_rows(g.B.T, sp.S2, sp.S1), len(sp.S1))
    return row_lp, col_lp


def _solve_eps(lp):
    sol = ratlp.solve(lp)
    if sol.status != ratlp.OPTIMAL:
        # A distribution with e = 1 always satisfies win-lose gap rows.
        raise AssertionError(f"epsilon LP unexpectedly {sol.status}")
    return sol


def min_eps_for_supports(g: WinLoseGame, sp: SupportPair, return_lps: bool = False):
    """Exact minimum epsilon over profiles supported inside ``sp``."""
    row_lp, col_lp = support_lps(g, sp)
    row_sol = _solve_eps(row_lp)
    col_sol = _solve_eps(col_lp)
    res = _assemble(g, sp, row_sol, col_sol)
    if return_lps:
        return res, ((row_lp, row_sol), (col_lp, col_sol))
    return res


def _assemble(g, sp, row_sol, col_sol):
    q = [_ZERO] * g.n
    for j, v in zip(sp.S2, row_sol.x):
        q[j] = v
    p = [_ZERO] * g.m
    for i, v in zip(sp.S1, col_sol.x):
        p[i] = v
    witness = Profile(MixedStrategy(tuple(p)), MixedStrategy(tuple(q)))
    return EpsResult(max(row_sol.value, col_sol.value), witness, sp, row_sol.value, col_sol.value)


# -- bounded-support search --------------------------------------------------


@dataclass
class SearchResult:
    best: Optional[EpsResult]
    max_support: int
    exhaustive: bool
    pairs_total: int
    pairs_evaluated: int
    lps_solved: int
    seed: Optional[int] = None
    wall_time: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {
            "max_support": self.max_support,
            "exhaustive": self.exhaustive,
            "eps": None if self.best is None else frac_str(self.best.eps),
            "result": None if self.best is None else self.best.to_json(),
            "stats": {
                "pairs_total": self.pairs_total,
                "pairs_evaluated": self.pairs_evaluated,
                "lps_solved": self.lps_solved,
            },
            "solver": ratlp.SOLVER_ID,
        }
        if self.seed is not None:
            out["sample_seed"] = self.seed
        out.update(self.extra)
        return out


def supports_up_to(size: int, s: int) -> list:
    """All non-empty subsets of ``range(size)`` with at most ``s`` elements, size-then-colex."""
    out = []
    for a in range(1, min(s, size) + 1):
        out.extend(sorted(combinations(range(size), a), key=lambda t: t[::-1]))
    return out


def count_support_pairs(m: int, n: int, s: int) -> int:
    return sum(comb(m, a) for a in range(1, min(s, m) + 1)) * sum(comb(n, b) for b in range(1, min(s, n) + 1))


def _scan(g, pairs, best_eps=None):
    """Minimum over ``pairs`` (already in tie-break order); first strict minimum wins."""
    best = None
    evaluated = lps = 0
    for S1, S2 in pairs:
        sp = SupportPair(S1, S2)
        row_lp, col_lp = support_lps(g, sp)
        evaluated += 1
        row_sol = _solve_eps(row_lp)
        lps += 1
        if best is not None and row_sol.value >= best.eps:
            continue
        col_sol = _solve_eps(col_lp)
        lps += 1
        res = _assemble(g, sp, row_sol, col_sol)
        if best is None or res.eps < best.eps:
            best = res
            if best.eps == 0:
                break
    return best, evaluated, lps


def _scan_chunk(args):
    g, s1_list, s2_list = args
    return _scan(g, ((S1, S2) for S1 in s1_list for S2 in s2_list))


def _reduce(results):
    best = None
    ev = lp = 0
    for res, e, n in results:
        ev += e
        lp += n
        if res is None:
            continue
        if best is None or (res.eps, res.supports.order_key()) < (best.eps, best.supports.order_key()):
            best = res
    return best, ev, lp


def best_wsne_up_to_support(g: WinLoseGame, s: int, budget: int = DEFAULT_SEARCH_BUDGET,
                            seed: int = 0, jobs: int = 1) -> SearchResult:
    """Minimum epsilon over all support pairs with both sizes at most ``s``.

    Exhaustive when the number of pairs fits in ``budget``; otherwise
    ``budget`` pairs are sampled with ``seed`` and the result is flagged
    ``exhaustive=False``. Ties go to the smallest pair in size-then-colex
    order of ``S1``, then of ``S2``.
    """
    if s < 1 or s > min(g.m, g.n):
        raise InvalidParameter(f"need 1 <= s <= min(m, n) = {min(g.m, g.n)}, got {s}")
    t0 = time.perf_counter()
    total = count_support_pairs(g.m, g.n, s)
    if total <= budget:
        rows = supports_up_to(g.m, s)
        cols = supports_up_to(g.n, s)
        if jobs > 1 and len(rows) > 1:
            chunks = [rows[t::jobs] for t in range(jobs)]
            with ProcessPoolExecutor(max_workers=jobs) as ex:
                best, ev, lps = _reduce(ex.map(_scan_chunk, [(g, c, cols) for c in chunks if c]))
        else:
            best, ev, lps = _scan(g, ((S1, S2) for S1 in rows for S2 in cols))
        return SearchResult(best, s, True, total, ev, lps, wall_time=time.perf_counter() - t0)
    pairs = sample_support_pairs(g.m, g.n, s, budget, seed)
    pairs.sort(key=lambda pr: support_key(pr[0]) + support_key(pr[1]))
    best, ev, lps = _scan(g, pairs)
    log.warning("support space has %d pairs, budget %d: sampled, result is not exhaustive", total, budget)
    return SearchResult(best, s, False, total, ev, lps, seed=seed, wall_time=time.perf_counter() - t0)


def sample_support_pairs(m: int, n: int, s: int, count: int, seed: int) -> list:
    """``count`` distinct support pairs drawn uniformly (bounded by the pair space)."""
    rng = random.Random(seed)
    total = count_support_pairs(m, n, s)
    count = min(count, total)
    wr = [comb(m, a) for a in range(1, min(s, m) + 1)]
    wc = [comb(n, b) for b in range(1, min(s, n) + 1)]
    seen = set()
    while len(seen) < count:
        a = rng.choices(range(1, len(wr) + 1), weights=wr)[0]
        b = rng.choices(range(1, len(wc) + 1), weights=wc)[0]
        S1 = tuple(sorted(rng.sample(range(m), a)))
        S2 = tuple(sorted(rng.sample(range(n), b)))
        seen.add((S1, S2))
    return list(seen)


# -- combinatorial certificate -----------------------------------------------


def certify_no_small_wsne(g: WinLoseGame, s: int, eps_threshold=1, tournament=None,
                          construction_k: Optional[int] = None, cover_budget: int = 5_000_000) -> Certificate:
    """Certify that no profile with supports of size at most ``s`` is an epsilon-WSNE for epsilon < 1.

    Hypotheses, each reported as a sub-certificate:
      * the game digraph is s-covered, so every best response earns exactly 1;
      * it has no digon;
      * its shortest directed cycle is longer than 2s.
    Under them the subgraph induced by two supports has at most 2s vertices
    and no cycle, so some supported strategy receives no arc from the other
    support and earns 0 while a best response earns 1.

    With ``tournament`` (and ``construction_k``) coverage is certified through
    domination of the tournament instead of exhaustive enumeration.
    """
    if Fraction(eps_threshold) != 1:
        raise InvalidParameter("the coverage/girth argument only certifies the threshold 1")
    G = game_to_digraph(g)
    if s < 1 or s > min(G.left_size, G.right_size):
        raise InvalidParameter(f"need 1 <= s <= min(m, n), got {s}")
    if tournament is not None:
        cov = is_k_covered(G, s, "sufficient", tournament=tournament,
                           construction_k=construction_k, budget=cover_budget)
        if cov.holds is None:
            cov = is_k_covered(G, s, "exact", budget=cover_budget)
    else:
        cov = is_k_covered(G, s, "exact", budget=cover_budget)
    digon = has_digon(G)
    cyc = shortest_cycle(G)
    girth = None if cyc is None else len(cyc)
    dig_cert = Certificate("no digon", digon is None, "exact",
                           None if digon is None else [vertex_json(v) for v in digon])
    cyc_cert = Certificate(f"no cycle of length <= {2 * s}", girth is None or girth > 2 * s, "exact",
                           None if girth is None or girth > 2 * s else [vertex_json(v) for v in cyc],
                           {"shortest_cycle_length": girth})
    subs = {"coverage": cov, "digon": dig_cert, "cycles": cyc_cert}
    failed = [name for name, c in subs.items() if c.holds is not True]
    holds = not failed
    details = {name: c.to_json() for name, c in subs.items()}
    if failed:
        details["failed_hypotheses"] = failed
    return Certificate(f"no {s}-support eps-WSNE with eps < 1", holds, "combinatorial", None, details)
