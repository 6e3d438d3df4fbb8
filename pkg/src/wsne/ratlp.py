"""Exact linear programming over the rationals.

A dense two-phase tableau simplex on ``fractions.Fraction`` with Bland's
rule. Problems are stated as

    minimize c.x  subject to  a_i.x (<=|=|>=) b_i,  lo_j <= x_j <= hi_j

with ``None`` for a missing bound. Every answer carries a certificate that
:func:`verify` checks without re-running the solver:

* optimal: row multipliers ``y`` whose Lagrangian bound equals ``c.x``;
* infeasible: row multipliers proving the constraints contradictory;
* unbounded: a feasible point plus an improving recession direction.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional, Sequence

from .errors import InvalidParameter

LE, EQ, GE = "<=", "=", ">="
OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"
SOLVER_ID = "wsne.ratlp/two-phase-tableau-bland"

_ZERO = Fraction(0)
_ONE = Fraction(1)


def frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


def frac_str(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass
class LinearProgram:
    objective: list
    constraints: list = field(default_factory=list)  # (row, relation, rhs)
    lower: Optional[list] = None
    upper: Optional[list] = None

    def __post_init__(self):
        self.objective = [frac(c) for c in self.objective]
        nv = len(self.objective)
        rows = []
        for row, rel, rhs in self.constraints:
            if len(row) != nv:
                raise InvalidParameter(f"constraint row has length {len(row)}, expected {nv}")
            if rel not in (LE, EQ, GE):
                raise InvalidParameter(f"unknown relation {rel!r}")
            rows.append(([frac(a) for a in row], rel, frac(rhs)))
        self.constraints = rows
        self.lower = [_ZERO] * nv if self.lower is None else [None if b is None else frac(b) for b in self.lower]
        self.upper = [None] * nv if self.upper is None else [None if b is None else frac(b) for b in self.upper]
        if len(self.lower) != nv or len(self.upper) != nv:
            raise InvalidParameter("bound vectors must match the variable count")

    @property
    def num_vars(self) -> int:
        return len(self.objective)


@dataclass
class LpSolution:
    status: str
    value: Optional[Fraction] = None
    x: Optional[list] = None
    duals: Optional[list] = None   # one multiplier per constraint row
    ray: Optional[list] = None     # improving direction when unbounded

    def to_json(self) -> dict:
        out = {"status": self.status}
        if self.value is not None:
            out["value"] = frac_str(self.value)
        if self.x is not None:
            out["x"] = [frac_str(v) for v in self.x]
        if self.duals is not None:
            out["duals"] = [frac_str(v) for v in self.duals]
        if self.ray is not None:
            out["ray"] = [frac_str(v) for v in self.ray]
        return out


# -- standard form -----------------------------------------------------------
#
# Each original variable x_j becomes  x_j = off_j + sum_t coef_t * z_t  over
# nonnegative standard columns z. Box-bounded variables get an extra
# "z <= hi - lo" row. Rows whose rhs is negative are negated.


def _standardize(lp: LinearProgram):
    columns = []      # per original var: list of (std column index, coefficient)
    offsets = []
    ncols = 0
    extra_rows = []   # (std col, ub) for box constraints
    for lo, hi in zip(lp.lower, lp.upper):
        if lo is not None and hi is not None and lo > hi:
            return None  # empty box
        if lo is not None:
            columns.append([(ncols, _ONE)])
            offsets.append(lo)
            if hi is not None:
                extra_rows.append((ncols, hi - lo))
            ncols += 1
        elif hi is not None:
            columns.append([(ncols, -_ONE)])
            offsets.append(hi)
            ncols += 1
        else:
            columns.append([(ncols, _ONE), (ncols + 1, -_ONE)])
            offsets.append(_ZERO)
            ncols += 2

    rows, rels, rhs = [], [], []
    for a, rel, b in lp.constraints:
        r = [_ZERO] * ncols
        shift = _ZERO
        for j, aj in enumerate(a):
            if aj:
                shift += aj * offsets[j]
                for t, c in columns[j]:
                    r[t] += aj * c
        rows.append(r)
        rels.append(rel)
        rhs.append(b - shift)
    for t, ub in extra_rows:
        r = [_ZERO] * ncols
        r[t] = _ONE
        rows.append(r)
        rels.append(LE)
        rhs.append(ub)

    cost = [_ZERO] * ncols
    const = _ZERO
    for j, cj in enumerate(lp.objective):
        const += cj * offsets[j]
        for t, c in columns[j]:
            cost[t] += cj * c
    return columns, offsets, ncols, rows, rels, rhs, cost, const


class _Tableau:
    """Dense tableau ``T[i] = [row coefficients..., rhs]`` with a basis list."""

    def __init__(self, rows, rhs, basis):
        self.T = [r + [b] for r, b in zip(rows, rhs)]
        self.basis = basis

    def pivot(self, r, c):
        T = self.T
        prow = T[r]
        piv = prow[c]
        if piv != 1:
            prow = [v / piv for v in prow]
            T[r] = prow
        nz = [t for t, v in enumerate(prow) if v]
        for i, row in enumerate(T):
            if i != r:
                f = row[c]
                if f:
                    for t in nz:
                        row[t] -= f * prow[t]
        self.basis[r] = c

    def reduced_costs(self, cost, allowed):
        """Reduced costs c_j - c_B B^-1 a_j for the ``allowed`` columns."""
        T = self.T
        cb = [cost[b] for b in self.basis]
        out = {}
        for j in allowed:
            d = cost[j]
            for i, row in enumerate(T):
                if row[j] and cb[i]:
                    d -= cb[i] * row[j]
            out[j] = d
        return out

    def run(self, cost, allowed):
        """Minimize ``cost`` with Bland's rule; returns None or the unbounded column."""
        allowed = sorted(allowed)
        while True:
            d = self.reduced_costs(cost, allowed)
            entering = next((j for j in allowed if d[j] < 0), None)
            if entering is None:
                return None
            best = None
            for i, row in enumerate(self.T):
                a = row[entering]
                if a > 0:
                    ratio = row[-1] / a
                    key = (ratio, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return entering
            self.pivot(best[1], entering)

    def values(self, ncols):
        z = [_ZERO] * ncols
        for i, b in enumerate(self.basis):
            if b < ncols:
                z[b] = self.T[i][-1]
        return z


def solve(lp: LinearProgram) -> LpSolution:
    """Solve ``lp`` exactly. The primal answer is a basic solution."""
    std = _standardize(lp)
    if std is None:
        # Contradictory bounds: no row multipliers needed, verify detects it directly.
        return LpSolution(INFEASIBLE, duals=[_ZERO] * len(lp.constraints))
    columns, offsets, ncols, rows, rels, rhs, cost, _ = std
    m = len(rows)

    # Row i gets a slack (<=: +s, >=: -s); then rows with negative rhs are
    # negated. A +1 slack after that is a ready basic column; otherwise an
    # artificial is added.
    sign = []
    slack_of = {}
    col = ncols
    for i, rel in enumerate(rels):
        if rel != EQ:
            coef = _ONE if rel == LE else -_ONE
            slack_of[i] = (col, coef)
            col += 1
    nslack_end = col
    full_rows = []
    for i in range(m):
        r = rows[i] + [_ZERO] * (nslack_end - ncols)
        if i in slack_of:
            c, coef = slack_of[i]
            r[c] = coef
        b = rhs[i]
        s = 1
        if b < 0:
            r = [-v for v in r]
            b = -b
            s = -1
        sign.append(s)
        full_rows.append((r, b))

    basis = []
    unit_col = []      # column holding +e_i in the initial tableau
    art_cols = []
    for i, (r, b) in enumerate(full_rows):
        if i in slack_of and r[slack_of[i][0]] == 1:
            basis.append(slack_of[i][0])
            unit_col.append(slack_of[i][0])
        else:
            basis.append(None)
            unit_col.append(None)
    total = nslack_end + sum(1 for b in basis if b is None)
    tab_rows = []
    next_art = nslack_end
    for i, (r, b) in enumerate(full_rows):
        r = r + [_ZERO] * (total - nslack_end)
        if basis[i] is None:
            r[next_art] = _ONE
            basis[i] = next_art
            unit_col[i] = next_art
            art_cols.append(next_art)
            next_art += 1
        tab_rows.append(r)
    tab = _Tableau(tab_rows, [b for _, b in full_rows], basis)
    structural = range(nslack_end)

    def row_duals(costs):
        # y_std = c_B B^-1; reading it off the unit columns: y_i = c_unit - d_unit.
        d = tab.reduced_costs(costs, unit_col)
        return [(costs[unit_col[i]] - d[unit_col[i]]) * sign[i] for i in range(m)]

    def original_point(z):
        return [off + sum((c * z[t] for t, c in cols), _ZERO) for off, cols in zip(offsets, columns)]

    if art_cols:
        c1 = [_ZERO] * total
        for a in art_cols:
            c1[a] = _ONE
        tab.run(c1, range(total))
        infeas = sum((tab.T[i][-1] for i, b in enumerate(tab.basis) if b in art_cols), _ZERO)
        if infeas > 0:
            y = row_duals(c1)
            return LpSolution(INFEASIBLE, duals=y[: len(lp.constraints)])
        # drive zero-valued artificials out of the basis where possible
        art_set = set(art_cols)
        for i, b in enumerate(tab.basis):
            if b in art_set:
                j = next((t for t in structural if tab.T[i][t] != 0), None)
                if j is not None:
                    tab.pivot(i, j)

    c2 = cost + [_ZERO] * (total - ncols)
    art_set = set(art_cols)
    # Artificials still basic (at zero) sit on redundant rows; they never re-enter.
    allowed = [j for j in range(total) if j not in art_set]
    unbounded_col = tab.run(c2, allowed)
    z = tab.values(ncols)
    x = original_point(z)
    if unbounded_col is not None:
        dz = [_ZERO] * ncols
        if unbounded_col < ncols:
            dz[unbounded_col] = _ONE
        for i, b in enumerate(tab.basis):
            if b < ncols:
                dz[b] -= tab.T[i][unbounded_col]
        ray = [sum((c * dz[t] for t, c in cols), _ZERO) for cols in columns]
        return LpSolution(UNBOUNDED, x=x, ray=ray)
    value = sum((c * v for c, v in zip(lp.objective, x)), _ZERO)
    y = row_duals(c2)
    return LpSolution(OPTIMAL, value=value, x=x, duals=y[: len(lp.constraints)])


# -- verification ------------------------------------------------------------


def _dot(a, b):
    return sum((u * v for u, v in zip(a, b)), _ZERO)


def is_feasible(lp: LinearProgram, x: Sequence) -> bool:
    if x is None or len(x) != lp.num_vars:
        return False
    for j, v in enumerate(x):
        if lp.lower[j] is not None and v < lp.lower[j]:
            return False
        if lp.upper[j] is not None and v > lp.upper[j]:
            return False
    for a, rel, b in lp.constraints:
        s = _dot(a, x)
        if (rel == LE and s > b) or (rel == GE and s < b) or (rel == EQ and s != b):
            return False
    return True


def lagrangian_bound(lp: LinearProgram, y: Sequence, objective: Optional[Sequence] = None):
    """Lower bound on ``objective.x`` over the feasible set implied by multipliers ``y``.

    Returns None when ``y`` has the wrong sign for some row or the bound
    would be minus infinity.
    """
    c = lp.objective if objective is None else objective
    if y is None or len(y) != len(lp.constraints):
        return None
    r = list(c)
    bound = _ZERO
    for (a, rel, b), yi in zip(lp.constraints, y):
        if (rel == LE and yi > 0) or (rel == GE and yi < 0):
            return None
        bound += yi * b
        if yi:
            for j, aj in enumerate(a):
                r[j] -= yi * aj
    for j, rj in enumerate(r):
        if rj > 0:
            if lp.lower[j] is None:
                return None
            bound += rj * lp.lower[j]
        elif rj < 0:
            if lp.upper[j] is None:
                return None
            bound += rj * lp.upper[j]
    return bound


def _is_recession_direction(lp, d):
    for j, v in enumerate(d):
        if lp.lower[j] is not None and v < 0:
            return False
        if lp.upper[j] is not None and v > 0:
            return False
    for a, rel, _ in lp.constraints:
        s = _dot(a, d)
        if (rel == LE and s > 0) or (rel == GE and s < 0) or (rel == EQ and s != 0):
            return False
    return True


def _hyperplanes(lp):
    hs = [(list(a), b) for a, _, b in lp.constraints]
    nv = lp.num_vars
    for j in range(nv):
        for bound in (lp.lower[j], lp.upper[j]):
            if bound is not None:
                e = [_ZERO] * nv
                e[j] = _ONE
                hs.append((e, bound))
    return hs


def solve_square(M, rhs):
    """Solve ``M x = rhs`` exactly; None if ``M`` is singular."""
    n = len(M)
    aug = [list(row) + [b] for row, b in zip(M, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if aug[r][col] != 0), None)
        if piv is None:
            return None
        aug[col], aug[piv] = aug[piv], aug[col]
        p = aug[col][col]
        aug[col] = [v / p for v in aug[col]]
        for r in range(n):
            if r != col and aug[r][col]:
                f = aug[r][col]
                aug[r] = [u - f * v for u, v in zip(aug[r], aug[col])]
    return [aug[r][n] for r in range(n)]


def enumerate_vertices(lp: LinearProgram, limit: Optional[int] = None):
    """All feasible basic points, or None if more than ``limit`` bases would be tried."""
    hs = _hyperplanes(lp)
    nv = lp.num_vars
    if limit is not None:
        from math import comb
        if comb(len(hs), nv) > limit:
            return None
    found = []
    seen = set()
    for idx in combinations(range(len(hs)), nv):
        x = solve_square([hs[i][0] for i in idx], [hs[i][1] for i in idx])
        if x is None:
            continue
        key = tuple(x)
        if key not in seen and is_feasible(lp, x):
            seen.add(key)
            found.append(x)
    return found


def _rank(rows):
    rows = [list(r) for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for col in range(ncols):
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col]:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [u - f * v for u, v in zip(rows[r], rows[rank])]
        rank += 1
    return rank


def verify(lp: LinearProgram, claimed: LpSolution, vertex_limit: int = 20_000) -> bool:
    """Independently check a claimed solution.

    Certificates are checked by direct evaluation. When the problem is small
    (at most ``vertex_limit`` candidate bases) and its feasible region is
    pointed, optimality and infeasibility are also cross-checked against
    exhaustive vertex enumeration.
    """
    if claimed.status == OPTIMAL:
        if not is_feasible(lp, claimed.x):
            return False
        value = _dot(lp.objective, claimed.x)
        if claimed.value is not None and claimed.value != value:
            return False
        if claimed.duals is not None:
            if lagrangian_bound(lp, claimed.duals) != value:
                return False
        verts = _pointed_vertices(lp, vertex_limit)
        if verts is not None:
            if not verts or min(_dot(lp.objective, v) for v in verts) != value:
                return False
        elif claimed.duals is None:
            return False
        return True
    if claimed.status == UNBOUNDED:
        if not is_feasible(lp, claimed.x) or claimed.ray is None:
            return False
        return _dot(lp.objective, claimed.ray) < 0 and _is_recession_direction(lp, claimed.ray)
    if claimed.status == INFEASIBLE:
        if any(lo is not None and hi is not None and lo > hi for lo, hi in zip(lp.lower, lp.upper)):
            return True
        zero = [_ZERO] * lp.num_vars
        b = lagrangian_bound(lp, claimed.duals, zero)
        if b is None or b <= 0:
            return False
        verts = _pointed_vertices(lp, vertex_limit)
        return verts is None or not verts
    return False


def _pointed_vertices(lp, limit):
    hs = _hyperplanes(lp)
    if not hs or _rank([h[0] for h in hs]) < lp.num_vars:
        return None
    return enumerate_vertices(lp, limit)
