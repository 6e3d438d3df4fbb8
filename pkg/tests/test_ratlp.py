import random
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from scipy.optimize import linprog

from wsne import ratlp
from wsne.errors import InvalidParameter
from wsne.ratlp import EQ, GE, INFEASIBLE, LE, OPTIMAL, UNBOUNDED, LinearProgram, LpSolution, solve, verify


def gauss(M, b):
    """Independent exact solver for the oracle below."""
    n = len(M)
    A = [[Fraction(v) for v in row] + [Fraction(bb)] for row, bb in zip(M, b)]
    for c in range(n):
        p = next((r for r in range(c, n) if A[r][c] != 0), None)
        if p is None:
            return None
        A[c], A[p] = A[p], A[c]
        for r in range(n):
            if r != c and A[r][c] != 0:
                f = A[r][c] / A[c][c]
                A[r] = [x - f * y for x, y in zip(A[r], A[c])]
    return [A[r][n] / A[r][r] for r in range(n)]


def vertex_oracle(lp):
    """Best objective over all basic feasible points (None if there are none)."""
    planes = [(a, b) for a, _, b in lp.constraints]
    for j in range(lp.num_vars):
        for bound in (lp.lower[j], lp.upper[j]):
            if bound is not None:
                planes.append(([1 if t == j else 0 for t in range(lp.num_vars)], bound))
    best = None
    for idx in combinations(range(len(planes)), lp.num_vars):
        x = gauss([planes[i][0] for i in idx], [planes[i][1] for i in idx])
        if x is None or not ratlp.is_feasible(lp, x):
            continue
        v = sum(c * xi for c, xi in zip(lp.objective, x))
        best = v if best is None else min(best, v)
    return best


def random_lp(rng, nv, nc, bounded=True):
    cons = []
    for _ in range(nc):
        row = [rng.randint(-4, 4) for _ in range(nv)]
        rel = rng.choice([LE, LE, GE, EQ]) if rng.random() < 0.9 else EQ
        cons.append((row, rel, rng.randint(-6, 8)))
    lower = [0 if rng.random() < 0.8 else None for _ in range(nv)]
    upper = [rng.randint(1, 6) if (bounded or rng.random() < 0.5) else None for _ in range(nv)]
    return LinearProgram([rng.randint(-5, 5) for _ in range(nv)], cons, lower, upper)


def scipy_value(lp):
    A_ub, b_ub, A_eq, b_eq = [], [], [], []
    for a, rel, b in lp.constraints:
        a = [float(v) for v in a]
        if rel == LE:
            A_ub.append(a); b_ub.append(float(b))
        elif rel == GE:
            A_ub.append([-v for v in a]); b_ub.append(-float(b))
        else:
            A_eq.append(a); b_eq.append(float(b))
    bounds = [(None if lo is None else float(lo), None if hi is None else float(hi))
              for lo, hi in zip(lp.lower, lp.upper)]
    r = linprog([float(c) for c in lp.objective], A_ub=A_ub or None, b_ub=b_ub or None,
                A_eq=A_eq or None, b_eq=b_eq or None, bounds=bounds, method="highs")
    return {0: OPTIMAL, 2: INFEASIBLE, 3: UNBOUNDED}.get(r.status), r.fun


class TestExamples:
    def test_lower_bound(self):
        s = solve(LinearProgram([1], [([1], GE, 3)]))
        assert s.status == OPTIMAL and s.value == 3 and s.x == [3]

    def test_infeasible(self):
        s = solve(LinearProgram([0], [([1], LE, -1)]))
        assert s.status == INFEASIBLE

    def test_unbounded(self):
        s = solve(LinearProgram([-1], []))
        assert s.status == UNBOUNDED
        assert s.ray == [1]

    def test_dimension_mismatch(self):
        with pytest.raises(InvalidParameter):
            LinearProgram([1, 2], [([1], LE, 0)])

    def test_free_and_upper_only(self):
        lp = LinearProgram([1, -1], [([1, 1], EQ, 1)], lower=[None, None], upper=[5, 2])
        s = solve(lp)
        assert s.status == OPTIMAL and s.value == -3 and s.x == [-1, 2]
        assert verify(lp, s)

    def test_degenerate_cycling_example(self):
        # Beale's example cycles under the textbook largest-coefficient rule
        lp = LinearProgram(
            [Fraction(-3, 4), 150, Fraction(-1, 50), 6],
            [
                ([Fraction(1, 4), -60, Fraction(-1, 25), 9], LE, 0),
                ([Fraction(1, 2), -90, Fraction(-1, 50), 3], LE, 0),
                ([0, 0, 1, 0], LE, 1),
            ],
        )
        s = solve(lp)
        assert s.status == OPTIMAL and s.value == Fraction(-1, 20)
        assert verify(lp, s)

    def test_serialization(self):
        s = solve(LinearProgram([1, 1], [([1, 2], GE, 4), ([3, 1], GE, 6)]))
        assert s.to_json()["value"] == "14/5"
        assert ratlp.frac_str(Fraction(-4, 6)) == "-2/3"


class TestVerify:
    def test_perturbed_assignment(self):
        lp = LinearProgram([1, 1], [([1, 2], GE, 4), ([3, 1], GE, 6)])
        s = solve(lp)
        bad = LpSolution(OPTIMAL, s.value - Fraction(1, 10), [s.x[0] - Fraction(1, 10), s.x[1]], s.duals)
        assert not verify(lp, bad)

    def test_suboptimal_vertex(self):
        lp = LinearProgram([1, 1], [([1, 2], GE, 4), ([3, 1], GE, 6)])
        worse = LpSolution(OPTIMAL, Fraction(4), [Fraction(0), Fraction(6)])  # a vertex, value 6 > 14/5
        worse.value = Fraction(6)
        assert ratlp.is_feasible(lp, worse.x)
        assert not verify(lp, worse)

    def test_wrong_duals(self):
        lp = LinearProgram([1, 1], [([1, 2], GE, 4), ([3, 1], GE, 6)])
        s = solve(lp)
        s.duals = [Fraction(1), Fraction(0)]
        assert not verify(lp, s)

    def test_false_infeasibility_claim(self):
        lp = LinearProgram([1], [([1], GE, 3)])
        assert not verify(lp, LpSolution(INFEASIBLE, duals=[Fraction(1)]))

    def test_false_unbounded_claim(self):
        lp = LinearProgram([1], [([1], GE, 3)])
        assert not verify(lp, LpSolution(UNBOUNDED, x=[Fraction(3)], ray=[Fraction(1)]))


class TestRandom:
    @pytest.mark.parametrize("seed", range(200))
    def test_self_consistent(self, seed):
        rng = random.Random(seed)
        lp = random_lp(rng, rng.randint(1, 4), rng.randint(1, 6), bounded=rng.random() < 0.5)
        s = solve(lp)
        assert verify(lp, s)
        status, fun = scipy_value(lp)
        assert status == s.status
        if s.status == OPTIMAL:
            assert float(s.value) == pytest.approx(fun, abs=1e-7)

    @pytest.mark.parametrize("seed", range(60))
    def test_matches_vertex_oracle(self, seed):
        rng = random.Random(1000 + seed)
        lp = random_lp(rng, rng.randint(2, 4), rng.randint(2, 7), bounded=True)
        lp = LinearProgram(lp.objective, lp.constraints, [0] * lp.num_vars, lp.upper)  # boxed
        s = solve(lp)
        best = vertex_oracle(lp)
        if best is None:
            assert s.status == INFEASIBLE
        else:
            assert s.status == OPTIMAL and s.value == best

    @pytest.mark.parametrize("seed", range(2))
    def test_matches_vertex_oracle_six_vars(self, seed):
        rng = random.Random(5000 + seed)
        nv, nc = 6, 5
        cons = [([rng.randint(-3, 3) for _ in range(nv)], LE, rng.randint(1, 9)) for _ in range(nc)]
        lp = LinearProgram([rng.randint(-4, 4) for _ in range(nv)], cons, [0] * nv, [3] * nv)
        s = solve(lp)
        assert s.status == OPTIMAL and s.value == vertex_oracle(lp)

    def test_solution_is_a_vertex(self):
        rng = random.Random(7)
        for _ in range(40):
            lp = random_lp(rng, 3, 5, bounded=True)
            s = solve(lp)
            if s.status != OPTIMAL:
                continue
            # active hyperplanes at x must span the space
            rows = [a for a, _, b in lp.constraints if sum(ai * xi for ai, xi in zip(a, s.x)) == b]
            for j in range(3):
                if s.x[j] in (lp.lower[j], lp.upper[j]):
                    rows.append([1 if t == j else 0 for t in range(3)])
            assert rows and np.linalg.matrix_rank(np.array(rows, dtype=float)) == 3

    def test_exact_no_floats(self):
        rng = random.Random(3)
        lp = random_lp(rng, 3, 4)
        s = solve(lp)
        for v in (s.x or []) + (s.duals or []):
            assert isinstance(v, Fraction)
