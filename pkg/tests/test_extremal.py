from fractions import Fraction

import pytest

from conftest import random_game
from oracles import all_cycles_le
from wsne import equilibrium as eq
from wsne import extremal as ex
from wsne.auxgame import LEFT, RIGHT, BipartiteDigraph, shortest_cycle_length
from wsne.equilibrium import MixedStrategy, Profile
from wsne.errors import InvalidParameter
from wsne.tournament import bits_of, random_tournament

F = Fraction


def complete_both_ways(k):
    full = (1 << k) - 1
    return BipartiteDigraph(k, k, (full,) * k, (full,) * k)


def digon_matching(k):
    return BipartiteDigraph.from_arcs(k, k, [(i, i) for i in range(k)], [(i, i) for i in range(k)])


def adjacency(H):
    lr = [list(bits_of(m)) for m in H.lr]
    rl = [list(bits_of(m)) for m in H.rl]
    return lr, rl


def bitstring(H):
    """Row-major left-to-right arcs, then row-major right-to-left arcs."""
    a, b = H.left_size, H.right_size
    return ([H.has_arc((LEFT, i), (RIGHT, j)) for i in range(a) for j in range(b)]
            + [H.has_arc((RIGHT, j), (LEFT, i)) for j in range(b) for i in range(a)])


def random_bipartite(rng, a, b, density):
    lr = [(i, j) for i in range(a) for j in range(b) if rng.random() < density]
    rl = [(j, i) for j in range(b) for i in range(a) if rng.random() < density]
    return BipartiteDigraph.from_arcs(a, b, lr, rl)


class TestDegreesAndCycles:
    def test_min_in_degree(self):
        assert ex.min_in_degree(ex.directed_cycle(6)) == 1
        assert ex.min_in_degree(complete_both_ways(2)) == 2
        assert ex.min_in_degree(BipartiteDigraph(2, 2, (0, 0), (0, 0))) == 0

    def test_six_cycle_has_no_short_cycle(self):
        assert ex.has_short_cycle(ex.directed_cycle(6), 4) is None
        assert len(ex.has_short_cycle(ex.directed_cycle(6), 6)) == 6

    def test_digon(self):
        c = ex.has_short_cycle(digon_matching(2), 2)
        assert len(c) == 2 and ex.is_cycle(digon_matching(2), c)

    def test_complete(self):
        c = ex.has_short_cycle(complete_both_ways(2), 4)
        assert c is not None and len(c) <= 4 and ex.is_cycle(complete_both_ways(2), c)

    def test_odd_max_len(self):
        with pytest.raises(InvalidParameter):
            ex.has_short_cycle(ex.directed_cycle(6), 3)

    def test_against_dfs_oracle(self, rng):
        for _ in range(150):
            H = random_bipartite(rng, rng.randint(1, 5), rng.randint(1, 5), rng.choice([0.15, 0.3, 0.5]))
            lr, rl = adjacency(H)
            for L in (2, 4, 6):
                got = ex.has_short_cycle(H, L)
                want = all_cycles_le(lr, rl, L)
                assert (got is None) == (want is None)
                if got is not None:
                    assert len(got) == want and ex.is_cycle(H, got)


class TestVerifyCH:
    def test_k3_d2_holds(self):
        v = ex.verify_bipartite_ch(3, 2, ex.CYCLE_LE_4)
        assert v.holds is True and v.exhaustive

    def test_k3_d1_six_cycle(self):
        v = ex.verify_bipartite_ch(3, 1, ex.CYCLE_LE_4)
        H = v.counterexample
        assert v.holds is False
        assert H.arc_count() == 6 and shortest_cycle_length(H) == 6
        assert all(m.bit_count() == 1 for m in H.lr + H.rl)
        assert ex.min_in_degree(H) == 1

    def test_k2_d1_pure_four_cycle_reading(self):
        # with digons allowed a 2x2 graph of min in-degree 1 > 2/3 can lack a 4-cycle
        v = ex.verify_bipartite_ch(2, 1, ex.PURE_4_CYCLE)
        assert v.holds is False
        H = v.counterexample
        assert ex.min_in_degree(H) >= 1 and ex.has_short_cycle(H, 2) is not None

    def test_digon_matching_is_pure_counterexample(self):
        H = digon_matching(2)
        assert ex.min_in_degree(H) == 1
        assert not ex._short_cycle_masks(H.lr, H.rl, 2, ex.PURE_4_CYCLE)

    @pytest.mark.parametrize("k", [1, 2, 3])
    def test_threshold_holds(self, k):
        assert ex.verify_bipartite_ch(k, k // 3 + 1).holds is True

    @pytest.mark.parametrize("k,d,prop", [(2, 1, ex.CYCLE_LE_4), (3, 1, ex.CYCLE_LE_4),
                                          (3, 2, ex.CYCLE_LE_4), (3, 2, ex.PURE_4_CYCLE),
                                          (2, 1, ex.PURE_4_CYCLE), (3, 0, ex.CYCLE_LE_4)])
    def test_reduction_agrees(self, k, d, prop):
        a = ex.verify_bipartite_ch(k, d, prop, isomorph_rejection=False)
        b = ex.verify_bipartite_ch(k, d, prop, isomorph_rejection=True)
        assert a.holds == b.holds
        assert b.graphs_checked <= a.graphs_checked

    def test_unreduced_agrees_with_all_graphs(self):
        # brute force over every 2x2 graph
        for d in range(3):
            for prop in (ex.CYCLE_LE_4, ex.PURE_4_CYCLE):
                bad = [H for H in ex.all_bipartite_digraphs(2)
                       if ex.min_in_degree(H) >= d and not ex._short_cycle_masks(H.lr, H.rl, 2, prop)]
                v = ex.verify_bipartite_ch(2, d, prop, isomorph_rejection=False)
                assert v.holds == (not bad)
                if bad:
                    assert v.counterexample == min(bad, key=bitstring)

    def test_budget(self):
        v = ex.verify_bipartite_ch(5, 2, budget=1000)
        assert v.holds is None and not v.exhaustive
        assert v.to_json()["holds"] is None

    def test_k4_with_rejection(self):
        v = ex.verify_bipartite_ch(4, 2)
        assert v.holds is True and v.isomorph_rejection

    def test_bad_property(self):
        with pytest.raises(InvalidParameter):
            ex.verify_bipartite_ch(2, 1, "triangle")


class TestSixCycleBlowup:
    def test_t1_is_six_cycle(self):
        assert ex.sixcycle_blowup(1) == ex.directed_cycle(6)

    @pytest.mark.parametrize("t", [1, 2, 3, 4])
    def test_regular_and_girth_six(self, t):
        H = ex.sixcycle_blowup(t)
        assert H.left_size == H.right_size == 3 * t
        assert set(H.in_degrees(LEFT) + H.in_degrees(RIGHT)) == {t}
        assert {m.bit_count() for m in H.lr + H.rl} == {t}
        assert shortest_cycle_length(H) == 6
        assert ex.has_short_cycle(H, 4) is None

    def test_bad_t(self):
        with pytest.raises(InvalidParameter):
            ex.sixcycle_blowup(0)


def random_weights(rng, size):
    D = rng.randint(size, max(size, 6))
    cuts = sorted(rng.sample(range(1, D), size - 1))
    parts = [b - a for a, b in zip([0] + cuts, cuts + [D])]
    return tuple(F(p, D) for p in parts)


class TestBlowup:
    def test_single_arc(self):
        H = BipartiteDigraph.from_arcs(1, 1, [(0, 0)], [])
        W = ex.WeightedBipartiteDigraph(H, (1,), (1,))
        assert ex.blowup(W, 1) == H

    def test_doubling(self):
        H = BipartiteDigraph.from_arcs(2, 2, [(0, 0)], [])
        W = ex.WeightedBipartiteDigraph(H, (F(1, 2), F(1, 2)), (F(1, 2), F(1, 2)))
        B = ex.blowup(W, 2)
        assert B.left_size == B.right_size == 2 and B.arc_count() == 1
        B4 = ex.blowup(W, 4)
        assert B4.left_size == 4 and B4.arc_count() == 4
        assert B4.lr == (0b11, 0b11, 0, 0) and B4.rl == (0, 0, 0, 0)

    def test_non_integral(self):
        H = BipartiteDigraph.from_arcs(2, 1, [(0, 0)], [])
        W = ex.WeightedBipartiteDigraph(H, (F(1, 3), F(2, 3)), (1,))
        with pytest.raises(InvalidParameter, match=r"\(L, 0\)"):
            ex.blowup(W, 2)

    def test_default_scale_is_lcm(self):
        H = BipartiteDigraph.from_arcs(2, 2, [], [])
        W = ex.WeightedBipartiteDigraph(H, (F(1, 4), F(3, 4)), (F(1, 6), F(5, 6)))
        assert W.default_scale() == 12
        B = ex.blowup(W)
        assert B.left_size == B.right_size == 12

    def test_weights_validated(self):
        H = BipartiteDigraph.from_arcs(2, 1, [], [])
        with pytest.raises(InvalidParameter):
            ex.WeightedBipartiteDigraph(H, (F(1, 2), F(1, 3)), (1,))
        with pytest.raises(InvalidParameter):
            ex.WeightedBipartiteDigraph(H, (0, 1), (1,))

    def test_short_cycles_preserved(self, rng):
        for _ in range(60):
            H = random_bipartite(rng, rng.randint(1, 4), rng.randint(1, 4), 0.35)
            W = ex.WeightedBipartiteDigraph(H, random_weights(rng, H.left_size), random_weights(rng, H.right_size))
            B = ex.blowup(W)
            lr, rl = adjacency(H)
            assert (ex.has_short_cycle(B, 4) is not None) == (all_cycles_le(lr, rl, 4) is not None)

    def test_weighted_in_degree_scales(self, rng):
        for _ in range(30):
            H = random_bipartite(rng, 3, 3, 0.5)
            W = ex.WeightedBipartiteDigraph(H, random_weights(rng, 3), random_weights(rng, 3))
            L = W.default_scale()
            B = ex.blowup(W)
            assert ex.min_in_degree(B) == min(L * W.weighted_in_degree(v) for v in H.vertices())


class TestProfileGraph:
    def test_pure(self, pennies):
        W = ex.profile_to_weighted_graph(pennies, Profile(MixedStrategy.pure(2, 1), MixedStrategy.pure(2, 0)))
        assert W.graph.left_size == W.graph.right_size == 1
        assert W.left_weights == (1,) and W.right_weights == (1,)
        assert W.left_labels == (1,) and W.right_labels == (0,)

    def test_pennies_uniform(self, pennies):
        h = MixedStrategy((F(1, 2), F(1, 2)))
        W = ex.profile_to_weighted_graph(pennies, Profile(h, h))
        assert W.graph.left_size == 2 and W.left_weights == (F(1, 2), F(1, 2))
        assert W.graph.arc_count() == 4

    def test_weighted_in_degree_is_payoff(self, rng):
        for _ in range(100):
            g = random_game(rng, rng.randint(1, 5), rng.randint(1, 5))
            pr = Profile(_rand_strategy(rng, g.m), _rand_strategy(rng, g.n))
            W = ex.profile_to_weighted_graph(g, pr)
            a = eq.row_payoffs(g, pr.q)
            b = eq.col_payoffs(g, pr.p)
            for t, i in enumerate(W.left_labels):
                assert W.weighted_in_degree((LEFT, t)) == a[i]
            for t, j in enumerate(W.right_labels):
                assert W.weighted_in_degree((RIGHT, t)) == b[j]


def _rand_strategy(rng, dim):
    while True:
        w = [rng.randint(0, 4) for _ in range(dim)]
        if sum(w):
            return MixedStrategy(tuple(F(x, sum(w)) for x in w))


class TestDecomposition:
    def test_six_cycle(self):
        H = ex.directed_cycle(6)
        for v in H.vertices():
            d = ex.decompose_neighborhoods(H, v)
            assert (len(d.A1), len(d.B1), len(d.B2), len(d.C1)) == (1, 1, 1, 1)
            assert d.alpha1 == d.beta1 == d.gamma1 == F(1, 3)

    def test_six_cycle_sets(self):
        d = ex.decompose_neighborhoods(ex.directed_cycle(6), (LEFT, 0))
        assert d.A1 == ((RIGHT, 0),) and d.B1 == ((RIGHT, 2),)
        assert d.B2 == ((LEFT, 2),) and d.C1 == ((RIGHT, 1),)

    def test_out_degree_zero(self):
        H = BipartiteDigraph.from_arcs(2, 2, [], [(0, 0)])
        d = ex.decompose_neighborhoods(H, (LEFT, 1))
        assert d.A1 == () and d.alpha1 == 0

    def test_missing_vertex(self):
        with pytest.raises(InvalidParameter):
            ex.decompose_neighborhoods(ex.directed_cycle(6), (LEFT, 3))

    def test_partition_when_digon_free(self, rng):
        seen = 0
        while seen < 40:
            H = random_bipartite(rng, 4, 4, 0.4)
            if ex.has_short_cycle(H, 2):
                continue
            seen += 1
            for v in H.vertices():
                d = ex.decompose_neighborhoods(H, v)
                assert not set(d.A1) & set(d.B1)
                assert len(d.A1) + len(d.B1) + len(d.C1) == 4
                assert d.beta1 * 4 == H.in_degrees(v[0])[v[1]]
                for r in (d.alpha1, d.beta1, d.beta2, d.gamma1):
                    assert 0 <= r <= 1

    def test_json(self):
        js = ex.decompose_neighborhoods(ex.directed_cycle(6), (RIGHT, 1)).to_json()
        assert js["alpha1"] == "1/3" and js["pivot"] == ["R", 1]


class TestConjecture:
    def test_three_cycle(self):
        D = ex.GeneralDigraph.from_arcs(3, [(0, 1), (1, 2), (2, 0)])
        assert ex.check_conjecture_dmp(D)[0] == ex.HOLDS_VIA_CYCLE

    def test_transitive(self):
        D = ex.GeneralDigraph.from_arcs(3, [(0, 1), (0, 2), (1, 2)])
        assert ex.check_conjecture_dmp(D) == (ex.HOLDS_VIA_TRIPLE, [0, 1, 2])

    def test_digon(self):
        D = ex.GeneralDigraph.from_arcs(3, [(0, 1), (1, 0)])
        verdict, w = ex.check_conjecture_dmp(D)
        assert verdict == ex.HOLDS_VIA_CYCLE and w == [0, 1]

    def test_too_small(self):
        with pytest.raises(InvalidParameter):
            ex.check_conjecture_dmp(ex.GeneralDigraph.from_arcs(2, [(0, 1)]))

    def test_self_loop(self):
        with pytest.raises(InvalidParameter):
            ex.GeneralDigraph.from_arcs(3, [(1, 1)])

    def test_json_roundtrip(self):
        D = ex.GeneralDigraph.from_arcs(4, [(0, 1), (3, 2)])
        assert ex.GeneralDigraph.from_json(D.to_json()) == D

    def test_random_tournaments(self):
        for seed in range(300):
            n = 3 + seed % 10
            D = ex.GeneralDigraph.from_tournament(random_tournament(n, seed))
            verdict, w = ex.check_conjecture_dmp(D)
            assert verdict != ex.COUNTEREXAMPLE, f"counterexample at n={n}, seed={seed}"

    def test_triple_witness_is_undominated(self, rng):
        for _ in range(100):
            n = rng.randint(3, 7)
            arcs = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < 0.5]  # acyclic
            D = ex.GeneralDigraph.from_arcs(n, arcs)
            verdict, w = ex.check_conjecture_dmp(D)
            assert verdict == ex.HOLDS_VIA_TRIPLE
            assert not any(all(D.out[u] >> x & 1 for x in w) for u in range(n))
