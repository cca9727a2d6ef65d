import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from chowliu.instances import random_general
from chowliu.measures import (
    DiscreteDist,
    OutcomeMismatch,
    SharedMarginalMismatch,
    chain3,
    chain4,
    conditional_mi,
    hellinger,
    hellinger_sq,
    i_h2,
    kl,
    make_independent,
    mindiag,
    mindisc,
    minmrg,
    mutual_information,
    pair_measures,
    symmetric_constructions,
    tv,
)
from chowliu.model import PairwiseMarginal, TreeModel

from . import inequality_suites, oracles

UNIFORM_PAIR = PairwiseMarginal(np.full((2, 2), 0.25))
COPY_PAIR = PairwiseMarginal([[0.5, 0.0], [0.0, 0.5]])


def as_dict(dist: DiscreteDist):
    return dict(zip(dist.labels, dist.probs.tolist()))


class TestDiscreteDist:
    def test_rejects_bad_sum(self):
        with pytest.raises(ValueError):
            DiscreteDist([0.5, 0.4], [(1,), (-1,)])

    def test_rejects_duplicate_labels(self):
        with pytest.raises(ValueError):
            DiscreteDist([0.5, 0.5], [(1,), (1,)])

    def test_permute_and_marginal(self):
        arr = np.arange(8, dtype=float).reshape(2, 2, 2) / 28
        d = DiscreteDist.from_array(arr)
        np.testing.assert_allclose(d.permute([2, 0, 1]).as_array(), np.transpose(arr, [2, 0, 1]))
        np.testing.assert_allclose(d.marginal([2, 0]).as_array(), arr.sum(axis=1).T)
        np.testing.assert_allclose(d.pair(0, 2).table, arr.sum(axis=1))


class TestTv:
    def test_identical(self):
        assert tv([0.2, 0.8], [0.2, 0.8]) == 0.0

    def test_disjoint(self):
        assert tv([1.0, 0.0], [0.0, 1.0]) == 1.0

    @pytest.mark.parametrize("alpha", [-0.8, -0.1, 0.3, 1.0])
    def test_symmetric_vs_uniform(self, alpha):
        p = PairwiseMarginal.symmetric(alpha).table
        assert tv(p, UNIFORM_PAIR.table) == pytest.approx(abs(alpha) / 2, abs=1e-15)

    def test_outcome_mismatch(self):
        with pytest.raises(OutcomeMismatch):
            tv([0.5, 0.5], [0.25] * 4)

    def test_label_mismatch(self):
        p = DiscreteDist([0.5, 0.5], [(1,), (-1,)])
        q = DiscreteDist([0.5, 0.5], [(1, 1), (-1, -1)])
        with pytest.raises(OutcomeMismatch):
            tv(p, q)

    def test_matches_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            p, q = inequality_suites.random_dist(rng, 8), inequality_suites.random_dist(rng, 8)
            ref = oracles.tv(dict(enumerate(p.tolist())), dict(enumerate(q.tolist())))
            assert tv(p, q) == pytest.approx(ref, abs=1e-14)


class TestHellinger:
    def test_identical(self):
        assert hellinger_sq([0.3, 0.7], [0.3, 0.7]) == pytest.approx(0.0, abs=1e-15)

    def test_bernoulli(self):
        assert hellinger_sq([1.0, 0.0], [0.5, 0.5]) == pytest.approx(0.2928932188134524, abs=1e-15)

    def test_disjoint(self):
        assert hellinger_sq([1.0, 0.0], [0.0, 1.0]) == 1.0

    def test_hellinger_is_root(self):
        assert hellinger([1.0, 0.0], [0.5, 0.5]) ** 2 == pytest.approx(1 - math.sqrt(0.5))

    def test_matches_oracle(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            p, q = inequality_suites.random_dist(rng, 8), inequality_suites.random_dist(rng, 8)
            ref = oracles.hellinger_sq(dict(enumerate(p.tolist())), dict(enumerate(q.tolist())))
            assert hellinger_sq(p, q) == pytest.approx(ref, abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_sandwich(self, seed):
        _, ok, detail = inequality_suites.case_sandwich(np.random.default_rng(seed))
        assert ok, detail


class TestKl:
    def test_identical(self):
        assert kl([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_not_dominated(self):
        assert kl([0.5, 0.5], [1.0, 0.0]) == math.inf

    def test_zero_mass_in_p_ignored(self):
        assert kl([1.0, 0.0], [0.5, 0.5]) == pytest.approx(math.log(2))

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_kl_at_least_twice_h2(self, seed):
        rng = np.random.default_rng(seed)
        size = int(rng.integers(2, 12))
        p, q = inequality_suites.random_dist(rng, size), inequality_suites.random_dist(rng, size)
        assert kl(p, q) + 1e-12 >= 2 * hellinger_sq(p, q)


class TestMutualInformation:
    def test_independent(self):
        assert mutual_information(UNIFORM_PAIR) == 0.0

    def test_copy(self):
        assert mutual_information(COPY_PAIR) == pytest.approx(math.log(2), abs=1e-15)

    def test_fixed_table(self):
        assert mutual_information([[0.3, 0.1], [0.1, 0.5]]) == pytest.approx(0.17774088384195025, abs=1e-15)

    def test_matches_four_term_oracle(self):
        rng = np.random.default_rng(2)
        for _ in range(50):
            t = inequality_suites.random_dist(rng, 4).reshape(2, 2)
            assert mutual_information(t) == pytest.approx(oracles.mi_four_term(t.tolist()), abs=1e-13)

    def test_equals_kl_to_product(self):
        t = np.array([[0.3, 0.1], [0.1, 0.5]])
        assert mutual_information(t) == pytest.approx(kl(t, make_independent(t).table), abs=1e-15)


class TestConditionalMi:
    def test_conditionally_independent(self):
        pw = np.array([0.3, 0.7])
        pu = np.array([[0.2, 0.8], [0.6, 0.4]])
        pv = np.array([[0.9, 0.1], [0.5, 0.5]])
        arr = np.einsum("w,wu,wv->uvw", pw, pu, pv)
        assert conditional_mi(DiscreteDist.from_array(arr)) == pytest.approx(0.0, abs=1e-15)

    def test_chain_reassembly_of_itself(self):
        m = random_general(3, 5)
        # chain u - w - v over (u, v, w): nodes 0, 2, 1 of a 0 - 1 - 2 path
        arr = chain3(m.pair_marginal(0, 1), m.pair_marginal(1, 2)).permute([0, 2, 1])
        assert conditional_mi(arr) == pytest.approx(0.0, abs=1e-14)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_summed_formula(self, seed):
        arr = inequality_suites.random_dist(np.random.default_rng(seed), 8).reshape(2, 2, 2)
        d = DiscreteDist.from_array(arr)
        assert conditional_mi(d) == pytest.approx(oracles.conditional_mi_sum(arr.tolist()), abs=1e-10)

    @pytest.mark.parametrize("seed", range(10))
    def test_equals_kl_to_chain(self, seed):
        arr = inequality_suites.random_dist(np.random.default_rng(100 + seed), 8).reshape(2, 2, 2)
        d = DiscreteDist.from_array(arr)
        reassembled = chain3(d.pair(0, 2), d.pair(2, 1)).permute([0, 2, 1])
        assert conditional_mi(d) == pytest.approx(kl(d, reassembled), abs=1e-10)


class TestChains:
    def test_uniform(self):
        np.testing.assert_allclose(chain3(UNIFORM_PAIR, UNIFORM_PAIR).probs, 1 / 8)
        np.testing.assert_allclose(chain4(UNIFORM_PAIR, UNIFORM_PAIR, UNIFORM_PAIR).probs, 1 / 16)

    def test_alpha_end_pair(self):
        s = PairwiseMarginal.symmetric(0.5)
        assert chain3(s, s).pair(0, 2).alpha == pytest.approx(0.25, abs=1e-15)

    def test_shared_marginal_mismatch(self):
        with pytest.raises(SharedMarginalMismatch):
            chain3([[0.4, 0.1], [0.1, 0.4]], [[0.7, 0.0], [0.0, 0.3]])
        with pytest.raises(SharedMarginalMismatch):
            chain4(UNIFORM_PAIR, UNIFORM_PAIR, [[0.7, 0.0], [0.0, 0.3]])

    def test_zero_mass_middle_node(self):
        d = chain3([[0.6, 0.0], [0.4, 0.0]], [[0.5, 0.5], [0.0, 0.0]])
        np.testing.assert_allclose(d.as_array()[:, 1, :], 0.0)
        assert d.probs.sum() == pytest.approx(1.0)

    @pytest.mark.parametrize("seed", range(5))
    def test_reproduces_path_joint(self, seed):
        m = random_general(4, seed)
        # random_general picks a random tree; rebuild a path with the same conditionals
        path = TreeModel(4, [(0, 1), (1, 2), (2, 3)], m.root_prob, m.cond)
        ref = oracles.joint_by_enumeration(4, path.edges, path.root_prob, path.cond.tolist())
        pm = [path.pair_marginal(a, a + 1) for a in range(3)]
        d3 = chain3(pm[0], pm[1])
        d4 = chain4(*pm)
        for x, p in as_dict(d4).items():
            assert p == pytest.approx(ref[x], abs=1e-14)
        ref3 = oracles.marginal(ref, (0, 1, 2))
        for x, p in as_dict(d3).items():
            assert p == pytest.approx(ref3[x], abs=1e-14)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_four_node_swap_bound(self, seed):
        """H^2 between the h-i-j-k path and the chain i-h-k-j (same P_hi, P_hk,
        P_jk) is at most (H(ijk swap) + H(hik swap))^2."""
        rng = np.random.default_rng(seed)
        m = inequality_suites.random_chain_model(rng, 4)
        h, i, j, k = 0, 1, 2, 3
        p = {(a, b): m.pair_marginal(a, b) for a in range(4) for b in range(4) if a != b}
        true4 = chain4(p[h, i], p[i, j], p[j, k])
        alt4 = chain4(p[i, h], p[h, k], p[k, j]).permute([1, 0, 3, 2])
        ijk = chain3(p[i, j], p[j, k])
        ijk_swap = chain3(p[i, k], p[k, j]).permute([0, 2, 1])
        hik = chain3(p[h, i], p[i, k])
        hik_swap = chain3(p[i, h], p[h, k]).permute([1, 0, 2])
        lhs = hellinger_sq(true4, alt4)
        rhs = (hellinger(ijk, ijk_swap) + hellinger(hik, hik_swap)) ** 2
        assert lhs <= rhs + 1e-12


class TestPairMeasures:
    def test_independent_uniform(self):
        pm = pair_measures(UNIFORM_PAIR)
        assert (pm.minmrg, pm.mindiag, pm.mindisc, pm.i_h2, pm.alpha, pm.mi) == (0.5, 0.5, 0.0, 0.0, 0.0, 0.0)

    def test_copy(self):
        pm = pair_measures(COPY_PAIR)
        assert pm.mindiag == 0.0
        assert pm.mindisc == 1.0
        assert pm.alpha == 1.0
        assert pm.i_h2 == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-15)
        # the copy puts mass 1/2 on two cells where the product puts 1/4
        assert pm.i_h2 == pytest.approx(1 - 2 * math.sqrt(0.5 * 0.25), abs=1e-15)

    def test_alpha_from_table(self):
        assert pair_measures([[0.375, 0.125], [0.125, 0.375]]).alpha == pytest.approx(0.5)

    def test_mindisc_zero_mass(self):
        # node j is always +1: P(i=+1 | j=-1) is taken as 0, giving 0.3 in
        # that direction, while P(j=+1 | i) is 1 either way
        t = [[0.3, 0.0], [0.7, 0.0]]
        assert mindisc(t) == 0.0
        assert mindisc([[0.3, 0.2], [0.0, 0.5]]) == pytest.approx(min(abs(0.3 / 0.3 - 0.2 / 0.7), abs(0.3 / 0.5 - 0.0)))

    def test_minmrg_mixed_inputs(self):
        t = PairwiseMarginal([[0.1, 0.2], [0.3, 0.4]])
        assert minmrg(t) == pytest.approx(0.3)
        assert minmrg(t, [0.05, 0.95]) == pytest.approx(0.05)

    def test_make_independent(self):
        np.testing.assert_allclose(make_independent(UNIFORM_PAIR).table, UNIFORM_PAIR.table)
        np.testing.assert_allclose(make_independent(PairwiseMarginal.symmetric(0.7)).table, 0.25)
        t = PairwiseMarginal([[0.3, 0.1], [0.1, 0.5]])
        assert i_h2(t) == hellinger_sq(t.table, make_independent(t).table)

    @settings(max_examples=300, deadline=None)
    @given(st.integers(0, 2**32 - 1))
    def test_ranges(self, seed):
        pm = pair_measures(inequality_suites.random_pair(np.random.default_rng(seed)))
        assert 0 <= pm.minmrg <= 0.5
        assert 0 <= pm.mindiag <= 0.5
        assert 0 <= pm.mindisc <= 1
        assert 0 <= pm.i_h2 <= 1
        assert pm.mi >= 0
        assert -1 <= pm.alpha <= 1

    def test_mindisc_brute_force(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            t = inequality_suites.random_dist(rng, 4).reshape(2, 2)
            vals = []
            for tt in (t, t.T):
                col = tt.sum(axis=0)
                cond = [tt[0, b] / col[b] if col[b] > 0 else 0.0 for b in range(2)]
                vals.append(abs(cond[0] - cond[1]))
            assert mindisc(t) == pytest.approx(min(vals), abs=1e-14)


class TestSymmetricConstructions:
    def test_zero_alpha(self):
        ind, det, est = symmetric_constructions(0.0)
        assert est is None
        assert hellinger_sq(PairwiseMarginal.symmetric(0.0).table, ind.table) == 0.0
        assert det.alpha == 1.0

    def test_negative_alpha_det(self):
        _, det, est = symmetric_constructions(-0.4, -0.35)
        assert det.alpha == -1.0
        assert est.alpha == pytest.approx(-0.35)

    def test_det_bound_example(self):
        _, det, _ = symmetric_constructions(0.9)
        assert hellinger_sq(PairwiseMarginal.symmetric(0.9).table, det.table) <= 0.05

    def test_ind_bound_example(self):
        ind, _, _ = symmetric_constructions(0.3)
        assert hellinger_sq(PairwiseMarginal.symmetric(0.3).table, ind.table) <= 0.5 * 0.09

    @pytest.mark.parametrize("alpha", np.linspace(-1, 1, 41))
    def test_bounds_on_grid(self, alpha):
        ind, det, _ = symmetric_constructions(alpha)
        p = PairwiseMarginal.symmetric(alpha).table
        assert hellinger_sq(p, ind.table) <= 0.5 * alpha**2 + 1e-15
        assert hellinger_sq(p, det.table) <= 0.5 * (1 - abs(alpha)) + 1e-15


class TestInequalitySuites:
    """Small-scale runs of the random-case checkers; the acceptance module
    runs 1000 cases of each."""

    @pytest.mark.parametrize("key", sorted(inequality_suites.SUITES))
    def test_suite(self, key):
        name, case = inequality_suites.SUITES[key]
        applicable, failures = inequality_suites.run_suite(case, 150, seed=1000 + ord(key))
        assert applicable == 150, name
        assert failures == [], failures[:3]

    def test_swap_distance_on_branching_triple(self):
        m = TreeModel(3, [(0, 1), (0, 2)], 0.4, [[0.8, 0.3], [0.6, 0.1]])
        pij, pjk, pik = m.pair_marginal(1, 0), m.pair_marginal(0, 2), m.pair_marginal(1, 2)
        # 0 is the middle node, so the i - j - k chain is exact; the swap i - k - j is not
        assert inequality_suites.swap_distance(pij, pjk, pik) > 0
        true3 = chain3(pij, pjk).as_array()
        ref = oracles.joint_by_enumeration(3, m.edges, m.root_prob, m.cond.tolist())
        for (a, b, c), (x1, x0, x2) in zip(itertools.product(range(2), repeat=3), itertools.product((1, -1), repeat=3)):
            assert true3[a, b, c] == pytest.approx(ref[(x0, x1, x2)], abs=1e-15)

    def test_edge_switch_generator_hypotheses(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n, groups, straddle, p1, p2 = inequality_suites.edge_switch_pair(rng)
            t1, t2 = p1.undirected_edges(), p2.undirected_edges()
            assert sorted(x for g in groups for x in g) == list(range(n))
            for g in groups:
                assert oracles.induced_connected(t1, g) and oracles.induced_connected(t2, g)
            label = {x: gi for gi, g in enumerate(groups) for x in g}
            cross1 = {tuple(sorted((label[a], label[b]))) for a, b in t1 if label[a] != label[b]}
            cross2 = {tuple(sorted((label[a], label[b]))) for a, b in t2 if label[a] != label[b]}
            assert cross1 == cross2
            assert len(straddle) == len(cross1)
