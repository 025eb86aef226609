import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import oracle_count
from qperc.distributions import OffspringDistribution, skeleton_laws
from qperc.errors import CapExceededError
from qperc.graphs import bfs_depths, percolate, read_edge_list
from qperc.trees import (enumerate_trees, extinction_frequency, rooted_level_sequences,
                         sample_extinct_tree, sample_gw, sample_ugw, total_progeny_tail_bound)


def check_rooted_tree(t):
    g = t.graph
    assert g.m == g.n - 1
    depth = bfs_depths(g, 0)
    assert len(depth) == g.n
    assert np.array_equal([depth[v] for v in range(g.n)], t.depths)
    for v in range(1, g.n):
        assert sum(depth[w] < depth[v] for w in g.neighbors(v).tolist()) == 1


laws = st.lists(st.floats(0.0, 1.0), min_size=1, max_size=4).filter(lambda v: sum(v) > 0.05)


class TestGW:
    def test_dirac_complete_tree(self):
        for q, h in ((2, 5), (3, 3), (1, 7)):
            t = sample_gw(OffspringDistribution.dirac(q), h, rng=0)
            expect = h + 1 if q == 1 else (q ** (h + 1) - 1) // (q - 1)
            assert t.n == expect and t.truncated and t.height == h
            assert np.array_equal(t.offspring_counts()[:t.level_ptr[h]], np.full(t.level_ptr[h], q))

    def test_dirac_deterministic(self):
        P = OffspringDistribution.dirac(2)
        a, b = sample_gw(P, 4, rng=1), sample_gw(P, 4, rng=2)
        assert np.array_equal(a.parent, b.parent)

    def test_delta_zero(self):
        t = sample_gw(OffspringDistribution.dirac(0), 5, rng=0)
        assert t.n == 1 and not t.truncated

    def test_vertex_cap_flagged(self):
        t = sample_gw(OffspringDistribution.dirac(2), 10, vertex_cap=50, rng=0)
        assert t.n == 50 and t.truncated
        check_rooted_tree(t)

    def test_validation(self):
        with pytest.raises(ValueError):
            sample_gw(OffspringDistribution.dirac(2), -1)
        with pytest.raises(ValueError):
            sample_gw(OffspringDistribution.dirac(2), 2, vertex_cap=0)

    def test_poisson_mean_size(self):
        rng = np.random.default_rng(5)
        P = OffspringDistribution.poisson(2.0)
        h = 4
        sizes = np.array([sample_gw(P, h, rng=rng).n for _ in range(4000)])
        expected = sum(2**j for j in range(h + 1))
        se = sizes.std() / math.sqrt(sizes.size)
        assert abs(sizes.mean() - expected) < 3 * se

    @settings(max_examples=40, deadline=None)
    @given(laws, st.integers(0, 6), st.integers(0, 2**32 - 1))
    def test_structure(self, probs, depth, seed):
        P = OffspringDistribution.explicit(np.array(probs) / sum(probs))
        t = sample_gw(P, depth, vertex_cap=2000, rng=seed)
        check_rooted_tree(t)
        assert t.height <= depth

    def test_offspring_histogram(self):
        P = OffspringDistribution.explicit({0: 0.2, 1: 0.3, 2: 0.5})
        rng = np.random.default_rng(9)
        counts = np.zeros(3)
        while counts.sum() < 100_000:
            t = sample_gw(P, 6, rng=rng)
            inner = t.level_ptr[6] if t.height == 6 else t.n
            counts += np.bincount(t.offspring_counts()[:inner], minlength=3)[:3]
        exp = counts.sum() * P.pmf
        assert ((counts - exp) ** 2 / exp).sum() < 13.8  # 0.999 quantile, 2 dof


class TestUGW:
    def test_regular_tree_ball(self):
        t = sample_ugw(OffspringDistribution.dirac(3), 4, rng=0)
        deg = t.graph.degrees()
        assert t.n == 1 + 3 * (2**4 - 1)
        assert np.all(deg[t.depths < 4] == 3) and np.all(deg[t.depths == 4] == 1)

    def test_binomial_degrees(self):
        rng = np.random.default_rng(2)
        P = OffspringDistribution.binomial(3, 0.6)
        root, deeper = np.zeros(4), np.zeros(3)
        for _ in range(5000):
            t = sample_ugw(P, 3, rng=rng)
            c = t.offspring_counts()
            root[c[0]] += 1
            deeper += np.bincount(c[1:t.level_ptr[3] if t.height == 3 else t.n], minlength=3)
        for obs, law in ((root, P.pmf), (deeper, OffspringDistribution.binomial(2, 0.6).pmf)):
            exp = obs.sum() * law
            assert ((obs - exp) ** 2 / exp).sum() < 16.3  # 0.999 quantile, 3 dof

    def test_percolated_regular_ball(self):
        # root cluster of the percolated 3-regular tree ball vs UGW(Bin(3, p))
        q, p, h, n = 2, 0.6, 3, 4000
        rng = np.random.default_rng(4)
        full = sample_ugw(OffspringDistribution.dirac(q + 1), h, rng=0).graph
        a = [len(bfs_depths(percolate(full, p, rng), 0)) for _ in range(n)]
        b = [sample_ugw(OffspringDistribution.binomial(q + 1, p), h, rng=rng).n for _ in range(n)]
        top = 12
        ha = np.bincount(np.minimum(a, top), minlength=top + 1)
        hb = np.bincount(np.minimum(b, top), minlength=top + 1)
        keep = (ha + hb) > 0
        chi2 = ((ha[keep] - hb[keep]) ** 2 / (ha[keep] + hb[keep])).sum()
        dof = keep.sum() - 1
        assert chi2 < dof + 3 * math.sqrt(2 * dof)


class TestExtinct:
    def setup_method(self):
        self.P = OffspringDistribution.explicit({0: 0.1, 1: 0.2, 2: 0.3, 3: 0.4})
        self.L = skeleton_laws(self.P)
        self.Q = self.L.extinct_offspring

    def test_law(self):
        pe = self.L.pi_e
        assert self.Q.prob(0) == pytest.approx(self.P.prob(0) / pe)
        assert self.Q.mean < 1

    def test_single_vertex_frequency_and_mean(self):
        rng = np.random.default_rng(1)
        sizes = np.array([sample_extinct_tree(self.L, rng=rng).n for _ in range(20_000)])
        p0 = self.Q.prob(0)
        assert abs(np.mean(sizes == 1) - p0) < 3 * math.sqrt(p0 * (1 - p0) / sizes.size)
        se = sizes.std() / math.sqrt(sizes.size)
        assert abs(sizes.mean() - 1 / (1 - self.Q.mean)) < 3 * se

    @pytest.mark.slow
    def test_progeny_tail_bound(self):
        rng = np.random.default_rng(2)
        sizes = np.array([sample_extinct_tree(self.L, rng=rng).n for _ in range(100_000)])
        rho = 1.5
        assert self.Q.pgf(rho, extended=True) < rho
        for t in (5, 10, 20):
            assert np.mean(sizes >= t) <= total_progeny_tail_bound(self.Q, rho, t)

    def test_no_extinction(self):
        with pytest.raises(ValueError):
            sample_extinct_tree(skeleton_laws(OffspringDistribution.dirac(2)))

    def test_cap_is_error(self):
        L = skeleton_laws(OffspringDistribution.poisson(1.05))
        with pytest.raises(CapExceededError):
            for s in range(2000):
                sample_extinct_tree(L, vertex_cap=2, rng=s)


class TestProgenyBound:
    def test_delta_zero(self):
        assert total_progeny_tail_bound(OffspringDistribution.dirac(0), 2.0, 3) == pytest.approx(0.25)

    def test_binomial_example(self):
        Q = OffspringDistribution.binomial(2, 0.25)
        assert Q.pgf(1.5, extended=True) == pytest.approx(1.265625)
        for t in (1, 4, 10):
            assert total_progeny_tail_bound(Q, 1.5, t) == pytest.approx(1.5 * 0.84375**t)
        vals = [total_progeny_tail_bound(Q, 1.5, t) for t in range(1, 30)]
        assert np.all(np.diff(vals) <= 0)

    def test_condition_violated(self):
        with pytest.raises(ValueError):
            total_progeny_tail_bound(OffspringDistribution.dirac(2), 1.5, 3)
        with pytest.raises(ValueError):
            total_progeny_tail_bound(OffspringDistribution.dirac(0), 1.0, 3)

    def test_monte_carlo(self):
        Q = OffspringDistribution.binomial(2, 0.25)
        L_sizes = []
        rng = np.random.default_rng(0)
        for _ in range(20_000):
            L_sizes.append(sample_gw(Q, 10_000, rng=rng).n)
        L_sizes = np.array(L_sizes)
        for t in (3, 6, 10):
            assert np.mean(L_sizes >= t) <= total_progeny_tail_bound(Q, 1.5, t)


class TestExtinctionFrequency:
    def test_poisson(self):
        P = OffspringDistribution.poisson(2.0)
        L = skeleton_laws(P)
        freq, se = extinction_frequency(P, 20_000, rng=3)
        assert abs(freq - L.pi_e) < 3 * se


class TestCatalog:
    def test_rooted_counts(self):
        counts = [sum(1 for _ in rooted_level_sequences(k)) for k in range(1, 9)]
        assert counts == [1, 1, 2, 4, 9, 20, 48, 115]

    def test_free_counts(self):
        assert [len(enumerate_trees(k).trees) for k in range(1, 13)] == \
            [1, 1, 1, 2, 3, 6, 11, 23, 47, 106, 235, 551]

    @pytest.mark.parametrize("k", range(1, 9))
    def test_prufer_oracle(self, k):
        assert len(enumerate_trees(k).trees) == oracle_count(k)

    def test_small_lambda(self):
        np.testing.assert_allclose(enumerate_trees(2).lambda_k, [-1, 1])
        np.testing.assert_allclose(enumerate_trees(3).lambda_k, [-math.sqrt(2), 0, math.sqrt(2)],
                                   atol=1e-14)

    @pytest.mark.parametrize("k", [4, 7, 10])
    def test_lambda_properties(self, k):
        cat = enumerate_trees(k)
        lam = cat.lambda_k
        np.testing.assert_array_equal(lam, -lam[::-1])
        assert np.all(np.diff(lam) > 1e-8)
        for x in lam:
            res = min(np.min(np.abs(np.linalg.eigvalsh(g.adjacency_matrix()) - x))
                      for g in cat.trees)
            assert res < 1e-8
        for g in cat.trees:
            assert g.m == g.n - 1 == k - 1

    def test_range(self):
        with pytest.raises(ValueError):
            enumerate_trees(13)
        with pytest.raises(ValueError):
            enumerate_trees(0)

    def test_export(self, tmp_path):
        cat = enumerate_trees(5)
        bundle = cat.export(tmp_path)
        files = sorted(bundle.iterdir())
        assert len(files) == 3
        assert read_edge_list(files[0]) == cat.trees[0]
        lines = (tmp_path / "catalog_k5.csv").read_text().splitlines()
        assert lines[0] == "k,tree_index,eigenvalue"
        assert len(lines) == 1 + 5 * 3
