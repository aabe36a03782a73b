"""Cosine and Frechet-distance contracts, including closed-form oracles."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from langsim.errors import (
    DimensionMismatchError,
    InsufficientSamplesError,
    SubsampleRangeError,
    ZeroVectorError,
)
from langsim.metrics import (
    METRIC_DIRECTIONS,
    cosine_score,
    cosine_similarity,
    fid,
    fid_matched,
    matched_subsample,
)
from langsim.rng import Stream
from langsim.stats import LanguageStats, stats_for
from langsim.store import EmbeddingSet
from langsim.synth import ClusterSpec, analytic_fid, sample_cluster
from tests.conftest import random_psd


def _stats(language, mean, cov, count=10):
    return LanguageStats(language, np.asarray(mean, float), np.asarray(cov, float), count)


_finite_vec = st.lists(
    st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False), min_size=2, max_size=8
)


class TestCosine:
    def test_anchor_values(self):
        assert cosine_similarity([1, 0], [1, 0]) == 1.0
        assert cosine_similarity([1, 0], [0, 1]) == 0.0
        assert cosine_similarity([1, 1], [1, 0]) == pytest.approx(1 / math.sqrt(2), abs=1e-15)

    def test_zero_vector_named(self):
        with pytest.raises(ZeroVectorError) as err:
            cosine_similarity([0, 0], [1, 0])
        assert err.value.argument == "a"
        with pytest.raises(ZeroVectorError) as err:
            cosine_similarity([1, 0], [0, 0])
        assert err.value.argument == "b"

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            cosine_similarity([1, 0], [1, 0, 0])

    @given(_finite_vec, _finite_vec)
    def test_range_and_symmetry(self, a, b):
        n = min(len(a), len(b))
        x, y = np.array(a[:n]), np.array(b[:n])
        if np.linalg.norm(x) == 0 or np.linalg.norm(y) == 0:
            return
        value = cosine_similarity(x, y)
        assert -1.0 <= value <= 1.0
        assert value == cosine_similarity(y, x)

    @given(
        _finite_vec,
        st.floats(1e-3, 1e3),
        st.floats(1e-3, 1e3),
    )
    def test_scale_invariance(self, a, s1, s2):
        x = np.array(a)
        if np.linalg.norm(x) == 0:
            return
        y = x + 0.5
        if np.linalg.norm(y) == 0:
            return
        base = cosine_similarity(x, y)
        assert abs(cosine_similarity(s1 * x, s2 * y) - base) <= 1e-12

    def test_near_parallel_clamped(self):
        # adversarial near-1: huge nearly-identical high-dim vectors
        x = Stream(5).normals(256) * 1e8
        y = x * (1 + 1e-14)
        value = cosine_similarity(x, y)
        assert value <= 1.0
        assert value == pytest.approx(1.0, abs=1e-12)
        assert cosine_similarity(x, -y) >= -1.0


class TestFid:
    def test_self_distance_zero(self):
        for dim, seed in [(2, 1), (8, 2), (64, 3)]:
            cov = random_psd(dim, seed, min_eigenvalue=0.05)
            s = _stats("x", Stream(seed).normals(dim), cov)
            assert fid(s, s) <= 1e-6

    def test_equal_covariance_mean_distance(self):
        s1 = _stats("q", [0, 0], np.eye(2))
        s2 = _stats("t", [3, 4], np.eye(2))
        assert fid(s1, s2) == pytest.approx(25.0)

    def test_diagonal_closed_form(self):
        # (1+4-2*2) + (4+1-2*2) = 2
        s1 = _stats("q", [0, 0], np.diag([1.0, 4.0]))
        s2 = _stats("t", [0, 0], np.diag([4.0, 1.0]))
        assert fid(s1, s2) == pytest.approx(2.0)

    def test_symmetry(self):
        a = _stats("a", Stream(1).normals(6), random_psd(6, 4, 0.1))
        b = _stats("b", Stream(2).normals(6), random_psd(6, 5, 0.1))
        assert fid(a, b) == pytest.approx(fid(b, a), rel=1e-8)

    def test_dim_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            fid(_stats("a", [0, 0], np.eye(2)), _stats("b", [0, 0, 0], np.eye(3)))

    @pytest.mark.parametrize("seed", range(5))
    def test_equal_cov_reduces_to_mean_term(self, seed):
        dim = 6
        cov = random_psd(dim, 100 + seed, min_eigenvalue=0.05)
        mu_a = Stream(seed).normals(dim)
        mu_b = Stream(seed + 50).normals(dim) + 1.0
        value = fid(_stats("a", mu_a, cov), _stats("b", mu_b, cov))
        expected = float(np.sum((mu_a - mu_b) ** 2))
        assert value == pytest.approx(expected, rel=1e-8)

    def test_monotone_in_mean_distance(self):
        cov = random_psd(4, 9, min_eigenvalue=0.2)
        values = []
        for scale in [0.5, 1.0, 2.0, 4.0]:
            delta = np.array([scale, 0.0, 0.0, 0.0])
            values.append(fid(_stats("a", np.zeros(4), cov), _stats("b", delta, cov)))
            assert values[-1] == pytest.approx(scale**2, rel=1e-8)
        assert values == sorted(values)


class TestMatchedSubsample:
    def _set(self, n=10, dim=3, seed=0):
        return EmbeddingSet("x", Stream(seed).normals(n * dim).reshape(n, dim))

    def test_full_draw_same_multiset(self):
        emb = self._set(6)
        out = matched_subsample(emb, 6, seed=3)
        got = sorted(map(tuple, out.vectors.tolist()))
        want = sorted(map(tuple, emb.vectors.tolist()))
        assert got == want

    def test_deterministic(self):
        emb = self._set(10)
        a = matched_subsample(emb, 4, seed=42)
        b = matched_subsample(emb, 4, seed=42)
        assert np.array_equal(a.vectors, b.vectors)

    def test_rows_are_subset(self):
        emb = self._set(4, dim=2, seed=7)
        out = matched_subsample(emb, 2, seed=42)
        rows = {tuple(r) for r in emb.vectors.tolist()}
        assert all(tuple(r) in rows for r in out.vectors.tolist())

    def test_out_of_range(self):
        emb = self._set(5)
        with pytest.raises(SubsampleRangeError):
            matched_subsample(emb, 1, seed=0)
        with pytest.raises(SubsampleRangeError):
            matched_subsample(emb, 6, seed=0)


class TestFidMatched:
    def test_identical_sets_zero(self):
        emb = EmbeddingSet("x", Stream(3).normals(50 * 4).reshape(50, 4))
        score = fid_matched(emb, emb, seed=0)
        assert score.value <= 1e-6
        assert score.seed is None

    def test_counts_match_smaller_side(self):
        q = EmbeddingSet("q", Stream(1).normals(100 * 3).reshape(100, 3))
        t = EmbeddingSet("t", Stream(2).normals(300 * 3).reshape(300, 3))
        score = fid_matched(q, t, seed=11)
        assert score.sample_count_query == 100
        assert score.sample_count_target == 100
        assert score.seed == 11

    def test_requires_two_rows(self):
        one = EmbeddingSet("x", [[1.0, 2.0]])
        ok = EmbeddingSet("y", [[1.0, 2.0], [3.0, 4.0]])
        with pytest.raises(InsufficientSamplesError):
            fid_matched(one, ok)

    def test_gaussian_closed_form_at_scale(self):
        # 5000 draws per side from N(0, I8) and N(2 e1, I8): truth is 4
        a = ClusterSpec("a", np.zeros(8), np.eye(8), 5000)
        b = ClusterSpec("b", np.array([2.0] + [0.0] * 7), np.eye(8), 5000)
        score = fid_matched(sample_cluster(a, 101), sample_cluster(b, 202), seed=0)
        assert score.value == pytest.approx(4.0, rel=0.05)

    def test_gaussian_consistency_error_shrinks(self):
        # median |empirical - analytic| over 10 seeds, non-increasing in n
        a = ClusterSpec("a", np.zeros(4), np.diag([1.0, 0.5, 2.0, 1.5]), 2)
        b = ClusterSpec("b", np.full(4, 1.0), np.diag([0.5, 1.5, 1.0, 2.0]), 2)
        truth = analytic_fid(a, b)
        medians = []
        for n in (200, 1000, 5000):
            errors = []
            for rep in range(10):
                sa = sample_cluster(
                    ClusterSpec("a", a.mean, a.covariance, n), seed=1000 + rep
                )
                sb = sample_cluster(
                    ClusterSpec("b", b.mean, b.covariance, n), seed=2000 + rep
                )
                errors.append(abs(fid_matched(sa, sb, seed=0).value - truth))
            medians.append(float(np.median(errors)))
        assert medians[0] >= medians[1] >= medians[2]

    def test_direction_registry(self):
        assert METRIC_DIRECTIONS == {"cosine": "descending", "fid": "ascending"}


class TestCosineScore:
    def test_same_set_gives_one(self):
        emb = EmbeddingSet("q", Stream(9).normals(20 * 3).reshape(20, 3) + 2.0)
        score = cosine_score(emb, emb)
        assert score.value == 1.0
        assert score.metric == "cosine"
        assert score.seed is None
        assert score.sample_count_query == 20
