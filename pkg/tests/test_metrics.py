import itertools
import math

import numpy as np
import pytest
from sklearn.metrics import normalized_mutual_info_score

from kafs.data import DataMatrix, PlantedSpec, generate_planted
from kafs.metrics import EvalReport, acc, distance_correlation, evaluate, kmeans, nmi, red


def acc_permutation_oracle(pred, truth):
    """Maximize matches over every one-to-one relabeling of pred clusters."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    p_ids = np.unique(pred)
    t_ids = np.unique(truth)
    size = max(len(p_ids), len(t_ids))
    best = 0
    for perm in itertools.permutations(range(size)):
        matched = 0
        for pi, p_id in enumerate(p_ids):
            target = perm[pi]
            if target < len(t_ids):
                matched += int(np.sum((pred == p_id) & (truth == t_ids[target])))
        best = max(best, matched)
    return best / pred.size


def nmi_contingency_oracle(pred, truth):
    """Direct summation over the contingency table with natural logs."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    n = pred.size
    p_ids = list(np.unique(pred))
    t_ids = list(np.unique(truth))
    counts = [[int(np.sum((pred == a) & (truth == b))) for b in t_ids] for a in p_ids]
    hp = -sum(
        (sum(row) / n) * math.log(sum(row) / n) for row in counts if sum(row) > 0
    )
    hq = 0.0
    for j in range(len(t_ids)):
        col = sum(counts[i][j] for i in range(len(p_ids)))
        if col > 0:
            hq -= (col / n) * math.log(col / n)
    if hp == 0.0 or hq == 0.0:
        return 1.0 if hp == hq else 0.0
    mi = 0.0
    for i, row in enumerate(counts):
        for j, c in enumerate(row):
            if c > 0:
                pi = sum(row) / n
                qj = sum(counts[a][j] for a in range(len(p_ids))) / n
                mi += (c / n) * math.log((c / n) / (pi * qj))
    return mi / math.sqrt(hp * hq)


def distance_correlation_oracle(x, y):
    """Definitional double-centered computation with explicit loops."""
    n = len(x)
    a = [[abs(x[i] - x[j]) for j in range(n)] for i in range(n)]
    b = [[abs(y[i] - y[j]) for j in range(n)] for i in range(n)]

    def center_rows(m):
        grand = sum(sum(row) for row in m) / n**2
        rows = [sum(row) / n for row in m]
        cols = [sum(m[i][j] for i in range(n)) / n for j in range(n)]
        return [[m[i][j] - rows[i] - cols[j] + grand for j in range(n)] for i in range(n)]

    ca = center_rows(a)
    cb = center_rows(b)
    dcov2 = sum(ca[i][j] * cb[i][j] for i in range(n) for j in range(n)) / n**2
    dvx = sum(v * v for row in ca for v in row) / n**2
    dvy = sum(v * v for row in cb for v in row) / n**2
    if dvx <= 0 or dvy <= 0 or dcov2 <= 0:
        return 0.0
    return math.sqrt(dcov2 / math.sqrt(dvx * dvy))


class TestKmeans:
    def test_well_separated_blobs(self):
        pts = np.array([0.0, 0.1, 10.0, 10.1])[:, None]
        labels = kmeans(pts, 2, seed=0)
        assert labels[0] == labels[1] and labels[2] == labels[3]
        assert labels[0] != labels[2]

    def test_one_cluster_per_point(self):
        rng = np.random.default_rng(0)
        pts = rng.standard_normal((5, 2))
        labels = kmeans(pts, 5, seed=1)
        assert sorted(labels.tolist()) == [0, 1, 2, 3, 4]
        centroids = np.array([pts[labels == c].mean(axis=0) for c in range(5)])
        sse = ((pts - centroids[labels]) ** 2).sum()
        assert sse == pytest.approx(0.0, abs=1e-20)

    def test_single_cluster(self):
        pts = np.random.default_rng(1).standard_normal((6, 3))
        assert np.all(kmeans(pts, 1, seed=0) == 0)

    def test_too_many_clusters_rejected(self):
        with pytest.raises(ValueError, match="n_clusters"):
            kmeans(np.zeros((3, 1)), 4)

    def test_deterministic(self):
        pts = np.random.default_rng(2).standard_normal((40, 3))
        a = kmeans(pts, 4, seed=9)
        b = kmeans(pts, 4, seed=9)
        np.testing.assert_array_equal(a, b)

    def test_sse_monotone_descent(self):
        rng = np.random.default_rng(3)
        for seed in range(10):
            pts = rng.standard_normal((50, 4))
            _, history = kmeans(pts, 5, seed=seed, return_history=True)
            diffs = np.diff(np.asarray(history))
            assert np.all(diffs <= 1e-9 * np.abs(np.asarray(history)[:-1]))

    def test_every_cluster_nonempty(self):
        rng = np.random.default_rng(4)
        for seed in range(10):
            pts = rng.standard_normal((20, 2))
            labels = kmeans(pts, 6, seed=seed)
            assert len(np.unique(labels)) == 6

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError, match="non-finite"):
            kmeans(np.array([[np.nan], [0.0]]), 1)


class TestAcc:
    def test_identical_labelings(self):
        assert acc([0, 1, 2, 0], [0, 1, 2, 0]) == 1.0

    def test_permuted_labels(self):
        assert acc([0, 0, 1, 1], [1, 1, 0, 0]) == 1.0

    def test_half_match(self):
        got = acc([0, 1, 0, 1], [0, 0, 1, 1])
        assert got == acc_permutation_oracle([0, 1, 0, 1], [0, 0, 1, 1]) == 0.5

    def test_exhaustive_small_cases(self):
        # every pair of labelings over 3 symbols for n = 4
        for pred in itertools.product(range(3), repeat=4):
            for truth in itertools.product(range(3), repeat=4):
                assert acc(pred, truth) == pytest.approx(
                    acc_permutation_oracle(pred, truth), abs=1e-12
                )

    def test_relabeling_invariance(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            pred = rng.integers(0, 4, size=12)
            truth = rng.integers(0, 3, size=12)
            base = acc(pred, truth)
            perm = rng.permutation(4)
            assert acc(perm[pred], truth) == pytest.approx(base, abs=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            acc([0, 1], [0, 1, 2])


class TestNmi:
    def test_identical_with_two_classes(self):
        assert nmi([0, 1, 0, 1], [0, 1, 0, 1]) == pytest.approx(1.0, abs=1e-12)

    def test_independent_labelings(self):
        assert nmi([0, 1, 0, 1], [0, 0, 1, 1]) == 0.0

    def test_hand_computed_contingency(self):
        got = nmi([0, 0, 1, 2], [0, 0, 1, 1])
        want = nmi_contingency_oracle([0, 0, 1, 2], [0, 0, 1, 1])
        assert got == pytest.approx(want, abs=1e-10)
        assert got == pytest.approx(0.8164965809277261, abs=1e-10)

    def test_matches_oracle_on_random_labelings(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            n = int(rng.integers(3, 20))
            pred = rng.integers(0, 4, size=n)
            truth = rng.integers(0, 3, size=n)
            got = nmi(pred, truth)
            assert got == pytest.approx(nmi_contingency_oracle(pred, truth), abs=1e-10)
            if len(np.unique(pred)) > 1 and len(np.unique(truth)) > 1:
                skl = normalized_mutual_info_score(truth, pred, average_method="geometric")
                assert got == pytest.approx(skl, abs=1e-10)

    def test_symmetry(self):
        rng = np.random.default_rng(7)
        pred = rng.integers(0, 3, size=15)
        truth = rng.integers(0, 4, size=15)
        assert nmi(pred, truth) == pytest.approx(nmi(truth, pred), abs=1e-12)

    def test_degenerate_conventions(self):
        assert nmi([0, 0, 0], [1, 1, 1]) == 1.0  # both constant
        assert nmi([0, 0, 0], [0, 1, 2]) == 0.0  # one constant
        assert nmi([0, 1, 2], [5, 5, 5]) == 0.0

    def test_value_range(self):
        rng = np.random.default_rng(8)
        for _ in range(30):
            pred = rng.integers(0, 5, size=25)
            truth = rng.integers(0, 5, size=25)
            v = nmi(pred, truth)
            assert 0.0 <= v <= 1.0 + 1e-12


class TestDistanceCorrelation:
    def test_self_correlation_is_exactly_one(self):
        rng = np.random.default_rng(9)
        for _ in range(10):
            x = rng.standard_normal(12)
            assert distance_correlation(x, x) == 1.0

    def test_affine_invariance(self):
        rng = np.random.default_rng(10)
        x = rng.standard_normal(15)
        assert distance_correlation(x, 3.5 * x - 2.0) == pytest.approx(1.0, abs=1e-10)
        assert distance_correlation(x, -0.2 * x + 7.0) == pytest.approx(1.0, abs=1e-10)

    def test_constant_input_gives_zero(self):
        x = np.arange(6.0)
        assert distance_correlation(x, np.full(6, 3.0)) == 0.0
        assert distance_correlation(np.full(6, -1.0), x) == 0.0

    def test_matches_definitional_oracle(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            x = rng.standard_normal(6)
            y = rng.standard_normal(6)
            got = distance_correlation(x, y)
            assert got == pytest.approx(distance_correlation_oracle(x, y), abs=1e-10)

    def test_symmetry_and_range(self):
        rng = np.random.default_rng(12)
        for _ in range(20):
            x = rng.standard_normal(10)
            y = rng.standard_normal(10) + 0.5 * x
            v = distance_correlation(x, y)
            assert v == pytest.approx(distance_correlation(y, x), abs=1e-12)
            assert 0.0 <= v <= 1.0

    def test_too_short_rejected(self):
        with pytest.raises(ValueError, match="at least 2"):
            distance_correlation([1.0], [2.0])

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            distance_correlation([1.0, 2.0], [1.0, 2.0, 3.0])


class TestRed:
    def test_identical_features_give_exactly_one(self):
        x = np.random.default_rng(13).standard_normal(10)
        assert red(np.column_stack([x, x])) == 1.0

    def test_constant_feature_pair_gives_zero(self):
        x = np.arange(8.0)
        assert red(np.column_stack([x, np.full(8, 2.0)])) == 0.0

    def test_three_features_mean_of_pairs(self):
        rng = np.random.default_rng(14)
        f = rng.standard_normal((9, 3))
        pairs = [
            distance_correlation(f[:, 0], f[:, 1]),
            distance_correlation(f[:, 0], f[:, 2]),
            distance_correlation(f[:, 1], f[:, 2]),
        ]
        assert red(f) == pytest.approx(np.mean(pairs), abs=1e-12)

    def test_single_feature_rejected(self):
        with pytest.raises(ValueError, match="at least 2 features"):
            red(np.zeros((5, 1)))


class TestEvaluate:
    def make_data(self, **kwargs):
        spec = PlantedSpec(
            n=kwargs.pop("n", 60),
            d_informative=kwargs.pop("d_informative", 3),
            d_noise=kwargs.pop("d_noise", 4),
            n_classes=kwargs.pop("n_classes", 3),
            separation=kwargs.pop("separation", 50.0),
            seed=kwargs.pop("seed", 0),
        )
        return generate_planted(spec)

    def test_perfect_separation_single_repeat(self):
        data = self.make_data()
        rep = evaluate(data, [0, 1, 2], repeats=1, seed=0)
        assert rep.acc_mean == 1.0
        assert rep.acc_std == 0.0
        assert rep.nmi_mean == pytest.approx(1.0, abs=1e-12)
        assert rep.k_selected == 3

    def test_all_features_baseline_mode(self):
        data = self.make_data()
        rep = evaluate(data, np.arange(data.n_features), repeats=3, seed=0)
        assert rep.k_selected == data.n_features
        assert 0.0 <= rep.acc_mean <= 1.0
        assert 0.0 <= rep.red <= 1.0

    def test_deterministic(self):
        data = self.make_data(separation=5.0)
        a = evaluate(data, [0, 1], repeats=4, seed=7)
        b = evaluate(data, [0, 1], repeats=4, seed=7)
        assert a == b

    def test_population_std(self):
        data = self.make_data(separation=3.0, seed=2)
        rep = evaluate(data, [0, 1, 2], repeats=5, seed=0)
        accs = []
        from kafs.metrics import acc as acc_fn, kmeans as km

        truth = np.unique(np.asarray(data.labels), return_inverse=True)[1]
        for r in range(5):
            labels = km(data.values[:, :3], 3, seed=r)
            accs.append(acc_fn(labels, truth))
        assert rep.acc_mean == pytest.approx(np.mean(accs), abs=1e-15)
        assert rep.acc_std == pytest.approx(np.std(accs), abs=1e-15)

    def test_missing_labels_rejected(self):
        data = DataMatrix(np.random.default_rng(0).standard_normal((6, 3)), ["a", "b", "c"])
        with pytest.raises(ValueError, match="labels"):
            evaluate(data, [0, 1])

    def test_single_selected_feature_has_zero_red(self):
        data = self.make_data()
        rep = evaluate(data, [0], repeats=1, seed=0)
        assert rep.red == 0.0
        assert rep.k_selected == 1

    def test_out_of_range_indices(self):
        data = self.make_data()
        with pytest.raises(ValueError, match="out of range"):
            evaluate(data, [99], repeats=1)

    def test_report_round_trip(self):
        rep = EvalReport(0.5, 0.1, 0.4, 0.05, 0.3, 10, 5)
        d = rep.to_dict()
        assert d["acc_mean"] == 0.5 and d["repeats"] == 10
