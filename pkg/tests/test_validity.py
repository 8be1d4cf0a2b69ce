import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from volclust.clustering import HardClustering
from volclust.errors import DegenerateClusteringError
from volclust.validity import dunn_index, silhouette_index, silhouette_samples, validity_report


def ref_silhouette(x, labels):
    """Brute-force per-point silhouette straight from the definition."""
    n = len(labels)
    out = []
    for i in range(n):
        own = [j for j in range(n) if labels[j] == labels[i] and j != i]
        if not own:
            out.append(0.0)
            continue
        dist = lambda j: float(np.sqrt(((x[i] - x[j]) ** 2).sum()))
        a = sum(dist(j) for j in own) / len(own)
        b = min(
            sum(dist(j) for j in range(n) if labels[j] == c) / sum(1 for j in range(n) if labels[j] == c)
            for c in set(labels.tolist()) if c != labels[i]
        )
        out.append(0.0 if max(a, b) == 0 else (b - a) / max(a, b))
    return np.array(out)


def ref_dunn(x, labels):
    n = len(labels)
    inter, intra = np.inf, 0.0
    for i in range(n):
        for j in range(i + 1, n):
            d = float(np.sqrt(((x[i] - x[j]) ** 2).sum()))
            if labels[i] == labels[j]:
                intra = max(intra, d)
            else:
                inter = min(inter, d)
    return inter / intra


def four():
    return np.array([[0.0], [1.0], [10.0], [11.0]]), HardClustering(2, [0, 0, 1, 1])


def test_four_point_example():
    x, c = four()
    mean, s = silhouette_index(x, c)
    np.testing.assert_allclose(s, [0.904762, 0.894737, 0.894737, 0.904762], atol=1e-6)
    assert mean == pytest.approx(0.899749, abs=1e-6)
    assert dunn_index(x, c) == pytest.approx(9.0, abs=1e-12)


def test_coincident_clusters_zero():
    x = np.zeros((4, 2))
    assert silhouette_index(x, HardClustering(2, [0, 0, 1, 1]))[0] == 0.0


def test_singletons_zero():
    assert silhouette_index(np.array([[0.0], [5.0]]), HardClustering(2, [0, 1]))[0] == 0.0


def test_dunn_overlap_zero():
    x = np.array([[0.0], [1.0], [1.0], [3.0]])
    assert dunn_index(x, HardClustering(2, [0, 0, 1, 1])) == 0.0


def test_dunn_degenerate():
    with pytest.raises(DegenerateClusteringError):
        dunn_index(np.array([[0.0], [5.0]]), HardClustering(2, [0, 1]))
    with pytest.raises(DegenerateClusteringError):
        dunn_index(np.zeros((4, 1)), HardClustering(2, [0, 0, 1, 1]))
    with pytest.raises(DegenerateClusteringError):
        silhouette_index(np.zeros((3, 1)), HardClustering(1, [0, 0, 0]))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**31), st.floats(1e-3, 1e3))
def test_dunn_scale_invariant(seed, c):
    r = np.random.default_rng(seed)
    x = r.normal(size=(12, 2))
    cl = HardClustering(3, np.arange(12) % 3)
    assert dunn_index(x * c, cl) == pytest.approx(dunn_index(x, cl), rel=1e-12)


def test_matches_bruteforce_on_random_instances():
    r = np.random.default_rng(42)
    for _ in range(60):
        n, p, k = int(r.integers(6, 40)), int(r.integers(1, 6)), int(r.integers(2, 6))
        x = r.normal(size=(n, p))
        labels = np.concatenate([np.arange(k), r.integers(0, k, n - k)])
        r.shuffle(labels)
        c = HardClustering(k, labels)
        np.testing.assert_allclose(silhouette_samples(x, c), ref_silhouette(x, labels), rtol=0, atol=1e-12)
        assert abs(dunn_index(x, c) - ref_dunn(x, labels)) <= 1e-12


def test_report_flags():
    x, _ = four()
    rep = validity_report(np.vstack([x, [[50.0]]]), HardClustering(3, [0, 0, 1, 1, 2]))
    assert rep.dunn is not None
    assert any("singleton" in f for f in rep.flags)
    rep = validity_report(np.array([[0.0], [5.0]]), HardClustering.from_labels([0, 2], 3))
    assert rep.dunn is None
    assert any("compacted" in f for f in rep.flags) and any("dunn" in f for f in rep.flags)
    assert set(rep.to_dict()) == {"k", "silhouette", "dunn", "flags"}
