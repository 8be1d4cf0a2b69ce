import numpy as np
import pytest

from volclust.clustering import HardClustering


def test_valid_partition():
    c = HardClustering(3, [2, 0, 1, 1])
    assert c.n == 4
    assert c.sizes().tolist() == [1, 2, 1]
    assert c.members(1).tolist() == [2, 3]
    with pytest.raises(ValueError):
        c.labels[0] = 1


@pytest.mark.parametrize("k,labels", [(3, [0, 1, 1]), (2, [0, 2]), (2, [-1, 0]), (2, []), (0, [0])])
def test_invalid_partitions(k, labels):
    with pytest.raises(ValueError):
        HardClustering(k, labels)


def test_from_labels_compacts_in_order():
    c = HardClustering.from_labels([4, 1, 4, 1, 2], 5)
    assert c.labels.tolist() == [2, 0, 2, 0, 1]
    assert c.k == 3 and c.compacted
    assert not HardClustering.from_labels(np.array([0, 1, 1])).compacted
