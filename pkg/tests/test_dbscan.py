import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from synchrocal.dbscan import CORE, NOISE, OUTLIER, REACHABLE, DbscanConfig, cluster, neighborhoods
from synchrocal.errors import EmptyInput


def oracle(points, eps, min_pts):
    """Union-find over the core graph, written independently of the module."""
    X = np.asarray(points, dtype=float).reshape(len(points), -1)
    n = len(X)
    near = [[j for j in range(n) if np.linalg.norm(X[i] - X[j]) <= eps] for i in range(n)]
    core = [len(near[i]) >= min_pts for i in range(n)]
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in near[i]:
            if core[i] and core[j]:
                a, b = find(i), find(j)
                parent[max(a, b)] = min(a, b)
    ids, labels, roles = {}, [OUTLIER] * n, []
    for i in range(n):
        if core[i]:
            root = find(i)
            ids.setdefault(root, len(ids))
            labels[i] = ids[root]
    for i in range(n):
        if core[i]:
            roles.append(CORE)
            continue
        cores = [j for j in near[i] if core[j]]
        if cores:
            labels[i] = labels[min(cores)]
            roles.append(REACHABLE)
        else:
            roles.append(NOISE)
    return labels, roles


def random_instance(rng):
    n = int(rng.integers(1, 51))
    d = int(rng.integers(1, 4))
    centers = rng.uniform(-3, 3, size=(int(rng.integers(1, 5)), d))
    pts = centers[rng.integers(0, len(centers), n)] + rng.normal(scale=0.4, size=(n, d))
    # snap to a grid so exact-distance ties occur
    if rng.random() < 0.3:
        pts = np.round(pts * 2) / 2
    return pts, float(rng.uniform(0.1, 1.5)), int(rng.integers(1, 6))


def test_matches_oracle_on_random_instances():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        pts, eps, m = random_instance(rng)
        got = cluster(pts, DbscanConfig(eps, m))
        labels, roles = oracle(pts, eps, m)
        assert got.labels.tolist() == labels
        assert list(got.point_roles) == roles


@settings(max_examples=60)
@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=1, max_size=30),
       st.floats(0.05, 3), st.integers(1, 5))
def test_matches_oracle_hypothesis(pts, eps, m):
    got = cluster(pts, DbscanConfig(eps, m))
    labels, roles = oracle(pts, eps, m)
    assert got.labels.tolist() == labels
    assert list(got.point_roles) == roles


def _partition(labels):
    groups = {}
    for i, l in enumerate(labels):
        if l != OUTLIER:
            groups.setdefault(l, set()).add(i)
    return {frozenset(g) for g in groups.values()}


def test_core_partition_is_permutation_invariant():
    rng = np.random.default_rng(7)
    for _ in range(30):
        pts, eps, m = random_instance(rng)
        perm = rng.permutation(len(pts))
        a = cluster(pts, DbscanConfig(eps, m))
        b = cluster(pts[perm], DbscanConfig(eps, m))
        core_a = {frozenset(g & set(np.flatnonzero(np.array(a.point_roles) == CORE))) for g in _partition(a.labels)}
        inv = np.argsort(perm)
        roles_b = np.array(b.point_roles)[inv]
        labels_b = b.labels[inv]
        core_b = {frozenset(g & set(np.flatnonzero(roles_b == CORE))) for g in _partition(labels_b)}
        assert core_a == core_b
        assert (np.array(a.point_roles) == NOISE).tolist() == (roles_b == NOISE).tolist()


def test_agrees_with_sklearn_on_core_points():
    sk = pytest.importorskip("sklearn.cluster")
    rng = np.random.default_rng(11)
    for _ in range(30):
        pts, eps, m = random_instance(rng)
        ours = cluster(pts, DbscanConfig(eps, m))
        ref = sk.DBSCAN(eps=eps, min_samples=m).fit(pts)
        core = np.zeros(len(pts), bool)
        core[ref.core_sample_indices_] = True
        assert (np.array(ours.point_roles) == CORE).tolist() == core.tolist()
        assert _partition(np.where(core, ours.labels, OUTLIER)) == _partition(np.where(core, ref.labels_, OUTLIER))


def test_closed_ball_boundary():
    c = cluster([0.0, 1.0, 2.0], DbscanConfig(1.0, 2))
    assert c.labels.tolist() == [0, 0, 0]
    assert neighborhoods([0.0, 1.0], 1.0).all()


def test_single_outlier_and_main_cluster():
    pts = [0.0, 0.001, 0.002, -0.001, 0.5]
    c = cluster(pts, DbscanConfig(0.005, 3))
    assert c.outliers.tolist() == [4]
    assert c.main_cluster() == 0
    assert c.members(0).tolist() == [0, 1, 2, 3]
    assert cluster([0.0, 5.0], DbscanConfig(0.1, 2)).main_cluster() == OUTLIER


def test_invalid_inputs():
    with pytest.raises(EmptyInput):
        cluster(np.empty((0, 2)), DbscanConfig(1.0))
    with pytest.raises(ValueError):
        DbscanConfig(0.0)
    with pytest.raises(ValueError):
        DbscanConfig(1.0, 0)
