import numpy as np
import pytest

from uavloc.cluster import (ClusterSet, Observation, _kmeans_pp_init, _lloyd,
                            compute_k, filter_clusters, kmeans,
                            max_pairwise_distance, select_reference_nodes,
                            threshold_rssi)
from uavloc.geo import GeoPoint, PlanarPoint, project, unproject
from uavloc.pathloss import Calibration

ORIGIN = GeoPoint(40.8081, 29.3560)
CAL = Calibration(d0=100.0, p0_dbm=-45.0, n=2.0)


def obs_at(x, y, rssi, t=0.0):
    return Observation(t=t, pos=unproject(ORIGIN, PlanarPoint(x, y)), rssi=rssi)


def test_threshold_disabled():
    obs = [obs_at(0, 0, -90.0), obs_at(1, 0, -121.0)]
    assert threshold_rssi(obs, float("-inf")) == obs


def test_threshold_all_below():
    obs = [obs_at(0, 0, -90.0), obs_at(1, 0, -121.0)]
    assert threshold_rssi(obs, -50.0) == []


def test_threshold_mixed():
    obs = [obs_at(0, 0, -90.0), obs_at(1, 0, -121.0), obs_at(2, 0, -70.0)]
    assert [o.rssi for o in threshold_rssi(obs, -120.0)] == [-90.0, -70.0]


def test_compute_k_single_point():
    assert compute_k([obs_at(0, 0, -50.0)] * 5, ma=130.0) == 1


def test_compute_k_exact_division():
    # north-south displacement: haversine is exactly R * dlat = 650 m
    obs = [obs_at(0, 0, -50.0)] + [obs_at(0, 650, -50.0)] * 9
    assert compute_k(obs, ma=130.0) == 5


def test_compute_k_ceil():
    obs = [obs_at(0, 0, -50.0)] + [obs_at(0, 651, -50.0)] * 9
    assert compute_k(obs, ma=130.0) == 6


def test_compute_k_clamped_to_n():
    obs = [obs_at(0, 0, -50.0), obs_at(0, 5000, -50.0)]
    assert compute_k(obs, ma=10.0) == 2


def test_compute_k_monotone():
    rng = np.random.default_rng(3)
    obs = [obs_at(rng.uniform(0, 2000), rng.uniform(0, 2000), -50.0) for _ in range(40)]
    ks = [compute_k(obs, ma) for ma in (50, 100, 200, 400)]
    assert ks == sorted(ks, reverse=True)


def test_max_pairwise_distance_matches_scalar():
    from uavloc.geo import haversine
    rng = np.random.default_rng(4)
    obs = [obs_at(rng.uniform(0, 3000), rng.uniform(0, 3000), -50.0) for _ in range(25)]
    expect = max(haversine(a.pos, b.pos) for a in obs for b in obs)
    assert max_pairwise_distance(obs) == pytest.approx(expect, rel=1e-9)


def test_kmeans_k_equals_n():
    pts = [PlanarPoint(float(i * 100), 0.0) for i in range(6)]
    cs = kmeans(pts, 6, seed=0)
    assert len(cs.clusters) == 6
    assert all(len(c.members) == 1 for c in cs.clusters)


def test_kmeans_two_blobs():
    rng = np.random.default_rng(8)
    blob_a = [PlanarPoint(rng.normal(0, 5), rng.normal(0, 5)) for _ in range(30)]
    blob_b = [PlanarPoint(rng.normal(2000, 5), rng.normal(0, 5)) for _ in range(30)]
    cs = kmeans(blob_a + blob_b, 2, seed=1)
    groups = sorted(tuple(sorted(c.members)) for c in cs.clusters)
    assert groups == [tuple(range(30)), tuple(range(30, 60))]


def test_kmeans_deterministic():
    rng = np.random.default_rng(9)
    pts = [PlanarPoint(rng.uniform(0, 1000), rng.uniform(0, 1000)) for _ in range(80)]
    assert kmeans(pts, 5, seed=42) == kmeans(pts, 5, seed=42)


def test_kmeans_partition():
    rng = np.random.default_rng(10)
    pts = [PlanarPoint(rng.uniform(0, 1000), rng.uniform(0, 1000)) for _ in range(100)]
    cs = kmeans(pts, 7, seed=3)
    all_members = sorted(i for c in cs.clusters for i in c.members)
    assert all_members == list(range(100))


def test_kmeans_rejects_bad_k():
    pts = [PlanarPoint(0.0, 0.0), PlanarPoint(1.0, 1.0)]
    with pytest.raises(ValueError):
        kmeans(pts, 3, seed=0)
    with pytest.raises(ValueError):
        kmeans(pts, 0, seed=0)


def test_lloyd_sse_non_increasing():
    rng = np.random.default_rng(12)
    pts = rng.uniform(0, 1000, size=(120, 2))
    centers = _kmeans_pp_init(pts, 6, rng)
    _, _, sse = _lloyd(pts, centers)
    assert all(a >= b - 1e-9 for a, b in zip(sse, sse[1:]))


def test_filter_clusters():
    from uavloc.cluster import Cluster
    cs = ClusterSet((
        Cluster(PlanarPoint(0, 0), tuple(range(0, 3))),
        Cluster(PlanarPoint(1, 0), tuple(range(3, 11))),
        Cluster(PlanarPoint(2, 0), tuple(range(11, 23))),
    ))
    assert len(filter_clusters(cs, 0).clusters) == 3
    kept = filter_clusters(cs, 8).clusters
    assert len(kept) == 1 and len(kept[0].members) == 12
    assert filter_clusters(cs, 12).clusters == ()


def test_select_reference_nodes_max_rssi():
    from uavloc.cluster import Cluster
    obs = [obs_at(0, 0, -80.0, t=0), obs_at(10, 0, -60.0, t=1), obs_at(20, 0, -75.0, t=2)]
    points = [project(ORIGIN, o.pos) for o in obs]
    cs = ClusterSet((Cluster(PlanarPoint(10, 0), (0, 1, 2)),))
    refs = select_reference_nodes(cs, obs, points, CAL)
    assert len(refs) == 1
    assert refs[0].rssi == -60.0
    assert refs[0].pos_geo == obs[1].pos


def test_select_reference_nodes_tie_breaks_earliest():
    from uavloc.cluster import Cluster
    obs = [obs_at(0, 0, -60.0, t=3.0), obs_at(10, 0, -60.0, t=9.0)]
    points = [project(ORIGIN, o.pos) for o in obs]
    cs = ClusterSet((Cluster(PlanarPoint(5, 0), (0, 1)),))
    refs = select_reference_nodes(cs, obs, points, CAL)
    assert refs[0].pos_geo == obs[0].pos


def test_select_reference_nodes_singletons():
    from uavloc.cluster import Cluster
    obs = [obs_at(0, 0, -70.0, t=0), obs_at(500, 0, -65.0, t=1)]
    points = [project(ORIGIN, o.pos) for o in obs]
    cs = ClusterSet((Cluster(points[0], (0,)), Cluster(points[1], (1,))))
    refs = select_reference_nodes(cs, obs, points, CAL)
    assert [r.rssi for r in refs] == [-70.0, -65.0]
    # distance comes straight from the inversion
    assert refs[0].distance == pytest.approx(10.0 ** (25.0 / 20.0) * 100.0, rel=1e-12)


def test_observation_validation():
    with pytest.raises(ValueError):
        Observation(t=0.0, pos=ORIGIN, rssi=60.0)
    with pytest.raises(ValueError):
        Observation(t=float("nan"), pos=ORIGIN, rssi=-60.0)
