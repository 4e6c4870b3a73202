import math

import numpy as np
import pytest

from twistlab import centralizer as cz
from twistlab import jl
from twistlab.twisted import TwistedVector


def test_point_cloud():
    c = jl.random_cloud(5, 7, seed=1)
    assert c.coords.shape == (5, 7)
    assert c.differences().shape == (10, 7)
    assert jl.random_cloud(5, 7, seed=1).coords.tolist() == c.coords.tolist()
    flat = jl.random_cloud(5, 8, seed=1, y_part=False)
    assert not flat.coords[:, 1::2].any()
    with pytest.raises(ValueError):
        jl.PointCloud(np.ones((1, 3)), 3)
    with pytest.raises(ValueError):
        jl.PointCloud(np.ones((2, 4)), 3)
    pts = [TwistedVector.basis(1), TwistedVector.basis(4)]
    assert jl.PointCloud.from_vectors(pts).M == 4


def test_split_structure():
    cloud = jl.random_cloud(20, 30, seed=2)
    sp = jl.log_split(cloud, samples=20)
    assert sp.head_dim == math.floor(math.log(20))
    assert sp.E1.shape[1] <= sp.head_dim
    assert sp.E1.shape[1] + sp.E2.shape[1] == sp.rank_E == 19
    # E2 lives on the tail, E1 is orthogonal to it
    assert np.allclose(sp.E2[:sp.head_dim], 0, atol=1e-10)
    assert np.allclose(sp.E1.T @ sp.E2, 0, atol=1e-10)
    assert sp.to_json()["logBase"] == "e"


def test_split_zero_omega_is_isometric_on_E2():
    cloud = jl.random_cloud(10, 40, seed=3, y_part=False)
    sp = jl.log_split(cloud, cz.ZERO, samples=50)
    # y = 0 on the whole span, so the quasi-norm is Euclidean
    assert sp.distortion_E2 == pytest.approx(1.0)


def test_degenerate_cloud():
    with pytest.raises(ValueError, match="degenerate"):
        jl.log_split(jl.PointCloud(np.ones((3, 4)), 4))


def test_floor_dim_enforced():
    cloud = jl.random_cloud(16, 32, seed=0)
    sp = jl.log_split(cloud, samples=10)
    floor = jl.floor_dim(16, sp.head_dim)
    assert floor == sp.head_dim + math.ceil(4 * math.log(16))
    with pytest.raises(ValueError, match="floor"):
        jl.jl_compress(cloud, sp, floor - 1)
    comp = jl.jl_compress(cloud, sp, floor)
    assert comp.distortion >= 1
    assert comp.apply(cloud.coords[0]).shape == (floor,)


def test_two_points_have_distortion_one():
    cloud = jl.random_cloud(2, 10, seed=4)
    sp = jl.log_split(cloud, samples=5)
    comp = jl.jl_compress(cloud, sp, jl.floor_dim(2, sp.head_dim))
    assert comp.distortion == pytest.approx(1.0)


def test_scale_invariance():
    cloud = jl.random_cloud(12, 24, seed=5)
    big = jl.PointCloud(7.5 * cloud.coords, cloud.M)
    om = cz.kalton_peck()
    td = jl.floor_dim(12, 2)
    a = jl.jl_compress(cloud, jl.log_split(cloud, om, 10), td, seed=3, omega=om)
    b = jl.jl_compress(big, jl.log_split(big, om, 10), td, seed=3, omega=om)
    assert a.distortion == pytest.approx(b.distortion, rel=1e-9)


def test_pipeline_matches_oracle_per_seed():
    for s in range(5):
        cloud = jl.random_cloud(64, 64, seed=s, y_part=False)
        sp = jl.log_split(cloud, samples=5)
        comp = jl.jl_compress(cloud, sp, 24, seed=s)
        assert comp.distortion == pytest.approx(jl.gaussian_oracle(cloud, 24, seed=s), rel=1e-9)


def test_projection_independent_of_cloud_stream():
    # the cloud and the Gaussian share a seed but must not share random numbers
    cloud = jl.random_cloud(16, 32, seed=7)
    sp = jl.log_split(cloud, samples=5)
    comp = jl.jl_compress(cloud, sp, jl.floor_dim(16, sp.head_dim), seed=7)
    G = comp.G * math.sqrt(comp.G.shape[0])
    assert not np.isclose(G[0], cloud.coords[0]).any()


def test_oracle_refuses_rank_deficient_use():
    coords = np.zeros((3, 6))
    coords[1, :2] = 1
    coords[2, :2] = 2
    with pytest.raises(ValueError):
        jl.gaussian_oracle(jl.PointCloud(coords, 6), 4)


def test_ks_distance():
    assert jl.ks_distance([1, 2, 3], [1, 2, 3]) == 0
    assert jl.ks_distance([0, 0], [1, 1]) == 1
