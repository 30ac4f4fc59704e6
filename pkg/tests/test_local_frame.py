import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from layergreen import (LayeredMedium, SurfaceGraph, asymptotic_error_experiment, frame_at,
                        frozen_green, green_value, mirror_distance)
from layergreen.local_frame import DEFAULT_RAYS, mirrored_setup


def _orthonormal(frame):
    return np.abs(frame.axes @ frame.axes.T - np.eye(3)).max()


def test_flat_frame_is_identity():
    f = frame_at(SurfaceGraph.flat(), (0.3, -0.7))
    np.testing.assert_array_equal(f.axes, np.eye(3))
    np.testing.assert_array_equal(f.origin, [0.3, -0.7, 0.0])


def test_paraboloid_apex_frame():
    surf = SurfaceGraph(lambda x1, x2: (x1 ** 2 + x2 ** 2) / 10,
                        lambda x1, x2: (x1 / 5, x2 / 5))
    f = frame_at(surf, (0.0, 0.0))
    np.testing.assert_allclose(f.axes, np.eye(3), atol=1e-15)


def test_sloped_plane_normal():
    f = frame_at(SurfaceGraph.plane(1.0, 0.0), (0.0, 0.0))
    np.testing.assert_allclose(f.normal, np.array([-1.0, 0.0, 1.0]) / np.sqrt(2), rtol=1e-15)


@pytest.mark.parametrize("s_hat", [(0.0, 0.0), (0.4, -0.3), (1.5, 2.0)])
def test_frame_invariants(s_hat):
    surf = SurfaceGraph.paraboloid(2.0)
    f = frame_at(surf, s_hat)
    assert _orthonormal(f) <= 1e-12
    g1, g2 = surf.gradient(*s_hat)
    assert f.normal @ np.array([-g1, -g2, 1.0]) > 0
    assert np.linalg.det(f.axes) == pytest.approx(1.0)


def test_gradient_fallback_uses_differences():
    surf = SurfaceGraph(lambda x1, x2: 0.3 * x1 ** 2 - 0.1 * x2)
    g1, g2 = surf.gradient(1.0, 2.0)
    assert g1 == pytest.approx(0.6, abs=1e-8)
    assert g2 == pytest.approx(-0.1, abs=1e-8)


def test_frame_maps_are_inverse_isometries():
    f = frame_at(SurfaceGraph.paraboloid(3.0), (0.5, 0.2))
    rng = np.random.default_rng(4)
    p, q = rng.normal(size=(2, 3))
    np.testing.assert_allclose(f.to_world(f.to_local(p)), p, atol=1e-14)
    assert np.linalg.norm(f.to_local(p) - f.to_local(q)) == pytest.approx(np.linalg.norm(p - q),
                                                                           rel=1e-14)


def test_frozen_flat_identical_to_green_value():
    m = LayeredMedium(2, 1)
    f = frame_at(SurfaceGraph.flat(), (0.0, 0.0))
    x, y = np.array([0.1, 0.2, -0.3]), np.array([-0.2, 0.1, 0.4])
    assert abs(frozen_green(m, f, x, y, radius=1.0) - green_value(m, x, y)) <= 1e-14 * green_value(m, x, y)


def test_frozen_outside_neighbourhood_raises():
    f = frame_at(SurfaceGraph.flat(), (0.0, 0.0))
    with pytest.raises(ValueError):
        frozen_green(LayeredMedium(2, 1), f, (0, 0, 2.0), (0, 0, 0.1), radius=1.0)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_frozen_rotation_invariance(seed):
    m = LayeredMedium(2, 1)
    f = frame_at(SurfaceGraph.paraboloid(4.0), (0.3, -0.1))
    x = f.to_world([0.1, 0.05, 0.2])
    y = f.to_world([-0.05, 0.1, -0.15])
    rot = Rotation.random(random_state=seed).as_matrix()
    u = frozen_green(m, f, x, y, radius=1.0)
    u_rot = frozen_green(m, f.rotated(rot), rot @ x, rot @ y, radius=1.0)
    assert abs(u_rot - u) <= 1e-12 * u
    xi, eta = f.to_local(x), f.to_local(y)
    xr, er = f.rotated(rot).to_local(rot @ x), f.rotated(rot).to_local(rot @ y)
    assert mirror_distance(xr, er) == pytest.approx(mirror_distance(xi, eta), rel=1e-13)


def test_flat_control_is_exactly_zero():
    table = asymptotic_error_experiment(LayeredMedium(2, 1), SurfaceGraph.flat(), (0, 0),
                                        [0.4, 0.2], n=33)
    assert np.all(table.errors() == 0.0)


def test_curved_short_distance_within_five_percent():
    surf = SurfaceGraph(lambda x1, x2: (x1 ** 2 + x2 ** 2) / 10,
                        lambda x1, x2: (x1 / 5, x2 / 5))
    table = asymptotic_error_experiment(LayeredMedium(2, 1), surf, (0, 0), [0.05], n=33)
    row = table.rows[0]
    assert row.status == "ok"
    assert 0 < row.relative_error <= 0.05


def test_mirrored_geometry_gives_same_errors():
    m = LayeredMedium(2, 1)
    surf = SurfaceGraph.paraboloid(5.0)
    base = asymptotic_error_experiment(m, surf, (0, 0), [0.4, 0.2], n=33)
    m2, surf2, rays2 = mirrored_setup(m, surf, DEFAULT_RAYS)
    flipped = asymptotic_error_experiment(m2, surf2, (0, 0), [0.4, 0.2], n=33, rays=rays2)
    np.testing.assert_allclose(flipped.errors(), base.errors(), rtol=1e-9)


@pytest.mark.parametrize("scales", [[0.1, 0.2], [0.4, 0.4]])
def test_experiment_rejects_non_decreasing_scales(scales):
    with pytest.raises(ValueError):
        asymptotic_error_experiment(LayeredMedium(2, 1), SurfaceGraph.flat(), (0, 0), scales)


def test_experiment_rejects_unresolved_scale():
    with pytest.raises(ValueError):
        asymptotic_error_experiment(LayeredMedium(2, 1), SurfaceGraph.flat(), (0, 0), [0.05],
                                    half_width=2.0, n=33)
