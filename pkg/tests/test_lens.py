import pytest

from zoomsr import (
    InvalidParameterError,
    LensConfig,
    image_distance,
    image_size,
    initial_scale,
    magnification,
)


class TestImageSize:
    def test_exact_and_approx_forms(self):
        cfg = LensConfig(focal_length=105.0, object_distance=3000.0, object_size=1000.0)
        exact, approx = image_size(cfg)
        assert exact == pytest.approx(105.0 * 1000.0 / 2895.0)
        assert approx == pytest.approx(35.0)

    def test_symmetric_case_unit_magnification(self):
        u = 400.0
        cfg = LensConfig(focal_length=u / 2, object_distance=u, object_size=37.0)
        exact, _ = image_size(cfg)
        assert exact == pytest.approx(37.0)
        assert magnification(cfg) == pytest.approx(1.0)
        assert image_distance(cfg) == pytest.approx(u)

    def test_zero_object(self):
        cfg = LensConfig(focal_length=50.0, object_distance=2000.0, object_size=0.0)
        exact, approx = image_size(cfg)
        assert exact == 0.0
        assert approx == 0.0

    def test_invalid_distance_rejected(self):
        with pytest.raises(InvalidParameterError):
            LensConfig(focal_length=105.0, object_distance=100.0, object_size=1.0)

    def test_far_field_convergence(self):
        # The exact form approaches (f/u)*h1 once u >> f.
        for f in (28.0, 50.0, 105.0):
            u = 101.0 * f + 1.0
            cfg = LensConfig(focal_length=f, object_distance=u, object_size=500.0)
            exact, approx = image_size(cfg)
            assert abs(exact - approx) / exact < 0.01


class TestInitialScale:
    def test_focal_ratio_examples(self):
        assert initial_scale(105.0, 35.0) == pytest.approx(3.0)
        assert initial_scale(105.0, 50.0) == pytest.approx(2.1)
        assert initial_scale(77.0, 77.0) == 1.0

    def test_reciprocal_property(self):
        for a, b in ((105.0, 28.0), (50.0, 35.0), (33.3, 91.7)):
            assert initial_scale(a, b) * initial_scale(b, a) == pytest.approx(
                1.0, abs=1e-12
            )

    def test_rejects_nonpositive(self):
        with pytest.raises(InvalidParameterError):
            initial_scale(-1.0, 35.0)
        with pytest.raises(InvalidParameterError):
            initial_scale(105.0, 0.0)
