import numpy as np
import pytest
from sklearn.base import clone

from fracgrad.estimator import FgdClassifier


@pytest.fixture(scope="module")
def xy():
    from fracgrad.data import synth_dataset

    ds = synth_dataset(40, seed=0)
    x = ds.train.images
    y = np.argmax(ds.train.labels, axis=1)
    return x, y


FAST = dict(epochs=2, batch_size=10, learning_rate=0.02, phi=0.1, momentum=0.9,
            alpha=0.9, n_terms=2, standard_bce=True)


class TestSklearnProtocol:
    def test_get_params_round_trip(self):
        est = FgdClassifier(alpha=0.7, n_terms=3, hidden_units=8)
        params = est.get_params()
        assert params["alpha"] == 0.7
        assert params["n_terms"] == 3
        assert params["hidden_units"] == 8
        rebuilt = FgdClassifier(**params)
        assert rebuilt.get_params() == params

    def test_set_params_returns_self(self):
        est = FgdClassifier()
        assert est.set_params(alpha=0.5) is est
        assert est.alpha == 0.5

    def test_clone_copies_settings_not_fit_state(self, xy):
        est = FgdClassifier(**FAST).fit(*xy)
        copy = clone(est)
        assert copy.get_params() == est.get_params()
        assert not hasattr(copy, "network_")


class TestFit:
    def test_returns_self_and_sets_state(self, xy):
        est = FgdClassifier(**FAST)
        assert est.fit(*xy) is est
        assert list(est.classes_) == [0, 1]
        assert est.image_size_ == 16
        assert len(est.history_) == 2
        assert est.architecture_.image_size == 16

    def test_same_random_state_same_predictions(self, xy):
        x, y = xy
        a = FgdClassifier(**FAST, random_state=4).fit(x, y)
        b = FgdClassifier(**FAST, random_state=4).fit(x, y)
        assert np.array_equal(a.predict(x), b.predict(x))
        assert np.array_equal(a.predict_proba(x), b.predict_proba(x))

    def test_accepts_flat_and_channelless_images(self, xy):
        x, y = xy
        flat = x.reshape(x.shape[0], -1)
        squeezed = x[..., 0]
        for variant in (flat, squeezed):
            est = FgdClassifier(**FAST).fit(variant, y)
            assert est.image_size_ == 16

    def test_arbitrary_label_values(self, xy):
        x, y = xy
        relabeled = np.where(y == 0, 3, 7)
        est = FgdClassifier(**FAST).fit(x, relabeled)
        assert list(est.classes_) == [3, 7]
        assert set(est.predict(x)) <= {3, 7}

    def test_custom_architecture_settings(self, xy):
        est = FgdClassifier(**FAST, conv_channels=(4,), hidden_units=8).fit(*xy)
        assert est.architecture_.conv_channels == (4,)
        assert est.architecture_.hidden_units == 8

    @pytest.mark.parametrize("bad", [{"epochs": 0}, {"batch_size": 0}])
    def test_bad_loop_settings_rejected(self, xy, bad):
        with pytest.raises(ValueError):
            FgdClassifier(**{**FAST, **bad}).fit(*xy)

    def test_bad_config_rejected_at_fit(self, xy):
        with pytest.raises(ValueError):
            FgdClassifier(**{**FAST, "alpha": 1.5}).fit(*xy)

    def test_single_class_rejected(self, xy):
        x, _ = xy
        with pytest.raises(ValueError):
            FgdClassifier(**FAST).fit(x, np.zeros(x.shape[0]))

    def test_three_classes_rejected(self, xy):
        x, _ = xy
        y3 = np.arange(x.shape[0]) % 3
        with pytest.raises(ValueError):
            FgdClassifier(**FAST).fit(x, y3)

    def test_non_square_flat_input_rejected(self, xy):
        _, y = xy
        with pytest.raises(ValueError):
            FgdClassifier(**FAST).fit(np.zeros((y.size, 250)), y)


class TestPredict:
    def test_shapes_and_values(self, xy):
        x, y = xy
        est = FgdClassifier(**FAST).fit(x, y)
        pred = est.predict(x)
        proba = est.predict_proba(x)
        assert pred.shape == (x.shape[0],)
        assert proba.shape == (x.shape[0], 2)
        assert np.allclose(proba.sum(axis=1), 1.0)
        assert np.array_equal(pred, est.classes_[np.argmax(proba, axis=1)])

    def test_flat_input_accepted_after_fit(self, xy):
        x, y = xy
        est = FgdClassifier(**FAST).fit(x, y)
        flat = x.reshape(x.shape[0], -1)
        assert np.array_equal(est.predict(flat), est.predict(x))

    def test_wrong_image_size_rejected(self, xy):
        x, y = xy
        est = FgdClassifier(**FAST).fit(x, y)
        with pytest.raises(ValueError):
            est.predict(np.zeros((2, 8, 8, 1)))

    def test_unfitted_raises(self):
        est = FgdClassifier()
        with pytest.raises(RuntimeError):
            est.predict(np.zeros((1, 16, 16, 1)))
        with pytest.raises(RuntimeError):
            est.predict_proba(np.zeros((1, 16, 16, 1)))
