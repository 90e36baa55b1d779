import numpy as np
import pytest

from saeti.models import MISSING_FILL, RecognizerModel, ReconstructorModel, default_latent


def test_recognizer_output_shape_and_rows():
    model = RecognizerModel(d=3, m=16, k=4, seed=1)
    x = np.random.default_rng(0).random((5, 3, 16))
    probs = model.forward(x)
    assert probs.shape == (5, 3, 4)
    assert np.allclose(probs.data.sum(axis=-1), 1.0, atol=1e-12)
    assert np.all(probs.data >= 0)
    labels = model.predict(x)
    assert labels.shape == (5, 3)
    assert labels.min() >= 0 and labels.max() <= 3


def test_recognizer_window_length_floor():
    with pytest.raises(ValueError, match="window too short for three pools"):
        RecognizerModel(d=1, m=7, k=2)
    RecognizerModel(d=1, m=8, k=2)  # smallest legal window


def test_recognizer_input_validation():
    model = RecognizerModel(d=2, m=8, k=2)
    with pytest.raises(ValueError, match="expected"):
        model.forward(np.zeros((4, 3, 8)))
    with pytest.raises(ValueError):
        model.forward(np.zeros((2, 8)))


def test_recognizer_seed_determinism():
    x = np.random.default_rng(3).random((2, 2, 16))
    a = RecognizerModel(2, 16, 2, seed=9).forward(x).data
    b = RecognizerModel(2, 16, 2, seed=9).forward(x).data
    c = RecognizerModel(2, 16, 2, seed=10).forward(x).data
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_recognizer_handles_fill_values():
    model = RecognizerModel(d=2, m=16, k=2)
    x = np.full((1, 2, 16), MISSING_FILL)
    probs = model.forward(x)
    assert np.isfinite(probs.data).all()


def test_parameter_names_unique_and_stable():
    m1 = RecognizerModel(2, 16, 3, seed=0)
    m2 = RecognizerModel(2, 16, 3, seed=4)
    names1 = [n for n, _ in m1.parameters()]
    names2 = [n for n, _ in m2.parameters()]
    assert names1 == names2
    assert len(names1) == len(set(names1))
    r1 = ReconstructorModel(3, 8, seed=0)
    rnames = [n for n, _ in r1.parameters()]
    assert len(rnames) == len(set(rnames))


def test_default_latent_quarter():
    assert default_latent(4, 32) == 32
    assert default_latent(2, 16) == 8
    assert default_latent(1, 5) == 2


def test_reconstructor_latent_validation():
    with pytest.raises(ValueError, match="latent not compressive"):
        ReconstructorModel(2, 8, latent=16)
    with pytest.raises(ValueError):
        ReconstructorModel(2, 8, latent=0)
    model = ReconstructorModel(2, 8, latent=15)
    assert model.latent == 15


def test_reconstructor_shapes_and_range():
    model = ReconstructorModel(d=2, m=12, seed=2)
    x = np.random.default_rng(1).random((3, 2, 2, 12))
    out = model.forward(x)
    assert out.shape == (3, 2, 12)
    assert np.all((out.data > 0) & (out.data < 1))  # sigmoid output


def test_forward_is_exactly_decode_of_encode():
    model = ReconstructorModel(d=2, m=10, seed=5)
    x = np.random.default_rng(2).random((2, 2, 2, 10))
    z = model.encode(x)
    assert z.shape == (2, model.latent)
    assert np.array_equal(model.decode(z).data, model.forward(x).data)


def test_reconstructor_input_validation():
    model = ReconstructorModel(d=2, m=10)
    with pytest.raises(ValueError, match="expected"):
        model.encode(np.zeros((1, 2, 10)))
    with pytest.raises(ValueError):
        model.decode(model.encode(np.zeros((1, 2, 2, 10)))[:, :2])


def test_gradients_reach_every_parameter():
    from saeti.autograd import cross_entropy, masked_mse, zero_grads

    # m=16 pools down to two steps, so even recurrent weights see signal
    rec = RecognizerModel(2, 16, 2, seed=0)
    x = np.random.default_rng(0).random((3, 2, 16))
    loss = cross_entropy(rec.forward(x), np.zeros((3, 2), dtype=int))
    params = [p for _, p in rec.parameters()]
    zero_grads(params)
    loss.backward()
    for name, p in rec.parameters():
        assert p.grad is not None and np.any(p.grad != 0), name

    recon = ReconstructorModel(1, 8, seed=0)
    xx = np.random.default_rng(1).random((2, 1, 2, 8))
    loss = masked_mse(recon.forward(xx), np.zeros((2, 1, 8)), np.ones((2, 1, 8)))
    params = [p for _, p in recon.parameters()]
    zero_grads(params)
    loss.backward()
    for name, p in recon.parameters():
        assert p.grad is not None, name
        assert np.any(p.grad != 0), name
