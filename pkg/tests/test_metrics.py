import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import ssim_direct

from fsemotion.metrics import compare, nrmse, ssim


def test_nrmse_identities():
    rng = np.random.default_rng(0)
    ref = rng.uniform(0.1, 1.0, (16, 16))
    assert nrmse(ref, ref) == 0.0
    assert nrmse(ref, 2 * ref) == pytest.approx(1.0, rel=1e-15)
    assert nrmse(ref, np.zeros_like(ref)) == pytest.approx(1.0, rel=1e-15)


def test_nrmse_constant_offset_on_unit_norm_reference():
    rng = np.random.default_rng(1)
    ref = rng.uniform(0.1, 1.0, (8, 12))
    ref /= np.linalg.norm(ref)
    c = 0.25
    assert nrmse(ref, ref + c) == pytest.approx(c * np.sqrt(ref.size), rel=1e-12)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.floats(1e-3, 1e3))
def test_nrmse_scale_law(seed, alpha):
    rng = np.random.default_rng(seed)
    ref = rng.standard_normal((6, 7))
    est = rng.standard_normal((6, 7))
    assert nrmse(alpha * ref, alpha * est) == pytest.approx(nrmse(ref, est), rel=1e-12)


def test_nrmse_rejects_zero_reference_and_shape_mismatch():
    with pytest.raises(ValueError):
        nrmse(np.zeros((4, 4)), np.ones((4, 4)))
    with pytest.raises(ValueError):
        nrmse(np.ones((4, 4)), np.ones((4, 5)))


def test_ssim_of_image_with_itself_is_one():
    rng = np.random.default_rng(2)
    x = rng.uniform(0, 1, (32, 40))
    assert ssim(x, x) == pytest.approx(1.0, abs=1e-15)


def test_ssim_of_independent_noise_is_near_zero():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((256, 256))
    b = rng.standard_normal((256, 256))
    assert abs(ssim(a, b)) < 0.02


@pytest.mark.parametrize("seed", range(5))
def test_ssim_matches_scalar_loop(seed):
    rng = np.random.default_rng(seed)
    ref = rng.uniform(0, 1, (16, 16))
    est = ref + 0.2 * rng.standard_normal((16, 16))
    got = ssim(ref, est)
    want = ssim_direct(ref, est, ref.max() - ref.min())
    assert abs(got - want) <= 1e-10


def test_ssim_symmetric_with_fixed_range():
    rng = np.random.default_rng(4)
    a = rng.uniform(0, 1, (20, 20))
    b = a + 0.1 * rng.standard_normal((20, 20))
    assert ssim(a, b, dynamic_range=1.0) == pytest.approx(ssim(b, a, dynamic_range=1.0), abs=1e-14)


def test_ssim_window_larger_than_image():
    with pytest.raises(ValueError):
        ssim(np.ones((5, 9)), np.ones((5, 9)))


def test_ssim_needs_positive_range():
    with pytest.raises(ValueError):
        ssim(np.ones((8, 8)), np.ones((8, 8)))
    assert ssim(np.ones((8, 8)), np.ones((8, 8)), dynamic_range=1.0) == pytest.approx(1.0)


def test_compare_uses_magnitudes():
    rng = np.random.default_rng(5)
    x = rng.uniform(0.1, 1, (12, 12))
    rep = compare(x, x * np.exp(1j * rng.uniform(0, 6, (12, 12))), sample_id=3, pipeline="fse_aware")
    assert rep.ssim == pytest.approx(1.0) and rep.nrmse == pytest.approx(0.0, abs=1e-15)
    assert str(rep).startswith("ssim=") and rep.sample_id == 3
