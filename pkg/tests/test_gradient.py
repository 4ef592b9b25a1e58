import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from emflow import GrayImage, sobel

KX = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
KY = [[-1, -2, -1], [0, 0, 0], [1, 2, 1]]


def brute_sobel(px):
    """Direct per-pixel correlation loop, borders left at zero."""
    h, w = px.shape
    gx = np.zeros((h, w))
    gy = np.zeros((h, w))
    for y in range(1, h - 1):
        for x in range(1, w - 1):
            for j in range(3):
                for i in range(3):
                    v = int(px[y + j - 1, x + i - 1])
                    gx[y, x] += KX[j][i] * v
                    gy[y, x] += KY[j][i] * v
    return gx, gy


images = arrays(np.uint8, st.tuples(st.integers(3, 9), st.integers(3, 9)))


def test_uniform_image_has_zero_gradient():
    g = sobel(GrayImage(np.full((6, 7), 90)))
    assert not g.gx.any() and not g.gy.any()


def test_hand_examples():
    cols = GrayImage(np.array([[0, 0, 255]] * 3))
    g = sobel(cols)
    assert (g.gx[1, 1], g.gy[1, 1]) == (1020.0, 0.0)
    rows = GrayImage(np.array([[0] * 3, [0] * 3, [255] * 3]))
    g = sobel(rows)
    assert (g.gx[1, 1], g.gy[1, 1]) == (0.0, 1020.0)


@given(images)
def test_matches_brute_force(px):
    g = sobel(GrayImage(px))
    bx, by = brute_sobel(px)
    np.testing.assert_array_equal(g.gx, bx)
    np.testing.assert_array_equal(g.gy, by)


@given(images)
def test_border_is_zero_and_magnitude(px):
    g = sobel(GrayImage(px))
    for a in (g.gx, g.gy):
        assert not a[0].any() and not a[-1].any() and not a[:, 0].any() and not a[:, -1].any()
    assert (g.magnitude >= 0).all()
    np.testing.assert_array_equal(g.magnitude, np.sqrt(g.gx ** 2 + g.gy ** 2))


@given(images)
def test_transpose_swaps_components(px):
    g = sobel(GrayImage(px))
    t = sobel(GrayImage(px.T.copy()))
    np.testing.assert_array_equal(t.gx, g.gy.T)
    np.testing.assert_array_equal(t.gy, g.gx.T)


@given(arrays(np.uint8, (6, 6), elements=st.integers(0, 63)), st.integers(1, 4))
def test_linearity(px, a):
    g = sobel(GrayImage(px))
    s = sobel(GrayImage(px * a))
    np.testing.assert_array_equal(s.gx, a * g.gx)
    np.testing.assert_array_equal(s.gy, a * g.gy)
