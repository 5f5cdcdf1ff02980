import numpy as np
import pytest

from artauth.imaging import Channels, RasterImage


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def gray8(arr) -> RasterImage:
    return RasterImage.from_array(np.asarray(arr, dtype=np.uint8), Channels.GRAY8)


def gray16(arr) -> RasterImage:
    return RasterImage.from_array(np.asarray(arr, dtype=np.uint16), Channels.GRAY16)


def rgb8(arr) -> RasterImage:
    return RasterImage.from_array(np.asarray(arr, dtype=np.uint8), Channels.RGB8)
