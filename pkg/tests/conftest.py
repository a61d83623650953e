import math

import numpy as np
import pytest

from topoproj import PointCloud


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_cloud(rng, n, d, scale=1.0):
    return PointCloud(rng.standard_normal((n, d)) * scale)


def equilateral_triangle(side=2.0):
    return PointCloud(
        np.array([[0.0, 0.0], [side, 0.0], [side / 2.0, side * math.sqrt(3) / 2.0]])
    )


def circle_points(n, radius=1.0):
    theta = 2.0 * np.pi * np.arange(n) / n
    return PointCloud(radius * np.stack([np.cos(theta), np.sin(theta)], axis=1))
