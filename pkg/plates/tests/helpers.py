import numpy as np

from ..analysis_services import ManufacturedCase
from ..polyspace import Polygon


def unit_square():
    return Polygon.from_points([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def square(side, origin=(0.0, 0.0)):
    x0, y0 = origin
    return Polygon.from_points([[x0, y0], [x0 + side, y0], [x0 + side, y0 + side], [x0, y0 + side]])


def regular_polygon(n, radius=1.0, center=(0.0, 0.0)):
    angles = 2.0 * np.pi * np.arange(n) / n
    return Polygon.from_points(np.column_stack([
        center[0] + radius * np.cos(angles),
        center[1] + radius * np.sin(angles),
    ]))


def random_convex_polygon(rng, n_min=3, n_max=8):
    """Perturbed regular polygon, stretched and rotated; affine maps keep it convex"""
    n = int(rng.integers(n_min, n_max + 1))
    angles = 2.0 * np.pi * (np.arange(n) + rng.uniform(-0.3, 0.3, n)) / n
    points = np.column_stack([np.cos(angles), np.sin(angles)])
    theta = rng.uniform(0.0, 2.0 * np.pi)
    rotation = np.array([[np.cos(theta), -np.sin(theta)], [np.sin(theta), np.cos(theta)]])
    stretch = np.diag([1.0, rng.uniform(0.5, 1.0)])
    scale = rng.uniform(0.05, 2.0)
    shift = rng.uniform(-1.0, 1.0, 2)
    return Polygon.from_points(scale * points @ stretch @ rotation.T + shift)


def polynomial_case(terms, name='polynomial'):
    """
    Case for p = sum c x^a y^b, terms given as {(a, b): c}. The load is the
    biharmonic of p, which only the quartic terms feed.
    """

    def power(z, e):
        return z ** e if e > 0 else np.ones_like(z)

    def derivative(x, y, dx, dy):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        total = np.zeros(np.broadcast(x, y).shape)
        for (a, b), c in terms.items():
            if a < dx or b < dy:
                continue
            fa = np.prod(np.arange(a - dx + 1, a + 1)) if dx else 1.0
            fb = np.prod(np.arange(b - dy + 1, b + 1)) if dy else 1.0
            total = total + c * fa * fb * power(x, a - dx) * power(y, b - dy)
        return total

    def value(x, y):
        return derivative(x, y, 0, 0)

    def gradient(x, y):
        return derivative(x, y, 1, 0), derivative(x, y, 0, 1)

    def hessian(x, y):
        return derivative(x, y, 2, 0), derivative(x, y, 1, 1), derivative(x, y, 0, 2)

    def load(x, y):
        return derivative(x, y, 4, 0) + 2.0 * derivative(x, y, 2, 2) + derivative(x, y, 0, 4)

    return ManufacturedCase(name, value, gradient, hessian, load)
