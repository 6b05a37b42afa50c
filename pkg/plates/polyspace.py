"""
Polynomial arithmetic on polygons: scaled monomials, Gauss rules on edges
and exact (polynomial) quadrature on polygons by centroid fans.
"""
from dataclasses import dataclass
from functools import cached_property, lru_cache
from math import perm

import numpy as np
from numpy.polynomial import legendre

from .exceptions import GeometryError

AREA_TOLERANCE = 1e-14


def polynomial_dimension(degree):
    """Dimension of P_degree in two variables (0 for negative degrees)"""
    if degree < 0:
        return 0
    return (degree + 1) * (degree + 2) // 2


@dataclass(frozen=True, eq=False)
class EdgeQuadrature:
    nodes: np.ndarray
    weights: np.ndarray

    @property
    def order(self):
        return len(self.nodes)

    def on_segment(self, start, end):
        """Return (points, arclength weights, t in [0, 1]) on the segment start -> end"""
        start = np.asarray(start, dtype=float)
        end = np.asarray(end, dtype=float)
        t = 0.5 * (self.nodes + 1.0)
        points = start + t[:, None] * (end - start)
        length = np.hypot(*(end - start))
        return points, 0.5 * length * self.weights, t


@dataclass(frozen=True, eq=False)
class PolygonQuadrature:
    points: np.ndarray
    weights: np.ndarray
    degree: int

    @property
    def x(self):
        return self.points[:, 0]

    @property
    def y(self):
        return self.points[:, 1]

    def integrate(self, values):
        """Integrate sampled values; trailing axes are kept"""
        return np.tensordot(self.weights, values, axes=(0, 0))


@dataclass(frozen=True, eq=False)
class Polygon:
    """A simple counter-clockwise polygon given by its vertex loop"""
    vertices: np.ndarray

    @classmethod
    def from_points(cls, points):
        return cls(np.asarray(points, dtype=float).reshape(-1, 2))

    @property
    def n_vertices(self):
        return len(self.vertices)

    @cached_property
    def signed_area(self):
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @property
    def area(self):
        return abs(self.signed_area)

    @cached_property
    def centroid(self):
        x, y = self.vertices[:, 0], self.vertices[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        cross = x * yn - xn * y
        area = self.signed_area
        if abs(area) < AREA_TOLERANCE:
            return self.vertices.mean(axis=0)
        return np.array([
            np.sum((x + xn) * cross),
            np.sum((y + yn) * cross),
        ]) / (6.0 * area)

    @cached_property
    def diameter(self):
        """Maximum distance between two vertices"""
        diff = self.vertices[:, None, :] - self.vertices[None, :, :]
        return float(np.sqrt(np.max(np.sum(diff * diff, axis=-1))))

    @cached_property
    def edge_vectors(self):
        return np.roll(self.vertices, -1, axis=0) - self.vertices

    @cached_property
    def edge_lengths(self):
        return np.hypot(self.edge_vectors[:, 0], self.edge_vectors[:, 1])

    @cached_property
    def perimeter(self):
        return float(np.sum(self.edge_lengths))

    @cached_property
    def tangents(self):
        return self.edge_vectors / self.edge_lengths[:, None]

    @cached_property
    def normals(self):
        # outward for a counter-clockwise loop
        return np.column_stack([self.tangents[:, 1], -self.tangents[:, 0]])

    def edge(self, i):
        """Start and end point of local edge i"""
        return self.vertices[i], self.vertices[(i + 1) % self.n_vertices]


@dataclass(frozen=True, eq=False)
class ScaledMonomialBasis:
    """m_a(x) = ((x - centroid) / h)^a ordered by total degree, then lexicographically"""
    centroid: np.ndarray
    h: float
    degree: int

    @classmethod
    def for_polygon(cls, polygon, degree):
        return cls(np.asarray(polygon.centroid, dtype=float), polygon.diameter, degree)

    @property
    def dimension(self):
        return polynomial_dimension(self.degree)

    @cached_property
    def exponents(self):
        return np.array(
            [(i, d - i) for d in range(self.degree + 1) for i in range(d, -1, -1)],
            dtype=int,
        ).reshape(-1, 2)

    def evaluate(self, points, dx=0, dy=0, degree=None):
        """
        Matrix (n_points, dim) of the (dx, dy) derivative of every monomial
        of total degree <= degree (default: the basis degree).
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        exponents = self.exponents[:polynomial_dimension(self.degree if degree is None else degree)]
        xi = (points[:, 0:1] - self.centroid[0]) / self.h
        eta = (points[:, 1:2] - self.centroid[1]) / self.h
        a, b = exponents[:, 0], exponents[:, 1]
        factor = np.array([perm(int(p), dx) * perm(int(q), dy) for p, q in exponents], dtype=float)
        alive = factor != 0.0
        pa = np.where(alive, a - dx, 0)
        pb = np.where(alive, b - dy, 0)
        values = factor * xi ** pa * eta ** pb
        return values / self.h ** (dx + dy)

    def gradient(self, points, degree=None):
        return self.evaluate(points, 1, 0, degree), self.evaluate(points, 0, 1, degree)

    def hessian(self, points, degree=None):
        """Second derivatives (xx, xy, yy), each (n_points, dim)"""
        return (
            self.evaluate(points, 2, 0, degree),
            self.evaluate(points, 1, 1, degree),
            self.evaluate(points, 0, 2, degree),
        )

    def as_function(self, coeffs):
        """Vectorised (value(x, y), gradient(x, y)) callables of sum coeffs_a m_a"""
        coeffs = np.asarray(coeffs, dtype=float)
        degree = _degree_of(len(coeffs))

        def value(x, y):
            return self.evaluate(np.column_stack([x, y]), degree=degree) @ coeffs

        def gradient(x, y):
            gx, gy = self.gradient(np.column_stack([x, y]), degree=degree)
            return gx @ coeffs, gy @ coeffs

        return value, gradient


def _degree_of(dimension):
    degree = 0
    while polynomial_dimension(degree) < dimension:
        degree += 1
    if polynomial_dimension(degree) != dimension:
        raise ValueError(f"{dimension} coefficients do not span a full P_k")
    return degree


def gauss_legendre(n):
    """Gauss-Legendre rule with n nodes on [-1, 1]"""
    if not 1 <= n <= 30:
        raise ValueError(f"Gauss-Legendre order must be within 1..30, got {n}")
    nodes, weights = legendre.leggauss(n)
    return EdgeQuadrature(nodes, weights)


@lru_cache(maxsize=None)
def _reference_triangle_rule(degree):
    # collapsed tensor Gauss on (0,0), (1,0), (0,1)
    n = degree // 2 + 2
    rule = gauss_legendre(n)
    u = 0.5 * (rule.nodes + 1.0)
    wu = 0.5 * rule.weights
    uu, vv = np.meshgrid(u, u, indexing='ij')
    wuu, wvv = np.meshgrid(wu, wu, indexing='ij')
    x = uu.ravel()
    y = (vv * (1.0 - uu)).ravel()
    w = (wuu * wvv * (1.0 - uu)).ravel()
    return np.column_stack([x, y]), w


def polygon_quadrature(polygon, degree):
    """Rule exact for polynomials up to `degree`, by fan triangulation from the centroid"""
    if degree < 0:
        raise ValueError("quadrature degree must be non-negative")
    if polygon.area < AREA_TOLERANCE:
        raise GeometryError(f"degenerate polygon (area {polygon.area:.3e})")
    ref_points, ref_weights = _reference_triangle_rule(degree)
    center = polygon.centroid
    points, weights = [], []
    for i in range(polygon.n_vertices):
        a, b = polygon.edge(i)
        e1, e2 = a - center, b - center
        jac = e1[0] * e2[1] - e1[1] * e2[0]
        if jac == 0.0:
            continue
        points.append(center + np.outer(ref_points[:, 0], e1) + np.outer(ref_points[:, 1], e2))
        weights.append(ref_weights * jac)
    return PolygonQuadrature(np.vstack(points), np.concatenate(weights), degree)


def monomial_moments(polygon, basis, up_to):
    """Vector of integrals of every m_a with |a| <= up_to over the polygon"""
    if up_to > basis.degree:
        raise ValueError(f"moments up to degree {up_to} exceed the basis degree {basis.degree}")
    quad = polygon_quadrature(polygon, up_to)
    return quad.integrate(basis.evaluate(quad.points, degree=up_to))


def gram_matrix(polygon, basis, row_degree, col_degree):
    """Integrals of m_a * m_b for |a| <= row_degree, |b| <= col_degree"""
    quad = polygon_quadrature(polygon, row_degree + col_degree)
    rows = basis.evaluate(quad.points, degree=row_degree)
    cols = basis.evaluate(quad.points, degree=col_degree)
    return (rows * quad.weights[:, None]).T @ cols


def l2_project_polynomial(polygon, basis, source_coeffs, target_degree):
    """L2(K) projection onto P_target_degree of a polynomial given in `basis`"""
    source_coeffs = np.asarray(source_coeffs, dtype=float)
    source_degree = _degree_of(len(source_coeffs))
    if target_degree < 0:
        raise ValueError("target degree must be non-negative")
    if max(source_degree, target_degree) > basis.degree:
        raise ValueError("basis degree is too low for this projection")
    gram = gram_matrix(polygon, basis, target_degree, target_degree)
    mixed = gram_matrix(polygon, basis, target_degree, source_degree)
    try:
        return np.linalg.solve(gram, mixed @ source_coeffs)
    except np.linalg.LinAlgError as exc:
        raise GeometryError(f"singular Gram matrix: {exc}") from exc
