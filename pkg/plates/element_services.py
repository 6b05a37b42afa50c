"""
Local virtual element computations on one polygon: degrees of freedom,
edge traces, the energy projector, the enhanced L2 projector,
stabilization, stiffness and load.
"""
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import Polynomial

from .exceptions import ElementError, GeometryError
from .polyspace import (
    ScaledMonomialBasis,
    gauss_legendre,
    gram_matrix,
    polygon_quadrature,
    polynomial_dimension,
)

logger = logging.getLogger(__name__)

# cubic Hermite shapes on t in [0, 1]: value at 0, slope at 0, value at 1, slope at 1
HERMITE = (
    Polynomial([1.0, 0.0, -3.0, 2.0]),
    Polynomial([0.0, 1.0, -2.0, 1.0]),
    Polynomial([0.0, 0.0, 3.0, -2.0]),
    Polynomial([0.0, 0.0, -1.0, 1.0]),
)
# quadratic bubble with unit integral on [0, 1]
BUBBLE = Polynomial([0.0, 6.0, -6.0])
# local dof lengths never drop below this fraction of h_K
LOCAL_LENGTH_FLOOR = 0.25
ZERO = Polynomial([0.0])


def zero_load(x, y):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class PlateModel:
    """Bending rigidity D, Poisson ratio nu and transversal load f(x, y)"""
    D: float = 1.0
    nu: float = 0.3
    load: Callable = field(default=zero_load, compare=False)

    def __post_init__(self):
        if not self.D > 0.0:
            raise ValueError(f"bending rigidity must be positive, got {self.D}")
        if not 0.0 <= self.nu < 0.5:
            raise ValueError(f"Poisson ratio must lie in [0, 0.5), got {self.nu}")

    def evaluate_load(self, x, y):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(np.asarray(self.load(x, y), dtype=float), x.shape)


@dataclass(frozen=True)
class ElementSpec:
    k: int

    NAMES = {'vem31': 2, 'vem32': 3}

    def __post_init__(self):
        if self.k not in (2, 3):
            raise ValueError(f"only k=2 (VEM31) and k=3 (VEM32) are available, got k={self.k}")

    @classmethod
    def from_name(cls, name):
        try:
            return cls(cls.NAMES[name.lower()])
        except KeyError:
            raise ValueError(f"unknown element {name!r}, expected one of {sorted(cls.NAMES)}") from None

    @property
    def name(self):
        return {2: 'vem31', 3: 'vem32'}[self.k]

    @property
    def r(self):
        return max(3, self.k)

    @property
    def s(self):
        return self.k - 1

    @property
    def m(self):
        return self.k - 4

    @property
    def has_normal_moments(self):
        return self.s > 1

    @property
    def edge_gauss_order(self):
        return 4 if self.k == 2 else 5

    @property
    def load_quadrature_degree(self):
        return 2 * self.k + 2

    @property
    def polynomial_dimension(self):
        return polynomial_dimension(self.k)


@dataclass(frozen=True)
class LocalDofLayout:
    """Vertex-major (value, d/dx1, d/dx2) then one normal moment per edge for k=3"""
    n_vertices: int
    spec: ElementSpec

    @property
    def n_edges(self):
        return self.n_vertices if self.spec.has_normal_moments else 0

    @property
    def n_dofs(self):
        return 3 * self.n_vertices + self.n_edges

    @property
    def descriptors(self):
        kinds = [(kind, v) for v in range(self.n_vertices) for kind in ('value', 'dx', 'dy')]
        return kinds + [('normal_moment', e) for e in range(self.n_edges)]

    def edge_dofs(self, i):
        j = (i + 1) % self.n_vertices
        dofs = [3 * i, 3 * i + 1, 3 * i + 2, 3 * j, 3 * j + 1, 3 * j + 2]
        if self.spec.has_normal_moments:
            dofs.append(3 * self.n_vertices + i)
        return dofs


@dataclass(frozen=True, eq=False)
class LocalElementMatrices:
    basis: ScaledMonomialBasis
    layout: LocalDofLayout
    dof_matrix: np.ndarray
    Pi_star: np.ndarray
    Pi0: np.ndarray
    S: np.ndarray
    K_loc: np.ndarray
    f_loc: np.ndarray


def _edge_frame(start, end):
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    length = float(np.hypot(*(end - start)))
    if length == 0.0:
        raise ElementError("zero-length edge")
    tangent = (end - start) / length
    return length, tangent, np.array([tangent[1], -tangent[0]])


def _value_shapes(length, tangent, spec):
    h00, h10, h01, h11 = HERMITE
    shapes = [
        h00, length * tangent[0] * h10, length * tangent[1] * h10,
        h01, length * tangent[0] * h11, length * tangent[1] * h11,
    ]
    if spec.has_normal_moments:
        shapes.append(ZERO)
    return shapes


def _normal_shapes(length, normal, spec):
    at_start = Polynomial([1.0, -1.0])
    at_end = Polynomial([0.0, 1.0])
    if spec.has_normal_moments:
        at_start = at_start - 0.5 * BUBBLE
        at_end = at_end - 0.5 * BUBBLE
    shapes = [
        ZERO, normal[0] * at_start, normal[1] * at_start,
        ZERO, normal[0] * at_end, normal[1] * at_end,
    ]
    if spec.has_normal_moments:
        shapes.append(BUBBLE / length)
    return shapes


def _to_arclength(poly, length):
    return Polynomial(poly.coef / length ** np.arange(len(poly.coef)))


def _edge_operators(start, end, spec, t):
    """
    Matrices (n_points, n_edge_dofs) giving the value, the tangential
    derivative and the normal derivative of the traces at parameters t
    """
    length, tangent, normal = _edge_frame(start, end)
    values = _value_shapes(length, tangent, spec)
    value = np.column_stack([p(t) for p in values])
    slope = np.column_stack([p.deriv()(t) for p in values]) / length
    normal_derivative = np.column_stack([p(t) for p in _normal_shapes(length, normal, spec)])
    return value, slope, normal_derivative


def _boundary_moments(basis, points, normal, tangent, model):
    """M_nn, M_nt and (div M).n of every basis monomial at edge points"""
    D, nu = model.D, model.nu
    pxx, pxy, pyy = basis.hessian(points)
    lap = pxx + pyy
    mxx = D * ((1.0 - nu) * pxx + nu * lap)
    myy = D * ((1.0 - nu) * pyy + nu * lap)
    mxy = D * (1.0 - nu) * pxy
    nx, ny = normal
    tx, ty = tangent
    mnn = mxx * nx * nx + 2.0 * mxy * nx * ny + myy * ny * ny
    mnt = mxx * nx * tx + mxy * (nx * ty + ny * tx) + myy * ny * ty
    # div M = D grad(lap p)
    lap_x = basis.evaluate(points, 3, 0) + basis.evaluate(points, 1, 2)
    lap_y = basis.evaluate(points, 2, 1) + basis.evaluate(points, 0, 3)
    shear = D * (lap_x * nx + lap_y * ny)
    return mnn, mnt, shear


class ElementService:
    """Local element matrices for the C1 virtual elements VEM31 and VEM32"""

    @staticmethod
    def layout(polygon, spec):
        """Local dof layout of a polygon"""
        return LocalDofLayout(polygon.n_vertices, spec)

    @staticmethod
    def basis(polygon, spec):
        """Scaled monomials of degree k on the polygon"""
        return ScaledMonomialBasis.for_polygon(polygon, spec.k)

    @staticmethod
    def dof_values_of(value, gradient, polygon, spec):
        """Degrees of freedom of the interpolant of w, given vectorised w(x, y) and grad w(x, y)"""
        layout = LocalDofLayout(polygon.n_vertices, spec)
        n = polygon.n_vertices
        x, y = polygon.vertices[:, 0], polygon.vertices[:, 1]
        gx, gy = gradient(x, y)
        dofs = np.empty(layout.n_dofs)
        vertex_block = dofs[:3 * n].reshape(n, 3)
        vertex_block[:, 0] = np.broadcast_to(value(x, y), (n,))
        vertex_block[:, 1] = np.broadcast_to(gx, (n,))
        vertex_block[:, 2] = np.broadcast_to(gy, (n,))
        if spec.has_normal_moments:
            rule = gauss_legendre(spec.edge_gauss_order)
            for i in range(n):
                points, weights, _ = rule.on_segment(*polygon.edge(i))
                gx, gy = gradient(points[:, 0], points[:, 1])
                normal = polygon.normals[i]
                dofs[3 * n + i] = weights @ (np.asarray(gx) * normal[0] + np.asarray(gy) * normal[1])
        return dofs

    @staticmethod
    def dof_matrix(polygon, spec, basis):
        """Columns are the dofs of the basis monomials"""
        identity = np.eye(basis.dimension)
        return np.column_stack([
            ElementService.dof_values_of(*basis.as_function(identity[a]), polygon, spec)
            for a in range(basis.dimension)
        ])

    @staticmethod
    def edge_value_trace(start, end, edge_dofs, spec):
        """
        Cubic (in arclength from `start`) determined by the endpoint values and the
        endpoint gradients dotted with the unit tangent.
        edge_dofs = [v(a), v_x(a), v_y(a), v(b), v_x(b), v_y(b)(, normal moment)]
        """
        length, tangent, _ = _edge_frame(start, end)
        shapes = _value_shapes(length, tangent, spec)
        trace = sum((d * p for d, p in zip(edge_dofs, shapes)), ZERO)
        return _to_arclength(trace, length)

    @staticmethod
    def edge_normal_trace(start, end, edge_dofs, spec):
        """
        Outward normal derivative along the edge: linear in the endpoint values
        for k=2, the quadratic with the prescribed raw moment for k=3.
        """
        length, _, normal = _edge_frame(start, end)
        shapes = _normal_shapes(length, normal, spec)
        trace = sum((d * p for d, p in zip(edge_dofs, shapes)), ZERO)
        return _to_arclength(trace, length)

    @staticmethod
    def energy_matrix(polygon, spec, model, basis=None):
        """a^K(m_a, m_b) on P_k x P_k"""
        basis = basis or ElementService.basis(polygon, spec)
        quad = polygon_quadrature(polygon, max(2 * spec.k - 4, 0))
        pxx, pxy, pyy = basis.hessian(quad.points)
        lap = pxx + pyy
        w = quad.weights[:, None]
        hessian_part = (w * pxx).T @ pxx + 2.0 * (w * pxy).T @ pxy + (w * pyy).T @ pyy
        return model.D * ((1.0 - model.nu) * hessian_part + model.nu * (w * lap).T @ lap)

    @staticmethod
    def by_parts_matrix(polygon, spec, model, basis=None):
        """
        Row a maps a local dof vector to a^K(m_a, v), integrated by parts twice
        onto the boundary (the volume term vanishes for degree <= 3).
        """
        basis = basis or ElementService.basis(polygon, spec)
        layout = LocalDofLayout(polygon.n_vertices, spec)
        rule = gauss_legendre(spec.edge_gauss_order)
        B = np.zeros((basis.dimension, layout.n_dofs))
        for i in range(polygon.n_vertices):
            start, end = polygon.edge(i)
            points, w, t = rule.on_segment(start, end)
            value, slope, normal_derivative = _edge_operators(start, end, spec, t)
            mnn, mnt, shear = _boundary_moments(
                basis, points, polygon.normals[i], polygon.tangents[i], model
            )
            B[:, layout.edge_dofs(i)] += (
                (mnn * w[:, None]).T @ normal_derivative
                + (mnt * w[:, None]).T @ slope
                - (shear * w[:, None]).T @ value
            )
        return B

    @staticmethod
    def boundary_constraints(polygon, spec, basis=None):
        """
        Boundary averages of v and grad v: (3, dim P_k) on monomials and
        (3, n_dofs) on dof vectors.
        """
        basis = basis or ElementService.basis(polygon, spec)
        layout = LocalDofLayout(polygon.n_vertices, spec)
        rule = gauss_legendre(spec.edge_gauss_order)
        on_polynomials = np.zeros((3, basis.dimension))
        on_dofs = np.zeros((3, layout.n_dofs))
        for i in range(polygon.n_vertices):
            start, end = polygon.edge(i)
            points, w, t = rule.on_segment(start, end)
            gx, gy = basis.gradient(points)
            on_polynomials += np.vstack([w @ basis.evaluate(points), w @ gx, w @ gy])
            value, slope, normal_derivative = _edge_operators(start, end, spec, t)
            n, tau = polygon.normals[i], polygon.tangents[i]
            on_dofs[:, layout.edge_dofs(i)] += np.vstack([
                w @ value,
                w @ (normal_derivative * n[0] + slope * tau[0]),
                w @ (normal_derivative * n[1] + slope * tau[1]),
            ])
        return on_polynomials / polygon.perimeter, on_dofs / polygon.perimeter

    @staticmethod
    def project_energy(polygon, spec, model, basis=None):
        """Pi_star: local dofs -> coefficients of the energy projection onto P_k"""
        basis = basis or ElementService.basis(polygon, spec)
        A = ElementService.energy_matrix(polygon, spec, model, basis)
        B = ElementService.by_parts_matrix(polygon, spec, model, basis)
        C, G = ElementService.boundary_constraints(polygon, spec, basis)
        n = basis.dimension
        saddle = np.block([[A, C.T], [C, np.zeros((3, 3))]])
        try:
            solution = np.linalg.solve(saddle, np.vstack([B, G]))
        except np.linalg.LinAlgError as exc:
            raise ElementError(f"singular projector system: {exc}") from exc
        return solution[:n]

    @staticmethod
    def project_l2(polygon, spec, Pi_star, basis=None):
        """
        Pi0: local dofs -> coefficients of the L2 projection onto P_{k-2}; the
        enhanced space makes it the projection of Pi_star v
        """
        basis = basis or ElementService.basis(polygon, spec)
        degree = spec.k - 2
        gram = gram_matrix(polygon, basis, degree, degree)
        mixed = gram_matrix(polygon, basis, degree, spec.k)
        try:
            return np.linalg.solve(gram, mixed @ Pi_star)
        except np.linalg.LinAlgError as exc:
            raise GeometryError(f"singular Gram matrix: {exc}") from exc

    @staticmethod
    def local_lengths(polygon, spec):
        """Length attached to every dof: shortest adjacent edge for vertex dofs, the edge for moments"""
        lengths = polygon.edge_lengths
        floor = LOCAL_LENGTH_FLOOR * polygon.diameter
        vertex = np.maximum(np.minimum(lengths, np.roll(lengths, 1)), floor)
        per_dof = [np.repeat(vertex, 3)]
        if spec.has_normal_moments:
            per_dof.append(np.maximum(lengths, floor))
        return np.concatenate(per_dof)

    @staticmethod
    def stabilization_weights(polygon, spec):
        """Diagonal dof weights: 1/l^2 on values and moments, 1 on gradients"""
        weights = ElementService.local_lengths(polygon, spec) ** -2.0
        weights[1:3 * polygon.n_vertices:3] = 1.0
        weights[2:3 * polygon.n_vertices:3] = 1.0
        return weights

    @staticmethod
    def stabilization(polygon, spec, model, Pi_star, basis=None, dof_matrix=None):
        """D (I - D Pi)^T W (I - D Pi) with the local dof weights W"""
        basis = basis or ElementService.basis(polygon, spec)
        if dof_matrix is None:
            dof_matrix = ElementService.dof_matrix(polygon, spec, basis)
        residual = np.eye(dof_matrix.shape[0]) - dof_matrix @ Pi_star
        weights = ElementService.stabilization_weights(polygon, spec)
        S = model.D * (residual.T * weights) @ residual
        return 0.5 * (S + S.T)

    @staticmethod
    def local_stiffness(polygon, spec, model):
        """Consistency plus stabilization, Pi^T A Pi + S"""
        return ElementService.compute(polygon, spec, model, with_load=False).K_loc

    @staticmethod
    def local_load(polygon, spec, model, Pi0, basis=None):
        """Entries int_K f * Pi0(basis_i), with a rule exact to degree 2k+2"""
        basis = basis or ElementService.basis(polygon, spec)
        quad = polygon_quadrature(polygon, spec.load_quadrature_degree)
        f = model.evaluate_load(quad.x, quad.y)
        moments = basis.evaluate(quad.points, degree=spec.k - 2).T @ (quad.weights * f)
        return Pi0.T @ moments

    @staticmethod
    def load_projection_error(polygon, spec, model, basis=None):
        """L2(K) distance between f and its projection onto P_{k-2}"""
        basis = basis or ElementService.basis(polygon, spec)
        degree = spec.k - 2
        quad = polygon_quadrature(polygon, spec.load_quadrature_degree)
        f = model.evaluate_load(quad.x, quad.y)
        values = basis.evaluate(quad.points, degree=degree)
        coeffs = np.linalg.solve(gram_matrix(polygon, basis, degree, degree), values.T @ (quad.weights * f))
        return float(np.sqrt(quad.integrate((f - values @ coeffs) ** 2)))

    @staticmethod
    def compute(polygon, spec, model, with_load=True):
        """All local matrices of one cell"""
        basis = ElementService.basis(polygon, spec)
        dof_matrix = ElementService.dof_matrix(polygon, spec, basis)
        Pi_star = ElementService.project_energy(polygon, spec, model, basis)
        Pi0 = ElementService.project_l2(polygon, spec, Pi_star, basis)
        S = ElementService.stabilization(polygon, spec, model, Pi_star, basis, dof_matrix)
        A = ElementService.energy_matrix(polygon, spec, model, basis)
        K_loc = Pi_star.T @ A @ Pi_star + S
        K_loc = 0.5 * (K_loc + K_loc.T)
        if with_load:
            f_loc = ElementService.local_load(polygon, spec, model, Pi0, basis)
        else:
            f_loc = np.zeros(K_loc.shape[0])
        return LocalElementMatrices(
            basis=basis,
            layout=LocalDofLayout(polygon.n_vertices, spec),
            dof_matrix=dof_matrix,
            Pi_star=Pi_star,
            Pi0=Pi0,
            S=S,
            K_loc=K_loc,
            f_loc=f_loc,
        )
