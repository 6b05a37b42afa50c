import numpy as np
from django.test import SimpleTestCase, tag
from scipy.linalg import null_space

from ..element_services import ElementService, ElementSpec, LocalDofLayout, PlateModel
from ..exceptions import ElementError
from ..mesh_services import MeshService
from ..polyspace import Polygon, gram_matrix
from .helpers import polynomial_case, random_convex_polygon, regular_polygon, square, unit_square

VEM31 = ElementSpec(2)
VEM32 = ElementSpec(3)


def dofs_of(terms, polygon, spec):
    case = polynomial_case(terms)
    return ElementService.dof_values_of(case.value, case.gradient, polygon, spec)


class ElementSpecTests(SimpleTestCase):

    def test_degrees(self):
        self.assertEqual((VEM31.r, VEM31.s, VEM31.m), (3, 1, -2))
        self.assertEqual((VEM32.r, VEM32.s, VEM32.m), (3, 2, -1))
        self.assertFalse(VEM31.has_normal_moments)
        self.assertTrue(VEM32.has_normal_moments)

    def test_names(self):
        self.assertEqual(ElementSpec.from_name('vem31'), VEM31)
        self.assertEqual(ElementSpec.from_name('VEM32'), VEM32)
        self.assertEqual(VEM32.name, 'vem32')

    def test_unsupported_degree(self):
        with self.assertRaises(ValueError):
            ElementSpec(4)
        with self.assertRaises(ValueError):
            ElementSpec.from_name('vem33')

    def test_layout(self):
        layout = LocalDofLayout(4, VEM32)
        self.assertEqual(layout.n_dofs, 16)
        self.assertEqual(layout.edge_dofs(3), [9, 10, 11, 0, 1, 2, 15])
        self.assertEqual(layout.descriptors[13], ('normal_moment', 1))
        self.assertEqual(LocalDofLayout(4, VEM31).n_dofs, 12)


class PlateModelTests(SimpleTestCase):

    def test_invalid_parameters(self):
        with self.assertRaises(ValueError):
            PlateModel(D=0.0)
        with self.assertRaises(ValueError):
            PlateModel(nu=0.5)

    def test_constant_load_broadcasts(self):
        model = PlateModel(load=lambda x, y: 2.0)
        np.testing.assert_allclose(model.evaluate_load(np.zeros(3), np.zeros(3)), [2.0, 2.0, 2.0])


class DofValuesTests(SimpleTestCase):

    def test_constant(self):
        dofs = dofs_of({(0, 0): 1.0}, unit_square(), VEM32)
        np.testing.assert_allclose(dofs[0:12:3], 1.0)
        np.testing.assert_allclose(dofs[1:12:3], 0.0)
        np.testing.assert_allclose(dofs[2:12:3], 0.0)
        np.testing.assert_allclose(dofs[12:], 0.0)

    def test_linear_on_unit_square(self):
        polygon = unit_square()
        dofs = dofs_of({(1, 0): 1.0}, polygon, VEM32)
        np.testing.assert_allclose(dofs[0:12:3], polygon.vertices[:, 0])
        np.testing.assert_allclose(dofs[1:12:3], 1.0)
        np.testing.assert_allclose(dofs[12:], [0.0, 1.0, 0.0, -1.0], atol=1e-15)

    def test_vertex_derivatives(self):
        dofs = dofs_of({(2, 2): 1.0}, unit_square(), VEM31)
        np.testing.assert_allclose(dofs[6:9], [1.0, 2.0, 2.0])


class EdgeTraceTests(SimpleTestCase):

    def test_constant_value_trace(self):
        trace = ElementService.edge_value_trace([0.0, 0.0], [2.0, 1.0], [1, 0, 0, 1, 0, 0], VEM31)
        np.testing.assert_allclose(trace(np.linspace(0.0, np.sqrt(5.0), 7)), 1.0, atol=1e-14)

    def test_linear_value_trace_is_arclength(self):
        trace = ElementService.edge_value_trace([0.0, 0.0], [1.0, 0.0], [0, 1, 0, 1, 1, 0], VEM31)
        s = np.linspace(0.0, 1.0, 5)
        np.testing.assert_allclose(trace(s), s, atol=1e-14)

    def test_cubic_value_trace(self):
        rng = np.random.default_rng(17)
        start, end = rng.uniform(-1.0, 1.0, 2), rng.uniform(-1.0, 1.0, 2)
        terms = {(a, d - a): rng.normal() for d in range(4) for a in range(d + 1)}
        case = polynomial_case(terms)
        dofs = []
        for point in (start, end):
            gx, gy = case.gradient(point[0], point[1])
            dofs.extend([float(case.value(point[0], point[1])), float(gx), float(gy)])
        trace = ElementService.edge_value_trace(start, end, dofs, VEM31)
        length = np.hypot(*(end - start))
        s = np.linspace(0.0, length, 9)
        points = start + np.outer(s / length, end - start)
        np.testing.assert_allclose(trace(s), case.value(points[:, 0], points[:, 1]), atol=1e-13)

    def test_normal_trace_of_constant_gradient(self):
        # outward normal of the edge (0,0) -> (1,0) is (0,-1)
        for spec, dofs in ((VEM31, [0, 0, 1, 0, 0, 1]), (VEM32, [0, 0, 1, 0, 0, 1, -1])):
            trace = ElementService.edge_normal_trace([0.0, 0.0], [1.0, 0.0], dofs, spec)
            np.testing.assert_allclose(trace(np.linspace(0.0, 1.0, 5)), -1.0, atol=1e-14)

    def test_quadratic_normal_trace_from_moment(self):
        trace = ElementService.edge_normal_trace([0.0, 0.0], [1.0, 0.0], [0, 0, 0, 0, 0, 0, 1], VEM32)
        t = np.linspace(0.0, 1.0, 7)
        np.testing.assert_allclose(trace(t), 6.0 * t * (1.0 - t), atol=1e-14)
        self.assertAlmostEqual(trace.integ()(1.0), 1.0)

    def test_linear_normal_trace(self):
        trace = ElementService.edge_normal_trace([0.0, 0.0], [1.0, 0.0], [0, 0, -1, 0, 0, -3], VEM31)
        self.assertAlmostEqual(trace(0.5), 2.0)

    def test_moment_scales_with_edge_length(self):
        trace = ElementService.edge_normal_trace([0.0, 0.0], [0.0, -3.0], [0, 0, 0, 0, 0, 0, 3], VEM32)
        self.assertAlmostEqual(trace.integ()(3.0) - trace.integ()(0.0), 3.0)


class EnergyProjectionTests(SimpleTestCase):

    def assert_reproduces(self, polygon, spec):
        basis = ElementService.basis(polygon, spec)
        D = ElementService.dof_matrix(polygon, spec, basis)
        Pi_star = ElementService.project_energy(polygon, spec, PlateModel(), basis)
        np.testing.assert_allclose(Pi_star @ D, np.eye(basis.dimension), atol=1e-10)

    def test_constant(self):
        polygon = regular_polygon(5)
        Pi_star = ElementService.project_energy(polygon, VEM31, PlateModel())
        coeffs = Pi_star @ dofs_of({(0, 0): 1.0}, polygon, VEM31)
        np.testing.assert_allclose(coeffs, [1.0, 0, 0, 0, 0, 0], atol=1e-12)

    def test_square_reproduced_on_unit_square(self):
        polygon = unit_square()
        basis = ElementService.basis(polygon, VEM31)
        Pi_star = ElementService.project_energy(polygon, VEM31, PlateModel(), basis)
        value, _ = basis.as_function(Pi_star @ dofs_of({(2, 0): 1.0}, polygon, VEM31))
        x = np.array([0.1, 0.5, 0.9])
        np.testing.assert_allclose(value(x, 1.0 - x), x ** 2, atol=1e-12)

    def test_reproduction_on_random_polygons(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            polygon = random_convex_polygon(rng)
            for spec in (VEM31, VEM32):
                self.assert_reproduces(polygon, spec)

    @tag('acceptance')
    def test_reproduction_on_many_random_polygons(self):
        rng = np.random.default_rng(1)
        for _ in range(200):
            polygon = random_convex_polygon(rng, n_max=10)
            for spec in (VEM31, VEM32):
                self.assert_reproduces(polygon, spec)

    def test_reproduction_for_any_poisson_ratio(self):
        polygon = regular_polygon(6, radius=0.1, center=(3.0, -2.0))
        basis = ElementService.basis(polygon, VEM32)
        D = ElementService.dof_matrix(polygon, VEM32, basis)
        for nu in (0.0, 0.25, 0.49):
            Pi_star = ElementService.project_energy(polygon, VEM32, PlateModel(D=7.0, nu=nu), basis)
            np.testing.assert_allclose(Pi_star @ D, np.eye(basis.dimension), atol=1e-10)


class L2ProjectionTests(SimpleTestCase):

    def test_constant(self):
        polygon = regular_polygon(5)
        Pi_star = ElementService.project_energy(polygon, VEM31, PlateModel())
        Pi0 = ElementService.project_l2(polygon, VEM31, Pi_star)
        np.testing.assert_allclose(Pi0 @ dofs_of({(0, 0): 1.0}, polygon, VEM31), [1.0], atol=1e-12)

    def test_linear_reproduced_for_vem32(self):
        polygon = random_convex_polygon(np.random.default_rng(9))
        basis = ElementService.basis(polygon, VEM32)
        Pi_star = ElementService.project_energy(polygon, VEM32, PlateModel(), basis)
        Pi0 = ElementService.project_l2(polygon, VEM32, Pi_star, basis)
        coeffs = Pi0 @ dofs_of({(1, 0): 1.0}, polygon, VEM32)
        value, _ = basis.as_function(coeffs)
        x, y = polygon.vertices[:, 0], polygon.vertices[:, 1]
        np.testing.assert_allclose(value(x, y), x, atol=1e-12)

    def test_mean_of_square(self):
        polygon = unit_square()
        Pi_star = ElementService.project_energy(polygon, VEM31, PlateModel())
        Pi0 = ElementService.project_l2(polygon, VEM31, Pi_star)
        self.assertAlmostEqual((Pi0 @ dofs_of({(2, 0): 1.0}, polygon, VEM31))[0], 1.0 / 3.0, delta=1e-12)

    def test_moments_match_energy_projection(self):
        rng = np.random.default_rng(4)
        polygon = random_convex_polygon(rng)
        for spec in (VEM31, VEM32):
            local = ElementService.compute(polygon, spec, PlateModel())
            delta = rng.normal(size=local.layout.n_dofs)
            degree = spec.k - 2
            left = gram_matrix(polygon, local.basis, degree, degree) @ local.Pi0 @ delta
            right = gram_matrix(polygon, local.basis, degree, spec.k) @ local.Pi_star @ delta
            np.testing.assert_allclose(left, right, atol=1e-12)


class StabilizationTests(SimpleTestCase):

    def test_vanishes_on_polynomials(self):
        polygon = random_convex_polygon(np.random.default_rng(2))
        for spec in (VEM31, VEM32):
            local = ElementService.compute(polygon, spec, PlateModel())
            np.testing.assert_allclose(local.S @ local.dof_matrix, 0.0, atol=1e-10 * np.abs(local.S).max())

    def test_rank_on_pentagon(self):
        local = ElementService.compute(regular_polygon(5), VEM31, PlateModel())
        S = local.S
        np.testing.assert_allclose(S, S.T, atol=1e-14 * np.abs(S).max())
        eigenvalues = np.linalg.eigvalsh(S)
        self.assertGreater(eigenvalues.min(), -1e-12 * eigenvalues.max())
        self.assertEqual(np.linalg.matrix_rank(S, tol=1e-10 * eigenvalues.max()), 15 - 6)

    def test_scaled_spectrum_is_size_independent(self):
        spectra = []
        for side in (1.0, 0.5):
            polygon = square(side)
            local = ElementService.compute(polygon, VEM32, PlateModel())
            root = np.sqrt(ElementService.stabilization_weights(polygon, VEM32))
            spectra.append(np.linalg.eigvalsh(local.S / np.outer(root, root)))
        np.testing.assert_allclose(spectra[0], spectra[1], atol=1e-10)

    def test_local_lengths_on_square(self):
        polygon = square(2.0)
        np.testing.assert_allclose(ElementService.local_lengths(polygon, VEM32), 2.0)
        weights = ElementService.stabilization_weights(polygon, VEM32)
        np.testing.assert_allclose(weights[:12].reshape(4, 3), [[0.25, 1.0, 1.0]] * 4)
        np.testing.assert_allclose(weights[12:], 0.25)

    def test_short_edge_lengths_are_floored(self):
        # edge 1 -> 2 has length 1e-4
        polygon = Polygon.from_points([[0.0, 0.0], [1.0, 0.0], [1.0, 1e-4], [0.0, 1.0]])
        floor = 0.25 * polygon.diameter
        lengths = ElementService.local_lengths(polygon, VEM32)
        self.assertAlmostEqual(lengths[3], floor)
        self.assertAlmostEqual(lengths[6], floor)
        self.assertAlmostEqual(lengths[12 + 1], floor)
        self.assertAlmostEqual(lengths[0], 1.0)
        self.assertAlmostEqual(lengths[12 + 3], 1.0)


class LocalStiffnessTests(SimpleTestCase):

    def test_linear_kernel(self):
        polygon = random_convex_polygon(np.random.default_rng(6))
        for spec in (VEM31, VEM32):
            K = ElementService.local_stiffness(polygon, spec, PlateModel())
            for terms in ({(0, 0): 1.0}, {(1, 0): 1.0}, {(0, 1): 1.0}):
                np.testing.assert_allclose(K @ dofs_of(terms, polygon, spec), 0.0, atol=1e-10 * np.abs(K).max())

    def test_curvature_energy_of_square_function(self):
        polygon = unit_square()
        model = PlateModel(D=1.0, nu=0.0)
        for spec in (VEM31, VEM32):
            K = ElementService.local_stiffness(polygon, spec, model)
            dofs = dofs_of({(2, 0): 1.0}, polygon, spec)
            self.assertAlmostEqual(dofs @ K @ dofs, 4.0, delta=1e-11)

    def test_symmetry_and_rank(self):
        rng = np.random.default_rng(8)
        for _ in range(5):
            polygon = random_convex_polygon(rng)
            for spec in (VEM31, VEM32):
                K = ElementService.local_stiffness(polygon, spec, PlateModel())
                norm = np.linalg.norm(K)
                self.assertLessEqual(np.linalg.norm(K - K.T), 1e-12 * norm)
                self.assertEqual(np.linalg.matrix_rank(K, tol=1e-10 * norm), K.shape[0] - 3)

    def test_consistency_with_boundary_evaluation(self):
        rng = np.random.default_rng(10)
        model = PlateModel(D=2.0, nu=0.3)
        for _ in range(5):
            polygon = random_convex_polygon(rng)
            for spec in (VEM31, VEM32):
                local = ElementService.compute(polygon, spec, model)
                B = ElementService.by_parts_matrix(polygon, spec, model, local.basis)
                p = rng.normal(size=local.basis.dimension)
                delta = rng.normal(size=local.layout.n_dofs)
                expected = p @ B @ delta
                actual = (local.dof_matrix @ p) @ local.K_loc @ delta
                self.assertAlmostEqual(actual, expected, delta=1e-10 * max(abs(expected), 1.0))

    def test_energy_on_projector_kernel_is_stabilization(self):
        rng = np.random.default_rng(12)
        polygon = random_convex_polygon(rng)
        for spec in (VEM31, VEM32):
            local = ElementService.compute(polygon, spec, PlateModel())
            kernel = null_space(local.Pi_star)
            for _ in range(5):
                delta = kernel @ rng.normal(size=kernel.shape[1])
                energy = delta @ local.K_loc @ delta
                self.assertAlmostEqual(energy, delta @ local.S @ delta, delta=1e-10 * abs(energy))
                self.assertGreater(energy, 0.0)

    def assertStabilizationSpectrum(self, mesh, spec):
        for index, polygon in enumerate(mesh.polygons):
            local = ElementService.compute(polygon, spec, PlateModel())
            kernel = null_space(local.Pi_star)
            eigenvalues = np.linalg.eigvalsh(kernel.T @ local.S @ kernel)
            with self.subTest(element=spec.name, cell=index):
                self.assertGreater(eigenvalues.min(), 0.0)
                self.assertLess(eigenvalues.max() / eigenvalues.min(), 1e4)

    def test_stabilization_spectrum_on_triangles(self):
        mesh = MeshService.build_uniform_triangle_mesh(4)
        for spec in (VEM31, VEM32):
            self.assertStabilizationSpectrum(mesh, spec)

    def test_stabilization_spectrum_on_voronoi(self):
        for n_cells in (25, 100):
            mesh = MeshService.build_voronoi_mesh(n_cells, seed=1)
            for spec in (VEM31, VEM32):
                self.assertStabilizationSpectrum(mesh, spec)

    def test_zero_length_edge(self):
        polygon = Polygon.from_points([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        with self.assertRaisesMessage(ElementError, 'zero-length edge'):
            ElementService.compute(polygon, VEM31, PlateModel())


class LocalLoadTests(SimpleTestCase):

    def test_unit_load(self):
        rng = np.random.default_rng(13)
        polygon = random_convex_polygon(rng)
        local = ElementService.compute(polygon, VEM31, PlateModel(load=lambda x, y: 1.0))
        self.assertAlmostEqual(local.f_loc @ dofs_of({(0, 0): 1.0}, polygon, VEM31), polygon.area, delta=1e-12)
        delta = rng.normal(size=local.layout.n_dofs)
        self.assertAlmostEqual(local.f_loc @ delta, polygon.area * (local.Pi0 @ delta)[0], delta=1e-12)

    def test_zero_load(self):
        local = ElementService.compute(regular_polygon(6), VEM32, PlateModel())
        np.testing.assert_array_equal(local.f_loc, 0.0)

    def test_linear_load_against_linear_function(self):
        polygon = unit_square()
        local = ElementService.compute(polygon, VEM32, PlateModel(load=lambda x, y: x))
        self.assertAlmostEqual(local.f_loc @ dofs_of({(0, 1): 1.0}, polygon, VEM32), 0.25, delta=1e-13)

    def test_load_projection_error(self):
        polygon = unit_square()
        self.assertAlmostEqual(
            ElementService.load_projection_error(polygon, VEM31, PlateModel(load=lambda x, y: 3.0)),
            0.0, delta=1e-13,
        )
        # || x - 1/2 || on the unit square
        error = ElementService.load_projection_error(polygon, VEM31, PlateModel(load=lambda x, y: x))
        self.assertAlmostEqual(error, np.sqrt(1.0 / 12.0), delta=1e-13)
