import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .assembly_services import AssemblyService
from .element_services import ElementService, PlateModel
from .exceptions import PlateLabError
from .polyspace import gauss_legendre, polygon_quadrature

logger = logging.getLogger(__name__)

NORMS = ('L2', 'H1', 'H2')


@dataclass(frozen=True)
class ManufacturedCase:
    """Exact solution with its derivatives and the load D * biharmonic(w)"""
    name: str
    value: Callable = field(compare=False)
    gradient: Callable = field(compare=False)
    hessian: Callable = field(compare=False)
    load: Callable = field(compare=False)


@dataclass(frozen=True)
class ErrorReport:
    h: float
    rel_L2: float
    rel_H1: float
    rel_H2: float
    n_dofs: int
    residual: float = 0.0
    h_mean: float = None

    def error(self, norm):
        return getattr(self, f"rel_{norm}")


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple
    slopes: dict = field(default_factory=dict)
    pairwise_slopes: tuple = ()

    @property
    def finest_slopes(self):
        return self.pairwise_slopes[-1] if self.pairwise_slopes else {}


def _slope(h, errors):
    """Least-squares slope of log(error) against log(h); nan when an error vanishes"""
    if np.any(np.asarray(errors) <= 0.0):
        return float('nan')
    return float(np.polyfit(np.log(h), np.log(errors), 1)[0])


class AnalysisService:
    """Manufactured solutions, error norms and convergence rates"""

    @staticmethod
    def manufactured_square(D=1.0):
        """w = a(x) a(y) with a(t) = t^2 (t-1)^2, clamped on the unit square"""

        def a(t):
            return t * t * (t - 1.0) ** 2

        def a1(t):
            return 4.0 * t ** 3 - 6.0 * t ** 2 + 2.0 * t

        def a2(t):
            return 12.0 * t ** 2 - 12.0 * t + 2.0

        def value(x, y):
            return a(x) * a(y)

        def gradient(x, y):
            return a1(x) * a(y), a(x) * a1(y)

        def hessian(x, y):
            return a2(x) * a(y), a1(x) * a1(y), a(x) * a2(y)

        def load(x, y):
            return D * (24.0 * a(y) + 2.0 * a2(x) * a2(y) + 24.0 * a(x))

        return ManufacturedCase('x^2(x-1)^2 y^2(y-1)^2', value, gradient, hessian, load)

    @staticmethod
    def model_for(case, D=1.0, nu=0.3, zero_load=False):
        if zero_load:
            return PlateModel(D=D, nu=nu)
        return PlateModel(D=D, nu=nu, load=case.load)

    @staticmethod
    def interpolate(case, mesh, spec):
        """Global dofs g_i(w_I) = g_i(w); edge moments use each edge's global normal"""
        dofmap = AssemblyService.number_dofs(mesh, spec)
        values = np.zeros(dofmap.n_dofs)
        x, y = mesh.vertices[:, 0], mesh.vertices[:, 1]
        gx, gy = case.gradient(x, y)
        values[dofmap.vertex_dofs[:, 0]] = case.value(x, y)
        values[dofmap.vertex_dofs[:, 1]] = gx
        values[dofmap.vertex_dofs[:, 2]] = gy
        if spec.has_normal_moments:
            rule = gauss_legendre(spec.edge_gauss_order)
            for e, (a, b) in enumerate(mesh.edges):
                points, weights, _ = rule.on_segment(mesh.vertices[a], mesh.vertices[b])
                gx, gy = case.gradient(points[:, 0], points[:, 1])
                normal = mesh.edge_normal(e)
                values[dofmap.edge_dofs[e]] = weights @ (gx * normal[0] + gy * normal[1])
        return values

    @staticmethod
    def compute_errors(case, mesh, spec, solution, model=None, elements=None, residual=0.0):
        """
        Relative L2, H1 and H2 errors of the cellwise energy projection of the
        discrete solution, against norms of w computed with the same rule
        """
        model = model or PlateModel()
        dofmap = AssemblyService.number_dofs(mesh, spec)
        if len(solution) != dofmap.n_dofs:
            raise ValueError(f"solution has {len(solution)} entries, the dof map {dofmap.n_dofs}")
        errors = np.zeros(3)
        norms = np.zeros(3)
        degree = 2 * spec.k + 4
        for c, polygon in enumerate(mesh.polygons):
            if elements is not None:
                basis, Pi_star = elements[c].basis, elements[c].Pi_star
            else:
                basis = ElementService.basis(polygon, spec)
                Pi_star = ElementService.project_energy(polygon, spec, model, basis)
            coeffs = Pi_star @ AssemblyService.local_values(dofmap, solution, c)
            quad = polygon_quadrature(polygon, degree)
            x, y = quad.x, quad.y
            w = case.value(x, y)
            wx, wy = case.gradient(x, y)
            wxx, wxy, wyy = case.hessian(x, y)
            gx, gy = basis.gradient(quad.points)
            pxx, pxy, pyy = basis.hessian(quad.points)
            p = basis.evaluate(quad.points) @ coeffs
            errors += quad.integrate(np.column_stack([
                (w - p) ** 2,
                (wx - gx @ coeffs) ** 2 + (wy - gy @ coeffs) ** 2,
                (wxx - pxx @ coeffs) ** 2 + 2.0 * (wxy - pxy @ coeffs) ** 2 + (wyy - pyy @ coeffs) ** 2,
            ]))
            norms += quad.integrate(np.column_stack([
                w ** 2,
                wx ** 2 + wy ** 2,
                wxx ** 2 + 2.0 * wxy ** 2 + wyy ** 2,
            ]))
        errors, norms = np.sqrt(errors), np.sqrt(norms)
        relative = np.divide(errors, norms, out=errors.copy(), where=norms > 0.0)
        return ErrorReport(
            h=mesh.h_max,
            h_mean=mesh.h_mean,
            rel_L2=float(relative[0]),
            rel_H1=float(relative[1]),
            rel_H2=float(relative[2]),
            n_dofs=dofmap.n_dofs,
            residual=residual,
        )

    @staticmethod
    def solve_case(case, mesh, spec, model, deterministic=True, threads=1):
        """Assemble, solve and measure one mesh"""
        system = AssemblyService.assemble(mesh, spec, model, deterministic, threads)
        result = AssemblyService.solve(system)
        return AnalysisService.compute_errors(
            case, mesh, spec, result.values,
            model=model, elements=system.elements, residual=result.residual,
        )

    @staticmethod
    def build_table(reports):
        """Order rows by decreasing h and fit least-squares and pairwise slopes"""
        rows = tuple(sorted(reports, key=lambda r: -r.h))
        if len(rows) < 2:
            return ConvergenceTable(rows=rows)
        h = np.array([r.h_mean if r.h_mean is not None else r.h for r in rows])
        slopes = {}
        pairwise = [{} for _ in range(len(rows) - 1)]
        for norm in NORMS:
            errors = np.array([r.error(norm) for r in rows])
            slopes[norm] = _slope(h, errors)
            for i in range(len(rows) - 1):
                pairwise[i][norm] = _slope(h[i:i + 2], errors[i:i + 2])
        return ConvergenceTable(rows=rows, slopes=slopes, pairwise_slopes=tuple(pairwise))

    @staticmethod
    def convergence_study(case, meshes, spec, model, deterministic=True, threads=1):
        if not meshes:
            raise ValueError("a convergence study needs at least one mesh")
        reports = []
        for index, mesh in enumerate(meshes):
            try:
                report = AnalysisService.solve_case(case, mesh, spec, model, deterministic, threads)
            except PlateLabError as exc:
                logger.error("mesh %d (%s) failed: %s", index, mesh, exc)
                exc.mesh_index = index
                raise
            logger.info(
                "%s mesh %d: h=%.4f L2=%.3e H1=%.3e H2=%.3e",
                spec.name, index, report.h, report.rel_L2, report.rel_H1, report.rel_H2,
            )
            reports.append(report)
        return AnalysisService.build_table(reports)

    @staticmethod
    def interpolation_study(case, meshes, spec, model):
        """Errors of the projected interpolant Pi w_I on each mesh (no solve)"""
        reports = [
            AnalysisService.compute_errors(
                case, mesh, spec, AnalysisService.interpolate(case, mesh, spec), model=model,
            )
            for mesh in meshes
        ]
        return AnalysisService.build_table(reports)

    @staticmethod
    def load_error(mesh, spec, model):
        """Global L2 distance between f and its cellwise projection onto P_{k-2}"""
        squares = [
            ElementService.load_projection_error(polygon, spec, model) ** 2
            for polygon in mesh.polygons
        ]
        return float(np.sqrt(np.sum(squares)))
