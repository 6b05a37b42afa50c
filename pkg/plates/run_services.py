import csv
import logging
import math
from dataclasses import dataclass

from django.db import transaction

from .analysis_services import NORMS, AnalysisService, ErrorReport
from .element_services import ElementSpec
from .mesh_services import MeshService
from .models import ConvergenceRun, ErrorRecord

logger = logging.getLogger(__name__)

CSV_HEADER = ['h', 'n_dofs', 'rel_L2', 'rel_H1', 'rel_H2', 'residual']
MESH_REPORT_HEADER = ['path', 'n_cells', 'n_vertices', 'h_max', 'h_mean', 'rho_star', 'min_edge_ratio']


@dataclass(frozen=True)
class RunConfig:
    element: str = 'vem31'
    mesh_type: str = 'triangles'
    sizes: tuple = ()
    nu: float = 0.3
    D: float = 1.0
    seed: int = 0
    lloyd_iters: int = 0
    out: str = None
    deterministic: bool = False

    @property
    def spec(self):
        return ElementSpec.from_name(self.element)

    def build_mesh(self, size):
        if self.mesh_type == 'triangles':
            return MeshService.build_uniform_triangle_mesh(size)
        return MeshService.build_voronoi_mesh(size, seed=self.seed, lloyd_iters=self.lloyd_iters)

    def build_meshes(self):
        return [self.build_mesh(size) for size in self.sizes]


def _finite(value):
    if value is None or not math.isfinite(value):
        return None
    return value


def _number(value):
    return f"{value:.10e}"


def write_report_rows(stream, reports, header=True):
    writer = csv.writer(stream, lineterminator='\n')
    if header:
        writer.writerow(CSV_HEADER)
    for report in reports:
        writer.writerow([
            _number(report.h), report.n_dofs,
            _number(report.rel_L2), _number(report.rel_H1), _number(report.rel_H2),
            _number(report.residual),
        ])


def write_table(stream, table):
    """Rows plus a trailing comment block with the fitted slopes"""
    write_report_rows(stream, table.rows)
    if not table.slopes:
        return
    # the h column is h_max; slopes are fitted against the mean cell diameter
    slopes = [f"slope_{norm}={table.slopes[norm]:.4f}" for norm in NORMS]
    stream.write('# ' + ' '.join(slopes + ['fit=h_mean']) + '\n')
    stream.write('# ' + ' '.join(f"finest_{norm}={table.finest_slopes[norm]:.4f}" for norm in NORMS) + '\n')


def write_mesh_report(stream, path, mesh, report, header=True):
    writer = csv.writer(stream, lineterminator='\n')
    if header:
        writer.writerow(MESH_REPORT_HEADER)
    writer.writerow([
        path, mesh.n_cells, mesh.n_vertices,
        f"{report.h_max:.6f}", f"{report.h_mean:.6f}",
        f"{report.rho_star:.6f}", f"{report.min_edge_ratio:.6f}",
    ])


class RunRecordService:
    """Store convergence tables in the database and read them back"""

    @staticmethod
    @transaction.atomic
    def record(config, table, interpolant=False):
        slopes = table.slopes or {}
        run = ConvergenceRun.objects.create(
            element=config.element,
            mesh_type=config.mesh_type,
            sizes=','.join(str(s) for s in config.sizes),
            nu=config.nu,
            bending_rigidity=config.D,
            seed=config.seed,
            lloyd_iters=config.lloyd_iters,
            deterministic=config.deterministic,
            interpolant=interpolant,
            slope_l2=_finite(slopes.get('L2')),
            slope_h1=_finite(slopes.get('H1')),
            slope_h2=_finite(slopes.get('H2')),
        )
        ErrorRecord.objects.bulk_create([
            ErrorRecord(
                run=run,
                position=position,
                h=row.h,
                h_mean=row.h_mean if row.h_mean is not None else row.h,
                n_dofs=row.n_dofs,
                rel_l2=row.rel_L2,
                rel_h1=row.rel_H1,
                rel_h2=row.rel_H2,
                residual=row.residual,
            )
            for position, row in enumerate(table.rows)
        ])
        logger.info("recorded run %d with %d rows", run.pk, len(table.rows))
        return run

    @staticmethod
    def as_table(run):
        reports = [
            ErrorReport(
                h=record.h,
                h_mean=record.h_mean,
                rel_L2=record.rel_l2,
                rel_H1=record.rel_h1,
                rel_H2=record.rel_h2,
                n_dofs=record.n_dofs,
                residual=record.residual,
            )
            for record in run.rows.order_by('position')
        ]
        return AnalysisService.build_table(reports)

    @staticmethod
    def matches(run, table, tolerance=0.0):
        """True when a fresh table reproduces a recorded run row by row"""
        recorded = RunRecordService.as_table(run)
        if len(recorded.rows) != len(table.rows):
            return False
        for old, new in zip(recorded.rows, table.rows):
            if old.n_dofs != new.n_dofs:
                return False
            for norm in NORMS:
                if abs(old.error(norm) - new.error(norm)) > tolerance * abs(old.error(norm)):
                    return False
        return True
