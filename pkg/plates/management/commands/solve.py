from django.core.management.base import CommandError

from ...analysis_services import AnalysisService
from ...exceptions import MeshError, PlateLabError
from ...mesh_services import MeshService
from ...run_services import write_report_rows
from ..base import MESH_ERROR, SOLVER_ERROR, PlateCommand, logger


class Command(PlateCommand):
    help = 'Solve the clamped plate with the manufactured load on one mesh file and print its error row'

    def add_arguments(self, parser):
        parser.add_argument('mesh', help='Path of a c1vem-mesh file')
        self.add_model_arguments(parser)
        parser.add_argument('--zero-load', action='store_true', help='Replace the load by f = 0')
        parser.add_argument('--out', help='Write the CSV here instead of stdout')

    def handle(self, *args, **options):
        config = self.build_config(options)
        try:
            mesh = MeshService.read_mesh(options['mesh'])
        except FileNotFoundError as exc:
            raise CommandError(f"mesh file not found: {options['mesh']}", returncode=MESH_ERROR) from exc
        except (OSError, MeshError) as exc:
            raise CommandError(f"cannot read {options['mesh']}: {exc}", returncode=MESH_ERROR) from exc

        case = AnalysisService.manufactured_square(config.D)
        model = AnalysisService.model_for(case, config.D, config.nu, zero_load=options['zero_load'])
        try:
            report = AnalysisService.solve_case(
                case, mesh, config.spec, model,
                deterministic=config.deterministic, threads=self.threads,
            )
        except PlateLabError as exc:
            logger.error("solve failed on %s: %s", mesh, exc)
            raise CommandError(f"{config.element} on {options['mesh']}: {exc}", returncode=SOLVER_ERROR) from exc

        self.emit(lambda stream: write_report_rows(stream, [report]), config.out)
