from django.core.management.base import CommandError

from ...analysis_services import AnalysisService
from ...exceptions import MeshError, PlateLabError
from ...run_services import RunRecordService, write_table
from ..base import MESH_ERROR, SOLVER_ERROR, PlateCommand, logger


class Command(PlateCommand):
    help = (
        'Convergence study on a family of meshes; prints one CSV row per mesh (h is h_max) '
        'and the slopes fitted against the mean cell diameter'
    )

    def add_arguments(self, parser):
        self.add_model_arguments(parser)
        self.add_mesh_arguments(parser)
        parser.add_argument('--out', help='Write the CSV here instead of stdout')
        parser.add_argument('--record', action='store_true', help='Store the table in the database')
        parser.add_argument('--interpolant', action='store_true', help='Errors of the interpolant instead of the solution')

    def handle(self, *args, **options):
        config = self.build_config(options, min_sizes=2)

        meshes = []
        for size in config.sizes:
            try:
                meshes.append(config.build_mesh(size))
            except MeshError as exc:
                raise CommandError(f"mesh generation failed for size {size}: {exc}", returncode=MESH_ERROR) from exc

        case = AnalysisService.manufactured_square(config.D)
        model = AnalysisService.model_for(case, config.D, config.nu)
        try:
            if options['interpolant']:
                table = AnalysisService.interpolation_study(case, meshes, config.spec, model)
            else:
                table = AnalysisService.convergence_study(
                    case, meshes, config.spec, model,
                    deterministic=config.deterministic, threads=self.threads,
                )
        except PlateLabError as exc:
            index = getattr(exc, 'mesh_index', None)
            where = f" on mesh {config.sizes[index]}" if index is not None else ''
            raise CommandError(f"{config.element}{where}: {exc}", returncode=SOLVER_ERROR) from exc

        logger.info("slopes %s", ', '.join(f"{k}={v:.3f}" for k, v in table.slopes.items()))
        if options['record']:
            run = RunRecordService.record(config, table, interpolant=options['interpolant'])
            logger.info("recorded as run %d", run.pk)

        self.emit(lambda stream: write_table(stream, table), config.out)
