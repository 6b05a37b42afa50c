from pathlib import Path

from django.conf import settings
from django.core.management.base import CommandError

from ...exceptions import MeshError
from ...mesh_services import MeshService
from ...run_services import write_mesh_report
from ..base import CONFIG_ERROR, MESH_ERROR, PlateCommand, logger


class Command(PlateCommand):
    help = 'Generate triangle or Voronoi meshes of the unit square and report their shape regularity'

    def add_arguments(self, parser):
        self.add_mesh_arguments(parser)
        parser.add_argument('--out', help='Mesh file (single size) or output directory')

    def handle(self, *args, **options):
        config = self.build_config(options, min_sizes=1, out='')
        targets = self.targets(config, options.get('out'))

        header = True
        for size, path in zip(config.sizes, targets):
            try:
                mesh = config.build_mesh(size)
                MeshService.write_mesh(mesh, path)
            except MeshError as exc:
                logger.error("mesh generation failed for size %d: %s", size, exc)
                raise CommandError(f"mesh generation failed for size {size}: {exc}", returncode=MESH_ERROR) from exc
            except OSError as exc:
                raise CommandError(f"cannot write {path}: {exc}", returncode=MESH_ERROR) from exc

            report = MeshService.check_shape_regularity(mesh)
            self.emit(lambda stream: write_mesh_report(stream, path, mesh, report, header=header))
            header = False

    def targets(self, config, out):
        if out and Path(out).suffix == '.mesh':
            if len(config.sizes) != 1:
                raise CommandError('a single mesh file needs exactly one size', returncode=CONFIG_ERROR)
            Path(out).parent.mkdir(parents=True, exist_ok=True)
            return [Path(out)]

        directory = Path(out) if out else Path(settings.PLATE_LAB['MESH_DIR'])
        try:
            directory.mkdir(parents=True, exist_ok=True)
        except OSError as exc:
            raise CommandError(f"cannot create {directory}: {exc}", returncode=CONFIG_ERROR) from exc
        if config.mesh_type == 'triangles':
            return [directory / f"triangles_N{size}.mesh" for size in config.sizes]
        return [
            directory / f"voronoi_{size}_seed{config.seed}_lloyd{config.lloyd_iters}.mesh"
            for size in config.sizes
        ]
