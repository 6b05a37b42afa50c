import io
import logging
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from ..forms import RunConfigForm

logger = logging.getLogger('plates')

CONFIG_ERROR = 2
MESH_ERROR = 3
SOLVER_ERROR = 4


class PlateCommand(BaseCommand):
    """Shared option handling for the plate commands"""

    def add_mesh_arguments(self, parser):
        parser.add_argument('--type', dest='mesh_type', choices=['triangles', 'voronoi'], default='triangles')
        parser.add_argument('--N', dest='N', help='Subdivisions, e.g. 4,8,16')
        parser.add_argument('--cells', dest='cells', help='Voronoi cell counts, e.g. 25,100')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--lloyd', dest='lloyd_iters', type=int, default=0)

    def add_model_arguments(self, parser):
        parser.add_argument('--element', choices=['vem31', 'vem32'], default='vem31')
        parser.add_argument('--nu', type=float, default=None, help='Poisson ratio (default 0.3)')
        parser.add_argument('--D', dest='D', type=float, default=None, help='Bending rigidity (default 1.0)')
        parser.add_argument('--deterministic', action='store_true', help='Serial, ordered element computation')

    def sizes_option(self, options):
        mesh_type = options.get('mesh_type') or 'triangles'
        wanted, other = ('N', 'cells') if mesh_type == 'triangles' else ('cells', 'N')
        if options.get(other):
            raise CommandError(
                f"--{other} does not apply to {mesh_type} meshes, use --{wanted}",
                returncode=CONFIG_ERROR,
            )
        return options.get(wanted) or ''

    def build_config(self, options, min_sizes=0, **overrides):
        data = {
            'element': options.get('element'),
            'mesh_type': options.get('mesh_type'),
            'sizes': self.sizes_option(options) if 'mesh_type' in options else '',
            'nu': options.get('nu'),
            'D': options.get('D'),
            'seed': options.get('seed'),
            'lloyd_iters': options.get('lloyd_iters'),
            'out': options.get('out'),
            'deterministic': options.get('deterministic', False),
        }
        data.update(overrides)
        form = RunConfigForm(data, min_sizes=min_sizes)
        if not form.is_valid():
            raise CommandError(form.error_text(), returncode=CONFIG_ERROR)
        return form.to_config()

    @property
    def threads(self):
        return settings.PLATE_LAB['THREADS']

    def emit(self, write, out=None):
        """Render with write(stream) to --out or stdout"""
        buffer = io.StringIO()
        write(buffer)
        if out:
            try:
                path = Path(out)
                path.parent.mkdir(parents=True, exist_ok=True)
                path.write_text(buffer.getvalue())
            except OSError as exc:
                raise CommandError(f"cannot write {out}: {exc}", returncode=CONFIG_ERROR) from exc
            logger.info("wrote %s", out)
        else:
            self.stdout.write(buffer.getvalue(), ending='')
