import logging
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np
from scipy.spatial import cKDTree

from .exceptions import DegenerateCellError, MeshError, MeshParseError
from .polyspace import Polygon

logger = logging.getLogger(__name__)

MESH_FILE_HEADER = 'c1vem-mesh 1'
CELL_AREA_TOLERANCE = 1e-12
SHORT_EDGE_FACTOR = 1e-9
KERNEL_GRID = 129


@dataclass(frozen=True, eq=False)
class PolygonalMesh:
    vertices: np.ndarray
    cells: tuple
    edges: np.ndarray
    edge_cells: np.ndarray
    cell_edges: tuple
    cell_edge_signs: tuple
    boundary_vertex_flags: np.ndarray
    boundary_edge_flags: np.ndarray

    @classmethod
    def from_cells(cls, vertices, cells):
        """Derive edges, adjacency and boundary flags, validating every invariant"""
        vertices = np.array(vertices, dtype=float).reshape(-1, 2)
        cells = tuple(tuple(int(i) for i in cell) for cell in cells)
        if not cells:
            raise MeshError("mesh has no cells")
        if not np.isfinite(vertices).all():
            raise MeshError("vertex coordinates must be finite")

        edge_index = {}
        edges, edge_cells = [], []
        cell_edges, cell_edge_signs = [], []
        for c, cell in enumerate(cells):
            if len(cell) < 3:
                raise MeshError(f"cell {c} has fewer than 3 vertices")
            if len(set(cell)) != len(cell):
                raise MeshError(f"cell {c} repeats a vertex")
            if min(cell) < 0 or max(cell) >= len(vertices):
                raise MeshError(f"cell {c} references a vertex out of range")
            polygon = Polygon(vertices[list(cell)])
            if polygon.signed_area <= 0.0:
                raise MeshError(f"cell {c} is not counter-clockwise (signed area {polygon.signed_area:.3e})")
            if not _is_simple(polygon.vertices):
                raise MeshError(f"cell {c} is self-intersecting")

            local_edges, local_signs = [], []
            for i, a in enumerate(cell):
                b = cell[(i + 1) % len(cell)]
                key = (min(a, b), max(a, b))
                e = edge_index.get(key)
                if e is None:
                    e = edge_index[key] = len(edges)
                    edges.append((a, b))
                    edge_cells.append([c, -1])
                    local_signs.append(1)
                else:
                    if edge_cells[e][1] != -1 or edges[e] != (b, a):
                        raise MeshError(f"edge {key} of cell {c} is shared inconsistently")
                    edge_cells[e][1] = c
                    local_signs.append(-1)
                local_edges.append(e)
            cell_edges.append(tuple(local_edges))
            cell_edge_signs.append(tuple(local_signs))

        edges = np.array(edges, dtype=int)
        edge_cells = np.array(edge_cells, dtype=int)
        boundary_edge_flags = edge_cells[:, 1] == -1
        boundary_vertex_flags = np.zeros(len(vertices), dtype=bool)
        boundary_vertex_flags[edges[boundary_edge_flags].ravel()] = True

        used = np.zeros(len(vertices), dtype=bool)
        used[[i for cell in cells for i in cell]] = True
        if not used.all():
            raise MeshError(f"{int((~used).sum())} vertices belong to no cell")

        mesh = cls(
            vertices=vertices,
            cells=cells,
            edges=edges,
            edge_cells=edge_cells,
            cell_edges=tuple(cell_edges),
            cell_edge_signs=tuple(cell_edge_signs),
            boundary_vertex_flags=boundary_vertex_flags,
            boundary_edge_flags=boundary_edge_flags,
        )
        mesh._check_boundary()
        return mesh

    def _check_boundary(self):
        boundary = self.edges[self.boundary_edge_flags]
        outgoing = np.bincount(boundary[:, 0], minlength=self.n_vertices)
        incoming = np.bincount(boundary[:, 1], minlength=self.n_vertices)
        if np.any(outgoing != incoming):
            raise MeshError("boundary edges do not form closed loops")
        a, b = self.vertices[boundary[:, 0]], self.vertices[boundary[:, 1]]
        domain_area = 0.5 * float(np.sum(a[:, 0] * b[:, 1] - b[:, 0] * a[:, 1]))
        total = float(sum(p.area for p in self.polygons))
        if abs(total - domain_area) > 1e-12 * max(abs(domain_area), 1.0):
            raise MeshError(f"cells cover area {total!r}, the boundary encloses {domain_area!r}")

    @property
    def n_vertices(self):
        return len(self.vertices)

    @property
    def n_cells(self):
        return len(self.cells)

    @property
    def n_edges(self):
        return len(self.edges)

    @cached_property
    def polygons(self):
        return tuple(Polygon(self.vertices[list(cell)]) for cell in self.cells)

    @cached_property
    def cell_diameters(self):
        return np.array([p.diameter for p in self.polygons])

    @property
    def h_max(self):
        return float(self.cell_diameters.max())

    @property
    def h_min(self):
        return float(self.cell_diameters.min())

    @property
    def h_mean(self):
        return float(self.cell_diameters.mean())

    @property
    def total_area(self):
        return float(sum(p.area for p in self.polygons))

    def edge_normal(self, e):
        """Unit normal of edge e, outward for its left cell"""
        a, b = self.vertices[self.edges[e]]
        t = (b - a) / np.hypot(*(b - a))
        return np.array([t[1], -t[0]])

    def structurally_equal(self, other):
        return (
            self.cells == other.cells
            and self.vertices.shape == other.vertices.shape
            and np.array_equal(self.vertices, other.vertices)
        )

    def __str__(self):
        return f"{self.n_cells} cells, {self.n_vertices} vertices, h={self.h_max:.4f}"


@dataclass(frozen=True)
class ShapeRegularityReport:
    rho_star: float
    min_edge_ratio: float
    h_max: float
    h_mean: float


def _segments_cross(p, q, r, s):
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(r, s, p), orient(r, s, q)
    d3, d4 = orient(p, q, r), orient(p, q, s)
    return d1 * d2 < 0 and d3 * d4 < 0


def _is_simple(points):
    n = len(points)
    for i in range(n):
        for j in range(i + 2, n):
            if i == 0 and j == n - 1:
                continue
            if _segments_cross(points[i], points[(i + 1) % n], points[j], points[(j + 1) % n]):
                return False
    return True


def _clip_half_plane(points, normal, offset):
    """Keep the part of a convex loop where normal . x <= offset"""
    distance = points @ normal - offset
    if np.all(distance <= 0.0):
        return points
    kept = []
    n = len(points)
    for i in range(n):
        j = (i + 1) % n
        di, dj = distance[i], distance[j]
        if di <= 0.0:
            kept.append(points[i])
        if (di < 0.0 < dj) or (dj < 0.0 < di):
            kept.append(points[i] + di / (di - dj) * (points[j] - points[i]))
    return np.array(kept).reshape(-1, 2)


def _star_kernel(polygon):
    """Kernel (set of points seeing the whole polygon) as a convex loop, possibly empty"""
    lo, hi = polygon.vertices.min(axis=0), polygon.vertices.max(axis=0)
    kernel = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])
    for i in range(polygon.n_vertices):
        a, _ = polygon.edge(i)
        normal = polygon.normals[i]
        kernel = _clip_half_plane(kernel, normal, normal @ a)
        if len(kernel) < 3:
            return None
    return kernel


def _inradius(loop):
    """Largest distance to the boundary of a convex loop, sampled on a grid"""
    lo, hi = loop.min(axis=0), loop.max(axis=0)
    xs = np.linspace(lo[0], hi[0], KERNEL_GRID)
    ys = np.linspace(lo[1], hi[1], KERNEL_GRID)
    gx, gy = np.meshgrid(xs, ys)
    grid = np.column_stack([gx.ravel(), gy.ravel()])
    vectors = np.roll(loop, -1, axis=0) - loop
    lengths = np.hypot(vectors[:, 0], vectors[:, 1])
    keep = lengths > 0.0
    tangents = vectors[keep] / lengths[keep, None]
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    offsets = np.sum(normals * loop[keep], axis=1)
    inside = offsets[None, :] - grid @ normals.T
    return max(float(inside.min(axis=1).max()), 0.0)


class MeshService:
    """Mesh generation, validation and file I/O"""

    @staticmethod
    def build_uniform_triangle_mesh(N):
        """Unit square split into N x N squares, each cut into two right triangles"""
        if N < 1:
            raise ValueError(f"N must be a positive integer, got {N}")
        ticks = np.arange(N + 1) / N
        xx, yy = np.meshgrid(ticks, ticks)
        vertices = np.column_stack([xx.ravel(), yy.ravel()])
        cells = []
        for j in range(N):
            for i in range(N):
                n1 = j * (N + 1) + i
                n2 = n1 + 1
                n4 = n1 + N + 1
                n3 = n4 + 1
                cells.append((n1, n2, n4))
                cells.append((n2, n3, n4))
        mesh = PolygonalMesh.from_cells(vertices, cells)
        logger.info("uniform triangle mesh N=%d: %s", N, mesh)
        return mesh

    @staticmethod
    def build_voronoi_mesh(n_cells, seed=0, lloyd_iters=0):
        """Voronoi tessellation of the unit square from uniformly random generators"""
        if n_cells < 1:
            raise ValueError(f"n_cells must be a positive integer, got {n_cells}")
        if lloyd_iters < 0:
            raise ValueError("lloyd_iters must be non-negative")
        rng = np.random.default_rng(seed)
        generators = rng.random((n_cells, 2))
        for step in range(lloyd_iters):
            loops = _voronoi_loops(generators)
            generators = np.array([Polygon(loop).centroid for loop in loops])
            logger.debug("Lloyd step %d/%d done", step + 1, lloyd_iters)
        loops = _voronoi_loops(generators)
        vertices, cells = _weld(loops, tolerance=SHORT_EDGE_FACTOR / np.sqrt(n_cells))
        for c, cell in enumerate(cells):
            area = Polygon(vertices[list(cell)]).area if len(cell) >= 3 else 0.0
            if area < CELL_AREA_TOLERANCE:
                raise DegenerateCellError(
                    f"Voronoi cell {c} collapsed (area {area:.3e}) for seed {seed}; "
                    "retry with another seed or more Lloyd iterations",
                    cell_index=c,
                )
        mesh = PolygonalMesh.from_cells(vertices, cells)
        logger.info("Voronoi mesh n=%d seed=%d lloyd=%d: %s", n_cells, seed, lloyd_iters, mesh)
        return mesh

    @staticmethod
    def check_shape_regularity(mesh):
        """Worst star-shapedness ratio and shortest relative edge over all cells"""
        rho_star = np.inf
        min_edge_ratio = np.inf
        for polygon in mesh.polygons:
            kernel = _star_kernel(polygon)
            rho = 0.0 if kernel is None else _inradius(kernel) / polygon.diameter
            rho_star = min(rho_star, rho)
            min_edge_ratio = min(min_edge_ratio, float(polygon.edge_lengths.min()) / polygon.diameter)
        return ShapeRegularityReport(
            rho_star=float(rho_star),
            min_edge_ratio=float(min_edge_ratio),
            h_max=mesh.h_max,
            h_mean=mesh.h_mean,
        )

    @staticmethod
    def write_mesh(mesh, path):
        """Write the plain-text mesh format, coordinates with 17 significant digits"""
        lines = [MESH_FILE_HEADER, f"vertices {mesh.n_vertices}"]
        lines.extend(f"{x:.17g} {y:.17g}" for x, y in mesh.vertices)
        lines.append(f"cells {mesh.n_cells}")
        lines.extend(" ".join(str(i) for i in (len(cell), *cell)) for cell in mesh.cells)
        Path(path).write_text("\n".join(lines) + "\n", encoding='utf-8')

    @staticmethod
    def read_mesh(path):
        """Read a mesh file; undecodable bytes are a parse error"""
        try:
            text = Path(path).read_text(encoding='utf-8')
        except UnicodeDecodeError as exc:
            raise MeshParseError(f"invalid UTF-8 byte {exc.object[exc.start]:#04x}", offset=exc.start) from exc
        return MeshService.parse_mesh(text)

    @staticmethod
    def parse_mesh(text):
        """Parse mesh text, reporting the line of the first malformed entry"""
        lines = [(number, line.strip()) for number, line in enumerate(text.splitlines(), start=1)]
        lines = [(number, line) for number, line in lines if line]
        cursor = iter(lines)

        def next_line(what):
            try:
                return next(cursor)
            except StopIteration:
                raise MeshParseError(f"unexpected end of file, expected {what}") from None

        number, line = next_line("header")
        if line != MESH_FILE_HEADER:
            raise MeshParseError(f"bad header {line!r}", line=number)

        def section(keyword):
            number, line = next_line(f"'{keyword} <count>'")
            parts = line.split()
            if len(parts) != 2 or parts[0] != keyword or not parts[1].isdigit():
                raise MeshParseError(f"expected '{keyword} <count>', got {line!r}", line=number)
            return int(parts[1]), number

        vertices = []
        n_vertices, _ = section('vertices')
        for _ in range(n_vertices):
            number, line = next_line("a vertex")
            parts = line.split()
            try:
                if len(parts) != 2:
                    raise ValueError
                x, y = float(parts[0]), float(parts[1])
            except ValueError:
                raise MeshParseError(f"expected 'x y', got {line!r}", line=number) from None
            if not (np.isfinite(x) and np.isfinite(y)):
                raise MeshParseError(f"non-finite coordinate in {line!r}", line=number)
            vertices.append((x, y))

        n_cells, number = section('cells')
        if n_cells == 0:
            raise MeshParseError("mesh has no cells", line=number)
        cells = []
        for c in range(n_cells):
            number, line = next_line(f"cell {c}")
            try:
                values = [int(v) for v in line.split()]
            except ValueError:
                raise MeshParseError(f"cell {c}: non-integer entry in {line!r}", line=number) from None
            if not values or values[0] != len(values) - 1:
                raise MeshParseError(f"cell {c}: vertex count does not match {line!r}", line=number)
            for i in values[1:]:
                if not 0 <= i < len(vertices):
                    raise MeshParseError(f"cell {c} references vertex {i} out of range", line=number)
            cells.append(values[1:])

        extra = next(cursor, None)
        if extra is not None:
            raise MeshParseError(f"trailing content {extra[1]!r}", line=extra[0])
        return PolygonalMesh.from_cells(vertices, cells)


def _voronoi_loops(generators):
    """Voronoi cells of the generators clipped to the unit square, by bisector half-planes"""
    square = np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])
    loops = []
    for i, g in enumerate(generators):
        distances = np.hypot(*(generators - g).T)
        loop = square
        for j in np.argsort(distances, kind='stable'):
            if j == i:
                continue
            reach = np.max(np.hypot(*(loop - g).T))
            if distances[j] > 2.0 * reach:
                break
            other = generators[j]
            loop = _clip_half_plane(loop, other - g, 0.5 * (other @ other - g @ g))
            if len(loop) < 3:
                break
        loops.append(loop)
    return loops


def _weld(loops, tolerance):
    """Merge coincident vertices of independently clipped cells and drop collapsed edges"""
    points = np.vstack(loops)
    parent = np.arange(len(points))

    def root(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i, j in sorted(cKDTree(points).query_pairs(tolerance)):
        ri, rj = root(i), root(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    representatives = np.array([root(i) for i in range(len(points))])
    kept, inverse = np.unique(representatives, return_inverse=True)
    logger.debug("welded %d cell corners into %d vertices", len(points), len(kept))

    cells, offset = [], 0
    for loop in loops:
        ids = list(inverse[offset:offset + len(loop)])
        offset += len(loop)
        cell = [v for k, v in enumerate(ids) if v != ids[k - 1]] if len(ids) > 1 else ids
        cells.append(tuple(int(v) for v in cell))
    return points[kept], cells
