import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from .element_services import ElementService
from .exceptions import AssemblyError, PlateLabError, SolverError

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-8


@dataclass(frozen=True, eq=False)
class DofMap:
    """Global numbering: 3 dofs per vertex, then one normal moment per edge (k=3)"""
    mesh: object
    spec: object
    vertex_dofs: np.ndarray
    edge_dofs: np.ndarray
    n_dofs: int

    def cell_dofs(self, c):
        """Global indices and orientation signs of the local dofs of cell c"""
        cell = self.mesh.cells[c]
        indices = self.vertex_dofs[list(cell)].ravel()
        signs = np.ones(len(indices))
        if self.spec.has_normal_moments:
            edges = list(self.mesh.cell_edges[c])
            indices = np.concatenate([indices, self.edge_dofs[edges]])
            signs = np.concatenate([signs, self.mesh.cell_edge_signs[c]])
        return indices, signs

    @property
    def constrained(self):
        flags = np.zeros(self.n_dofs, dtype=bool)
        flags[AssemblyService.apply_clamped_bc(self)] = True
        return flags

    @property
    def free(self):
        return np.flatnonzero(~self.constrained)


@dataclass(frozen=True, eq=False)
class GlobalSystem:
    matrix: sparse.csr_matrix
    rhs: np.ndarray
    dofmap: DofMap
    free: np.ndarray
    elements: tuple

    @property
    def n_free(self):
        return len(self.free)


@dataclass(frozen=True, eq=False)
class SolveResult:
    values: np.ndarray
    residual: float


class AssemblyService:
    """Global numbering, assembly, clamped boundary conditions and solve"""

    @staticmethod
    def number_dofs(mesh, spec):
        """Three dofs per vertex, then one normal moment per edge for k=3"""
        vertex_dofs = np.arange(3 * mesh.n_vertices).reshape(mesh.n_vertices, 3)
        if spec.has_normal_moments:
            edge_dofs = 3 * mesh.n_vertices + np.arange(mesh.n_edges)
        else:
            edge_dofs = np.zeros(0, dtype=int)
        return DofMap(
            mesh=mesh,
            spec=spec,
            vertex_dofs=vertex_dofs,
            edge_dofs=edge_dofs,
            n_dofs=3 * mesh.n_vertices + len(edge_dofs),
        )

    @staticmethod
    def apply_clamped_bc(dofmap):
        """
        Indices fixed to zero by w = dw/dn = 0: every dof of a boundary vertex
        (the tangential derivative vanishes with w) and boundary normal moments
        """
        mesh = dofmap.mesh
        constrained = [dofmap.vertex_dofs[mesh.boundary_vertex_flags].ravel()]
        if dofmap.spec.has_normal_moments:
            constrained.append(dofmap.edge_dofs[mesh.boundary_edge_flags])
        return np.sort(np.concatenate(constrained))

    @staticmethod
    def compute_elements(mesh, spec, model, deterministic=True, threads=1):
        """Local matrices of every cell, yielded as (cell index, matrices)"""

        def compute(c):
            try:
                return c, ElementService.compute(mesh.polygons[c], spec, model)
            except (PlateLabError, np.linalg.LinAlgError) as exc:
                logger.error("element computation failed on cell %d: %s", c, exc)
                raise AssemblyError(str(exc), cell_index=c) from exc

        if deterministic or threads <= 1:
            for c in range(mesh.n_cells):
                yield compute(c)
            return
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(compute, c) for c in range(mesh.n_cells)]
            for future in as_completed(futures):
                yield future.result()

    @staticmethod
    def assemble(mesh, spec, model, deterministic=True, threads=1):
        """Scatter local matrices into CSR and keep the free rows and columns"""
        dofmap = AssemblyService.number_dofs(mesh, spec)
        rows, cols, data = [], [], []
        rhs = np.zeros(dofmap.n_dofs)
        elements = [None] * mesh.n_cells
        for c, local in AssemblyService.compute_elements(mesh, spec, model, deterministic, threads):
            elements[c] = local
            indices, signs = dofmap.cell_dofs(c)
            K = local.K_loc * np.outer(signs, signs)
            rows.append(np.repeat(indices, len(indices)))
            cols.append(np.tile(indices, len(indices)))
            data.append(K.ravel())
            np.add.at(rhs, indices, signs * local.f_loc)

        full = sparse.coo_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(dofmap.n_dofs, dofmap.n_dofs),
        ).tocsr()
        free = dofmap.free
        matrix = full[free][:, free].tocsr()
        logger.info(
            "assembled %s: %d dofs, %d free, %d nonzeros",
            spec.name, dofmap.n_dofs, len(free), matrix.nnz,
        )
        return GlobalSystem(
            matrix=matrix,
            rhs=rhs[free],
            dofmap=dofmap,
            free=free,
            elements=tuple(elements),
        )

    @staticmethod
    def solve(system):
        """Sparse LDL-style factorisation; a non-positive pivot means the system is not SPD"""
        values = np.zeros(system.dofmap.n_dofs)
        b = system.rhs
        if system.n_free == 0 or not np.any(b):
            return SolveResult(values=values, residual=0.0)
        A = system.matrix.tocsc()
        try:
            factor = splu(
                A,
                permc_spec='MMD_AT_PLUS_A',
                diag_pivot_thresh=0.0,
                options={'SymmetricMode': True},
            )
        except RuntimeError as exc:
            raise SolverError(f"system not SPD: factorisation failed ({exc})") from exc
        pivots = factor.U.diagonal()
        if np.any(pivots <= 0.0):
            raise SolverError(
                f"system not SPD: {int(np.sum(pivots <= 0.0))} non-positive pivots"
            )
        x = factor.solve(b)
        x += factor.solve(b - A @ x)
        residual = float(np.linalg.norm(b - A @ x) / np.linalg.norm(b))
        if not np.isfinite(residual) or residual > RESIDUAL_TOLERANCE:
            raise SolverError(f"system not SPD: relative residual {residual:.3e}")
        logger.info("solved %d free dofs, relative residual %.2e", system.n_free, residual)
        values[system.free] = x
        return SolveResult(values=values, residual=residual)

    @staticmethod
    def local_values(dofmap, values, c):
        """Local (cell-oriented) dof vector of cell c"""
        indices, signs = dofmap.cell_dofs(c)
        return signs * values[indices]
