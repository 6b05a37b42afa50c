class PlateLabError(Exception):
    """Base class for solver errors"""


class MeshError(PlateLabError, ValueError):
    pass


class MeshParseError(MeshError):
    def __init__(self, message, line=None, offset=None):
        self.line = line
        self.offset = offset
        if line is not None:
            message = f"line {line}: {message}"
        elif offset is not None:
            message = f"byte {offset}: {message}"
        super().__init__(message)


class DegenerateCellError(MeshError):
    def __init__(self, message, cell_index=None):
        self.cell_index = cell_index
        super().__init__(message)


class GeometryError(PlateLabError, ValueError):
    """Polygon too small or too distorted to integrate on"""


class ElementError(PlateLabError):
    def __init__(self, message, cell_index=None):
        self.cell_index = cell_index
        if cell_index is not None:
            message = f"cell {cell_index}: {message}"
        super().__init__(message)


class AssemblyError(ElementError):
    pass


class SolverError(PlateLabError):
    pass
