"""Exception hierarchy shared by every pipeline stage."""


class PipelineError(Exception):
    """Base class for all wispwind errors."""


class DimensionError(PipelineError):
    """Raster dimensions disagree with the rest of the scene."""


class ValidationError(PipelineError):
    """Scene content violates a structural invariant."""


class ParseError(PipelineError):
    """A text input (polyline, config file) could not be parsed."""


class ConfigError(PipelineError):
    """A configuration value violates its declared constraint."""


class ExtractionError(PipelineError):
    """Sketch filling or contour processing failed."""


class MeshError(PipelineError):
    """A mask could not be turned into a usable triangle mesh."""


class ContractError(PipelineError):
    """An operation was called on data that violates its precondition."""


class SimulationFault(PipelineError):
    """Non-finite state encountered while integrating."""

    def __init__(self, message, step_index=None, mesh_id=None, vertex_id=None):
        super().__init__(message)
        self.step_index = step_index
        self.mesh_id = mesh_id
        self.vertex_id = vertex_id


class WarpError(PipelineError):
    """Thin-plate-spline fitting failed beyond recovery."""


class InpaintError(PipelineError):
    """Background hole filling is impossible for this input."""


class DiagnoseError(PipelineError):
    """Frames and trajectory dump do not describe the same run."""
