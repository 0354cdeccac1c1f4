"""Exception types shared across the package."""


class PlanarmError(Exception):
    """Base class for all planarm errors."""


class DigestMismatchError(PlanarmError):
    """A persisted artifact does not match the model/scene it is used with."""


class RoadmapBuildError(PlanarmError):
    """Roadmap construction produced no usable graph."""


class UnreachableQueryError(PlanarmError):
    """A query configuration cannot be attached to the roadmap."""


class SceneGenerationError(PlanarmError):
    """Random scene generation exhausted its retry budget."""


class ConfigError(PlanarmError):
    """Invalid or inconsistent planner configuration."""
