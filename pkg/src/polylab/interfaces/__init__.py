"""CLI and HTTP gateway over the pipeline."""

from .pipeline import Pipeline, SnapshotMissingError, render_id
from .render import LayoutFailure, layout_graph, render_svg
from .runconfig import DEFAULTS, ConfigError, RunConfig
from .snapshot import Snapshot, SnapshotError, write_snapshot

__all__ = [
    "ConfigError", "DEFAULTS", "LayoutFailure", "Pipeline", "RunConfig",
    "Snapshot", "SnapshotError", "SnapshotMissingError", "layout_graph",
    "render_id", "render_svg", "write_snapshot",
]
