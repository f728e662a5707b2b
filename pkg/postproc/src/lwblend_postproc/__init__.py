"""Plot scripts over lwblend solver output files."""

from .io import Snapshot, SchemaError, read_manifest, read_snapshot

__all__ = ["Snapshot", "SchemaError", "read_manifest", "read_snapshot"]

__version__ = "0.1.0"
