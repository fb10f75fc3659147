"""
Storage module for nslfa.

CSV ingestion/emission with pandas and JSON artifacts with orjson.
"""

from .artifacts import ArtifactStore, file_digest, load_settings, read_json, write_json, write_jsonl
from .csv_io import matrix_frame, read_dataset, read_design, write_dataset, write_design, write_frame

__all__ = [
    "ArtifactStore",
    "file_digest",
    "load_settings",
    "read_json",
    "write_json",
    "write_jsonl",
    "matrix_frame",
    "read_dataset",
    "read_design",
    "write_dataset",
    "write_design",
    "write_frame",
]
