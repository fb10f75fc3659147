"""
JSON artifacts and run manifests.

Documents are pydantic models serialized with orjson; per-replication
records go to JSON lines. Every artifact written through an ArtifactStore
names the manifest of its run.
"""

import hashlib
import logging
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Optional

import orjson
from pydantic import BaseModel, ValidationError

from model.errors import InputError
from registry.schemas import RunManifest, RunSettings

logger = logging.getLogger(__name__)

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SERIALIZE_NUMPY
MANIFEST_NAME = "manifest.json"


def _plain(obj: Any) -> Any:
    if isinstance(obj, BaseModel):
        return obj.model_dump(mode="json")
    return obj


def dumps(obj: Any) -> bytes:
    return orjson.dumps(_plain(obj), option=JSON_OPTIONS)


def write_json(path: str | Path, obj: Any) -> Path:
    path = Path(path)
    path.write_bytes(dumps(obj) + b"\n")
    return path


def read_json(path: str | Path) -> Any:
    try:
        return orjson.loads(Path(path).read_bytes())
    except orjson.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def write_jsonl(path: str | Path, records: Iterable[Any]) -> Path:
    path = Path(path)
    with path.open("wb") as fh:
        for record in records:
            fh.write(orjson.dumps(_plain(record), option=orjson.OPT_SERIALIZE_NUMPY) + b"\n")
    return path


def file_digest(path: str | Path) -> str:
    """SHA-256 hex digest of a file."""
    digest = hashlib.sha256()
    with Path(path).open("rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_settings(path: Optional[str | Path]) -> RunSettings:
    """
    Read a TOML or JSON settings file; None gives the defaults.

    Raises:
        InputError: unknown suffix, unreadable file or invalid contents
    """
    if path is None:
        return RunSettings()
    path = Path(path)
    try:
        if path.suffix == ".toml":
            with path.open("rb") as fh:
                raw = tomllib.load(fh)
        elif path.suffix == ".json":
            raw = read_json(path)
        else:
            raise InputError(f"{path}: settings must be .toml or .json")
    except (OSError, tomllib.TOMLDecodeError) as exc:
        raise InputError(f"{path}: cannot read settings ({exc})") from exc
    try:
        return RunSettings.model_validate(raw)
    except ValidationError as exc:
        raise InputError(f"{path}: invalid settings\n{exc}") from exc


class ArtifactStore:
    """
    Output directory of one command run.

    Usage:
        store = ArtifactStore(out_dir, "fit", argv, config_echo, seed)
        store.record_input(data_path)
        store.write_json("fit.json", document)
        store.finish()
    """

    def __init__(
        self,
        out_dir: str | Path,
        command: str,
        argv: Optional[list[str]] = None,
        config: Optional[dict] = None,
        seed: Optional[int] = None,
    ) -> None:
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.manifest = RunManifest(
            command=command,
            argv=list(argv or []),
            config=config or {},
            seed=seed,
            started_at=datetime.now(timezone.utc),
        )

    @property
    def manifest_path(self) -> Path:
        return self.out_dir / MANIFEST_NAME

    def record_input(self, path: str | Path) -> None:
        self.manifest.inputs[str(path)] = file_digest(path)

    def path(self, name: str) -> Path:
        """Register an output file and return its path."""
        target = self.out_dir / name
        if str(target) not in self.manifest.outputs:
            self.manifest.outputs.append(str(target))
        return target

    def write_json(self, name: str, doc: Any) -> Path:
        payload = _plain(doc)
        if isinstance(payload, dict):
            payload = {**payload, "manifest": MANIFEST_NAME}
        return write_json(self.path(name), payload)

    def write_jsonl(self, name: str, records: Iterable[dict]) -> Path:
        return write_jsonl(self.path(name), ({**_plain(r), "manifest": MANIFEST_NAME} for r in records))

    def finish(self) -> Path:
        self.manifest.finished_at = datetime.now(timezone.utc)
        write_json(self.manifest_path, self.manifest)
        logger.info(f"[Artifacts] manifest={self.manifest_path} outputs={len(self.manifest.outputs)}")
        return self.manifest_path
