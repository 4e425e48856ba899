"""Download the raw Adult / COMPAS files listed in ``manifest.json``.

Each file has a pinned SHA-256 and an ordered list of sources. A source is a
plain URL, or a zip archive (``member`` names the file inside it, and
``archive_sha256`` pins the archive itself). Sources are tried in order;
network failures fall through to the next one, but a checksum mismatch stops
the fetch so upstream drift is never ingested silently.
"""
from __future__ import annotations

import hashlib
import io
import json
import logging
import os
import urllib.error
import urllib.request
import zipfile
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .errors import ConfigError, DataError, FairAuditError

log = logging.getLogger(__name__)

TIMEOUT = 60


class ChecksumError(DataError):
    def __init__(self, what: str, expected: str, actual: str):
        super().__init__(f"checksum mismatch for {what}: expected sha256 {expected}, got {actual}")
        self.expected = expected
        self.actual = actual


class NetworkError(FairAuditError):
    pass


@dataclass(frozen=True)
class FetchOutcome:
    name: str
    path: Path
    status: str  # "already present" | "downloaded"


def load_manifest(path=None) -> dict:
    if path is None:
        text = resources.files("fairaudit").joinpath("manifest.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return json.loads(text)


def sha256_of(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _download(url: str) -> bytes:
    try:
        with urllib.request.urlopen(url, timeout=TIMEOUT) as resp:
            return resp.read()
    except (urllib.error.URLError, OSError) as exc:
        raise NetworkError(f"cannot download {url}: {exc}") from exc


def fetch(dataset: str, out_dir, manifest: dict | None = None) -> list[FetchOutcome]:
    """Make ``out_dir/<dataset>/`` hold every verified file of ``dataset``."""
    manifest = load_manifest() if manifest is None else manifest
    try:
        entry = manifest["datasets"][dataset]
    except KeyError:
        raise ConfigError(f"dataset {dataset!r} not in manifest; known: {sorted(manifest['datasets'])}") from None
    target_dir = Path(out_dir) / dataset
    archives: dict[str, bytes] = {}
    outcomes = []
    for spec in entry["files"]:
        target = target_dir / spec["name"]
        if target.exists() and sha256_file(target) == spec["sha256"]:
            log.info("%s already present", target)
            outcomes.append(FetchOutcome(spec["name"], target, "already present"))
            continue
        payload = _retrieve(spec, archives)
        actual = sha256_of(payload)
        if actual != spec["sha256"]:
            raise ChecksumError(spec["name"], spec["sha256"], actual)
        target_dir.mkdir(parents=True, exist_ok=True)
        tmp = target.with_suffix(target.suffix + ".part")
        tmp.write_bytes(payload)
        os.replace(tmp, target)
        outcomes.append(FetchOutcome(spec["name"], target, "downloaded"))
    return outcomes


def _retrieve(spec: dict, archives: dict[str, bytes]) -> bytes:
    failures = []
    for source in spec["sources"]:
        url = source["url"]
        try:
            if "member" not in source:
                return _download(url)
            if url not in archives:
                blob = _download(url)
                expected = source.get("archive_sha256")
                if expected and sha256_of(blob) != expected:
                    raise ChecksumError(url, expected, sha256_of(blob))
                archives[url] = blob
            with zipfile.ZipFile(io.BytesIO(archives[url])) as zf:
                return zf.read(source["member"])
        except NetworkError as exc:
            log.warning("%s", exc)
            failures.append(str(exc))
        except (zipfile.BadZipFile, KeyError) as exc:
            raise DataError(f"{url}: cannot extract {source['member']!r}: {exc}") from exc
    raise NetworkError(f"all sources failed for {spec['name']}: " + "; ".join(failures))
