"""Download collector RIB snapshots into a content-addressed cache.

URL templates carry ``{YYYY}``, ``{MM}`` and ``{DD}`` placeholders. A fetched
file is stored as ``<cache>/<sha256>`` and ``<cache>/index.json`` maps each
URL to its digest, so repeated runs never download twice and the manifest
can record exactly which bytes were analysed.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import shutil
import tempfile
import urllib.request
from datetime import date
from pathlib import Path

log = logging.getLogger(__name__)

DEFAULT_TEMPLATES = {
    "rrc00": "https://data.ris.ripe.net/rrc00/{YYYY}.{MM}/bview.{YYYY}{MM}{DD}.0000.gz",
    "route-views2": "https://archive.routeviews.org/bgpdata/{YYYY}.{MM}/RIBS/rib.{YYYY}{MM}{DD}.0000.bz2",
}


class FetchError(RuntimeError):
    pass


def expand(template: str, day: date) -> str:
    return (
        template.replace("{YYYY}", f"{day.year:04d}")
        .replace("{MM}", f"{day.month:02d}")
        .replace("{DD}", f"{day.day:02d}")
    )


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


class Cache:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._index_path = self.root / "index.json"

    def _index(self) -> dict[str, str]:
        if self._index_path.exists():
            return json.loads(self._index_path.read_text())
        return {}

    def lookup(self, url: str) -> Path | None:
        digest = self._index().get(url)
        if digest and (self.root / digest).exists():
            return self.root / digest
        return None

    def store(self, url: str, tmp: Path) -> Path:
        digest = sha256_file(tmp)
        dest = self.root / digest
        if dest.exists():
            tmp.unlink()
        else:
            os.replace(tmp, dest)
        index = self._index()
        index[url] = digest
        self._index_path.write_text(json.dumps(index, indent=2, sort_keys=True) + "\n")
        return dest


def fetch(url: str, cache: Cache, timeout: float = 120.0) -> Path:
    """Return the cached path for ``url``, downloading it on a cache miss."""
    hit = cache.lookup(url)
    if hit is not None:
        log.info("cache hit %s", url)
        return hit
    log.info("downloading %s", url)
    fd, name = tempfile.mkstemp(dir=cache.root, suffix=".part")
    tmp = Path(name)
    try:
        with os.fdopen(fd, "wb") as out, urllib.request.urlopen(url, timeout=timeout) as resp:
            shutil.copyfileobj(resp, out, 1 << 20)
    except (OSError, ValueError) as exc:
        tmp.unlink(missing_ok=True)
        raise FetchError(f"{url}: {exc}") from exc
    return cache.store(url, tmp)


def fetch_ribs(
    day: date, cache: Cache, templates: dict[str, str] | None = None
) -> list[tuple[str, Path]]:
    """Fetch one snapshot per collector; returns ``[(collector, path), ...]``."""
    templates = templates or DEFAULT_TEMPLATES
    return [(name, fetch(expand(tpl, day), cache)) for name, tpl in sorted(templates.items())]
