"""Streaming reader for MRT TABLE_DUMP_V2 RIB snapshots (RFC 6396).

Only PEER_INDEX_TABLE and RIB_IPV4_UNICAST records are decoded. Every other
TABLE_DUMP_V2 subtype and every other known MRT type is skipped and counted.
A record type that RFC 6396 does not define at all is a parse error.
"""

from __future__ import annotations

import bz2
import gzip
import io
import struct
import zlib
from collections import Counter
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import BinaryIO, Iterator

from .addr import Prefix, mask

HEADER = struct.Struct("!IHHI")

TABLE_DUMP = 12
TABLE_DUMP_V2 = 13
# RFC 6396 types, including the deprecated 0-10 range.
KNOWN_TYPES = frozenset(range(0, 11)) | {11, 12, 13, 16, 17, 32, 33, 48, 49}

PEER_INDEX_TABLE = 1
RIB_IPV4_UNICAST = 2

ATTR_AS_PATH = 2
AS_SET, AS_SEQUENCE, AS_CONFED_SEQUENCE, AS_CONFED_SET = 1, 2, 3, 4

GZIP_MAGIC = b"\x1f\x8b"
BZ2_MAGIC = b"BZh"


class MrtParseError(ValueError):
    def __init__(self, offset: int, message: str):
        super().__init__(f"offset {offset}: {message}")
        self.offset = offset
        self.message = message


@dataclass
class MrtStats:
    records: int = 0
    rib_records: int = 0
    rib_entries: int = 0
    no_origin: int = 0
    skipped_types: Counter = field(default_factory=Counter)
    skipped_subtypes: Counter = field(default_factory=Counter)


@dataclass(frozen=True)
class Peer:
    bgp_id: bytes
    address: bytes
    asn: int


def open_stream(source: str | Path | bytes | BinaryIO) -> BinaryIO:
    """Open a path, bytes or binary stream, undoing gzip/bzip2 if present."""
    if isinstance(source, (bytes, bytearray)):
        raw: BinaryIO = io.BytesIO(source)
    elif isinstance(source, (str, Path)):
        raw = open(source, "rb")
    else:
        raw = source
    if not hasattr(raw, "peek"):
        raw = io.BufferedReader(raw)  # type: ignore[arg-type]
    head = raw.peek(3)[:3]  # type: ignore[attr-defined]
    if head.startswith(GZIP_MAGIC):
        return gzip.GzipFile(fileobj=raw)  # type: ignore[return-value]
    if head.startswith(BZ2_MAGIC):
        return bz2.BZ2File(raw)  # type: ignore[return-value]
    return raw


class MrtReader:
    """Iterate ``(prefix, origins)`` pairs from one MRT RIB dump.

    ``origins`` is the union, over the RIB entries of that prefix, of the
    terminal element of each AS_PATH. An AS_SET terminal contributes all its
    members. Prefixes whose entries carry no usable AS_PATH are counted in
    ``stats.no_origin`` and not yielded.
    """

    def __init__(self, source: str | Path | bytes | BinaryIO, name: str = ""):
        self._fh = open_stream(source)
        self._owns = isinstance(source, (str, Path))
        self.name = name or (str(source) if isinstance(source, (str, Path)) else "")
        self.stats = MrtStats()
        self.peers: list[Peer] = []
        self.collector_id: bytes = b""
        self.view_name = ""
        self.snapshot_time: datetime | None = None
        self._offset = 0
        self._have_peer_index = False

    def _read(self, n: int, start: int) -> bytes:
        try:
            return self._fh.read(n)
        except (EOFError, OSError, zlib.error) as exc:
            raise MrtParseError(start, f"corrupt compressed stream: {exc}") from None

    def __iter__(self) -> Iterator[tuple[Prefix, frozenset[int]]]:
        try:
            yield from self._records()
        finally:
            if self._owns:
                self._fh.close()

    def _records(self) -> Iterator[tuple[Prefix, frozenset[int]]]:
        read = self._read
        while True:
            start = self._offset
            head = read(HEADER.size, start)
            if not head:
                return
            if len(head) < HEADER.size:
                raise MrtParseError(start, "truncated MRT common header")
            ts, mtype, subtype, length = HEADER.unpack(head)
            body = read(length, start)
            if len(body) < length:
                raise MrtParseError(
                    start, f"truncated record: header says {length} bytes, {len(body)} present"
                )
            self._offset = start + HEADER.size + length
            self.stats.records += 1

            if mtype not in KNOWN_TYPES:
                raise MrtParseError(start, f"unknown MRT record type {mtype}")
            if mtype != TABLE_DUMP_V2:
                self.stats.skipped_types[mtype] += 1
                continue
            body_offset = start + HEADER.size
            if subtype == PEER_INDEX_TABLE:
                self._parse_peer_index(body, body_offset)
                if self.snapshot_time is None:
                    self.snapshot_time = datetime.fromtimestamp(ts, tz=timezone.utc)
            elif subtype == RIB_IPV4_UNICAST:
                if not self._have_peer_index:
                    raise MrtParseError(start, "RIB record before PEER_INDEX_TABLE")
                item = self._parse_rib(body, body_offset)
                if item is not None:
                    yield item
            else:
                self.stats.skipped_subtypes[subtype] += 1

    def _parse_peer_index(self, body: bytes, base: int) -> None:
        try:
            self.collector_id = body[0:4]
            (name_len,) = struct.unpack_from("!H", body, 4)
            pos = 6 + name_len
            self.view_name = body[6:pos].decode("utf-8", "replace")
            (count,) = struct.unpack_from("!H", body, pos)
            pos += 2
            peers = []
            for _ in range(count):
                ptype = body[pos]
                bgp_id = body[pos + 1 : pos + 5]
                pos += 5
                alen = 16 if ptype & 0x01 else 4
                address = body[pos : pos + alen]
                pos += alen
                if ptype & 0x02:
                    (asn,) = struct.unpack_from("!I", body, pos)
                    pos += 4
                else:
                    (asn,) = struct.unpack_from("!H", body, pos)
                    pos += 2
                if len(address) != alen:
                    raise IndexError
                peers.append(Peer(bgp_id, address, asn))
        except (struct.error, IndexError):
            raise MrtParseError(base, "malformed PEER_INDEX_TABLE") from None
        if pos != len(body):
            raise MrtParseError(base + pos, "trailing bytes in PEER_INDEX_TABLE")
        self.peers = peers
        self._have_peer_index = True

    def _parse_rib(self, body: bytes, base: int) -> tuple[Prefix, frozenset[int]] | None:
        self.stats.rib_records += 1
        pos = 0
        try:
            plen = body[4]
            if plen > 32:
                raise MrtParseError(base + 4, f"IPv4 prefix length {plen}")
            nbytes = (plen + 7) // 8
            raw = body[5 : 5 + nbytes]
            if len(raw) != nbytes:
                raise IndexError
            network = int.from_bytes(raw.ljust(4, b"\0"), "big") & mask(plen)
            pos = 5 + nbytes
            (count,) = struct.unpack_from("!H", body, pos)
            pos += 2
            origins: set[int] = set()
            for _ in range(count):
                peer_index, _, attr_len = struct.unpack_from("!HIH", body, pos)
                pos += 8
                if peer_index >= len(self.peers):
                    raise MrtParseError(base + pos - 8, f"peer index {peer_index} out of range")
                end = pos + attr_len
                if end > len(body):
                    raise MrtParseError(base + pos - 2, "attribute block overruns record")
                origins |= _origins_from_attributes(body, pos, end, base)
                pos = end
                self.stats.rib_entries += 1
        except (struct.error, IndexError):
            raise MrtParseError(base + pos, "truncated RIB_IPV4_UNICAST entry") from None
        if pos != len(body):
            raise MrtParseError(base + pos, "trailing bytes in RIB_IPV4_UNICAST record")
        origins.discard(0)
        if not origins:
            self.stats.no_origin += 1
            return None
        return Prefix(network, plen), frozenset(origins)


def _origins_from_attributes(buf: bytes, pos: int, end: int, base: int) -> set[int]:
    while pos < end:
        if pos + 3 > end:
            raise MrtParseError(base + pos, "truncated path attribute header")
        flags, atype = buf[pos], buf[pos + 1]
        if flags & 0x10:
            if pos + 4 > end:
                raise MrtParseError(base + pos, "truncated path attribute header")
            (alen,) = struct.unpack_from("!H", buf, pos + 2)
            pos += 4
        else:
            alen = buf[pos + 2]
            pos += 3
        if pos + alen > end:
            raise MrtParseError(base + pos, f"path attribute {atype} overruns entry")
        if atype == ATTR_AS_PATH:
            return _terminal_origins(buf, pos, pos + alen, base)
        pos += alen
    return set()


def _terminal_origins(buf: bytes, pos: int, end: int, base: int) -> set[int]:
    # TABLE_DUMP_V2 always encodes AS_PATH with 4-byte ASNs (RFC 6396 4.3.4).
    last: tuple[int, tuple[int, ...]] | None = None
    while pos < end:
        if pos + 2 > end:
            raise MrtParseError(base + pos, "truncated AS_PATH segment header")
        stype, count = buf[pos], buf[pos + 1]
        pos += 2
        seg_end = pos + 4 * count
        if seg_end > end:
            raise MrtParseError(base + pos, "AS_PATH segment overruns attribute")
        if stype not in (AS_SET, AS_SEQUENCE, AS_CONFED_SEQUENCE, AS_CONFED_SET):
            raise MrtParseError(base + pos - 2, f"unknown AS_PATH segment type {stype}")
        if stype in (AS_SET, AS_SEQUENCE) and count:
            last = (stype, struct.unpack_from(f"!{count}I", buf, pos))
        pos = seg_end
    if last is None:
        return set()
    stype, asns = last
    return set(asns) if stype == AS_SET else {asns[-1]}


def parse_mrt(source: str | Path | bytes | BinaryIO) -> Iterator[tuple[Prefix, frozenset[int]]]:
    return iter(MrtReader(source))
