"""Special-purpose IPv4 blocks treated as bogons, and address classification.

The default table holds eight RFC categories and twelve CIDR blocks. Three
further blocks are excluded on purpose (they are expected to show up in
normal operation) and are kept in an explicit exclusion set so reports can
tell "excluded" apart from "public".

A registry may be extended or overridden from a TOML file::

    [classes.RFC1918]
    description = "Private-Use"
    blocks = ["10.0.0.0/8", "172.16.0.0/12", "192.168.0.0/16"]

    [classes.RFC2544]            # new labels are allowed for research variants
    description = "Benchmarking"
    blocks = ["198.18.0.0/15"]   # must stay disjoint from every other block

    [exclusions]
    blocks = ["0.0.0.0/8", "192.31.196.0/24", "192.175.48.0/24"]

A ``[classes.X]`` table replaces class X entirely; setting ``blocks = []``
removes it.
"""

from __future__ import annotations

import bisect
import re
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from .addr import Prefix

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

RFC1112 = "RFC1112"
RFC1122 = "RFC1122"
RFC1918 = "RFC1918"
RFC3927 = "RFC3927"
RFC5737 = "RFC5737"
RFC6598 = "RFC6598"
RFC6890 = "RFC6890"
RFC7526 = "RFC7526"


@dataclass(frozen=True)
class BogonClass:
    rfc_label: str
    description: str
    blocks: tuple[Prefix, ...]

    @property
    def rfc_number(self) -> int:
        m = re.search(r"\d+", self.rfc_label)
        return int(m.group()) if m else 0


DEFAULT_CLASSES: tuple[BogonClass, ...] = tuple(
    BogonClass(label, desc, tuple(Prefix.parse(b) for b in blocks))
    for label, desc, blocks in [
        (RFC1112, "Former Class E", ["240.0.0.0/4"]),
        (RFC1122, "Loopback", ["127.0.0.0/8"]),
        (RFC1918, "Private-Use", ["10.0.0.0/8", "172.16.0.0/12", "192.168.0.0/16"]),
        (RFC3927, "Link-Local", ["169.254.0.0/16"]),
        (RFC5737, "Documentation", ["192.0.2.0/24", "198.51.100.0/24", "203.0.113.0/24"]),
        (RFC6598, "Shared Address Space", ["100.64.0.0/10"]),
        (RFC6890, "Protocol Assignments", ["192.0.0.0/24"]),
        (RFC7526, "6to4 Relay Anycast", ["192.88.99.0/24"]),
    ]
)

DEFAULT_EXCLUSIONS: tuple[Prefix, ...] = tuple(
    Prefix.parse(b) for b in ("0.0.0.0/8", "192.31.196.0/24", "192.175.48.0/24")
)


class RegistryError(ValueError):
    pass


class BogonRegistry:
    """Immutable classifier over a set of pairwise disjoint bogon blocks.

    Lookups bisect a sorted list of block start addresses, so the cost does
    not depend on the number of classes.
    """

    def __init__(
        self,
        classes: Iterable[BogonClass] = DEFAULT_CLASSES,
        exclusions: Iterable[Prefix] = DEFAULT_EXCLUSIONS,
    ):
        self._classes = tuple(sorted(classes, key=lambda c: (c.rfc_number, c.rfc_label)))
        self._by_label = {c.rfc_label: c for c in self._classes}
        if len(self._by_label) != len(self._classes):
            raise RegistryError("duplicate class label")
        self.exclusions = tuple(sorted(exclusions))

        spans = sorted(
            (block.first, block.last, c.rfc_label) for c in self._classes for block in c.blocks
        )
        for (_, last, a), (first, _, b) in zip(spans, spans[1:]):
            if first <= last:
                raise RegistryError(f"overlapping bogon blocks in {a} and {b}")
        for ex in self.exclusions:
            for first, last, label in spans:
                if ex.first <= last and first <= ex.last:
                    raise RegistryError(f"exclusion {ex} overlaps {label}")
        self._starts = [s[0] for s in spans]
        self._ends = [s[1] for s in spans]
        self._labels = [s[2] for s in spans]

    @classmethod
    def from_toml(cls, path: str | Path, base: "BogonRegistry | None" = None) -> "BogonRegistry":
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
        base = base or cls()
        classes = {c.rfc_label: c for c in base.all_classes()}
        for label, body in doc.get("classes", {}).items():
            blocks = tuple(Prefix.parse(b) for b in body.get("blocks", []))
            if not blocks:
                classes.pop(label, None)
                continue
            desc = body.get("description", classes[label].description if label in classes else label)
            classes[label] = BogonClass(label, desc, blocks)
        exclusions = base.exclusions
        if "exclusions" in doc:
            exclusions = tuple(Prefix.parse(b) for b in doc["exclusions"].get("blocks", []))
        return cls(classes.values(), exclusions)

    def classify(self, addr: int) -> str | None:
        """Return the label of the class whose block contains ``addr``, else None."""
        i = bisect.bisect_right(self._starts, addr) - 1
        if i >= 0 and addr <= self._ends[i]:
            return self._labels[i]
        return None

    def is_excluded(self, addr: int) -> bool:
        return any(ex.contains(addr) for ex in self.exclusions)

    def all_classes(self) -> list[BogonClass]:
        return list(self._classes)

    def labels(self) -> list[str]:
        return [c.rfc_label for c in self._classes]

    def get(self, label: str) -> BogonClass:
        return self._by_label[label]

    def blocks(self) -> list[tuple[Prefix, str]]:
        """All (block, label) pairs in address order."""
        return sorted((block, c.rfc_label) for c in self._classes for block in c.blocks)

    def spans(self) -> list[tuple[int, int, str]]:
        return list(zip(self._starts, self._ends, self._labels))

    def overlaps_any(self, prefix: Prefix) -> bool:
        i = bisect.bisect_right(self._starts, prefix.last) - 1
        return i >= 0 and self._ends[i] >= prefix.first

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BogonRegistry):
            return NotImplemented
        return self._classes == other._classes and self.exclusions == other.exclusions

    def __hash__(self) -> int:
        return hash((self._classes, self.exclusions))

    def __repr__(self) -> str:
        n = sum(len(c.blocks) for c in self._classes)
        return f"BogonRegistry({len(self._classes)} classes, {n} blocks)"


DEFAULT_REGISTRY = BogonRegistry()


def classify(addr: int) -> str | None:
    return DEFAULT_REGISTRY.classify(addr)


def all_classes() -> list[BogonClass]:
    return DEFAULT_REGISTRY.all_classes()
