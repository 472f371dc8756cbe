"""IPv4 helpers working on plain integers."""

from __future__ import annotations

import socket
from typing import NamedTuple

MAX_ADDR = 0xFFFFFFFF

_inet_pton, _AF_INET, _from_bytes = socket.inet_pton, socket.AF_INET, int.from_bytes


class Prefix(NamedTuple):
    """An IPv4 CIDR prefix as (network, length). Host bits are always zero."""

    network: int
    length: int

    @classmethod
    def parse(cls, text: str) -> "Prefix":
        addr, sep, length = text.strip().partition("/")
        if not sep:
            raise ValueError(f"not a CIDR prefix: {text!r}")
        n = int(length)
        if not 0 <= n <= 32:
            raise ValueError(f"prefix length out of range: {text!r}")
        network = parse_ip(addr)
        if network & ~mask(n) & MAX_ADDR:
            raise ValueError(f"host bits set in prefix: {text!r}")
        return cls(network, n)

    @property
    def first(self) -> int:
        return self.network

    @property
    def last(self) -> int:
        return self.network | (~mask(self.length) & MAX_ADDR)

    def contains(self, addr: int) -> bool:
        return (addr & mask(self.length)) == self.network

    def overlaps(self, other: "Prefix") -> bool:
        return self.first <= other.last and other.first <= self.last

    def __str__(self) -> str:
        return f"{format_ip(self.network)}/{self.length}"


def mask(length: int) -> int:
    return (MAX_ADDR << (32 - length)) & MAX_ADDR


def parse_ip(text: str) -> int:
    """Dotted quad to int. Rejects anything that is not exactly four octets."""
    try:
        return _from_bytes(_inet_pton(_AF_INET, text), "big")
    except (OSError, TypeError, ValueError):
        pass  # leading zeros and odd input take the slow path below
    parts = text.split(".")
    if len(parts) != 4:
        raise ValueError(f"not an IPv4 address: {text!r}")
    value = 0
    for part in parts:
        if not part.isdigit() or len(part) > 3:
            raise ValueError(f"not an IPv4 address: {text!r}")
        octet = int(part)
        if octet > 255:
            raise ValueError(f"not an IPv4 address: {text!r}")
        value = (value << 8) | octet
    return value


def format_ip(value: int) -> str:
    return f"{value >> 24 & 255}.{value >> 16 & 255}.{value >> 8 & 255}.{value & 255}"
