"""Detect Autonomous Systems that transit packets with bogon source addresses.

Traceroute corpora are joined against BGP RIB snapshots; every hop is mapped
to its origin AS, the AS path is cleaned, and the ASes forwarding bogon-sourced
ICMP replies across their border are reported in three attribution cases
(BA, BB, BC).
"""

__version__ = "0.1.0"
