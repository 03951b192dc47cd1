"""Exact capacity regions, packet-level schemes and secrecy audits for
butterfly-family two-unicast networks."""

__version__ = "0.1.0"
