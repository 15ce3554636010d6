"""Multicast probe routing and sequential loss localisation for OpenFlow-style networks."""

__version__ = "0.1.0"
