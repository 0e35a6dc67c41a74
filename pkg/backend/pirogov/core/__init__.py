"""
Core package for pirogov.

This package contains configuration, the exception hierarchy, logging
setup, the ordered thread-pool map and seeded random streams.
"""
