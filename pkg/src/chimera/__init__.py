"""Monolith-to-microservices partitioning toolkit.

Pipeline: static facts JSON -> heterogeneous attributed graph -> community
aware graph autoencoder with seed-constrained joint clustering -> partition
recommendation plus quality metrics. Operable as a library, a CLI, and an
HTTP service.
"""

__version__ = "0.1.0"
