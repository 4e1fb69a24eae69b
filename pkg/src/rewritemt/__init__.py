"""Batch harness for improving machine translation by rewriting inputs."""

__version__ = "0.1.0"
