"""Scoring sidecar: neural QE/reference metrics behind POST /v1/score."""

__version__ = "0.1.0"
