"""Detected jump-error correcting quantum codes and their open-system dynamics."""

__version__ = "0.1.0"
