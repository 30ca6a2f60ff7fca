"""Pseudospectral laboratory for damped waves with a Riesz-potential power nonlinearity."""

from importlib.metadata import PackageNotFoundError, version

try:
    __version__ = version("artifact")
except PackageNotFoundError:  # running from a source tree
    __version__ = "0.1.0"
