"""Betti numbers of GIT quotients of hypersurfaces via Kirwan's method, in exact arithmetic."""

__version__ = "0.1.0"
