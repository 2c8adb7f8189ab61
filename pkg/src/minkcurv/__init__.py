"""Birkhoff-Gauss maps and Minkowski curvatures of surfaces in normed 3-space."""
