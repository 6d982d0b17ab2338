"""Planar anisotropic curvature flow and Finsler maximum-curvature inequalities."""
