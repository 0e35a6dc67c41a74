# Algorithmic Pirogov-Sinai toolkit: cluster expansions, contour models, samplers
__version__ = "0.1.0"
