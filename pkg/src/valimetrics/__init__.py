"""valimetrics: full-reference image quality metrics, ML performance
agreement scoring, and correlation analysis for modified image corpora."""

__version__ = "0.1.0"
