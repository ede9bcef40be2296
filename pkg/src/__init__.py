"""
Causal land suitability: panel ingest, practice metrics, DML and causal forests
"""

__version__ = "1.0.0"
