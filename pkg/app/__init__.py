"""
Hybrid analog/digital precoding for single-group multicasting
"""
__version__ = "1.0.0"
