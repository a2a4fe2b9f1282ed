#!/usr/bin/env python3
"""
Continuous-time dynamic network embeddings
"""

__version__ = "0.1.0"
