#!/usr/bin/env python3
"""
Utility modules for ctdne
"""
