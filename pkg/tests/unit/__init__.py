"""Unit tests for ctdne."""
