"""Integration tests for ctdne."""
