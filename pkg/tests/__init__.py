"""Test initialization file."""
