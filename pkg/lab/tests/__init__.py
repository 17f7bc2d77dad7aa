"""Tests for the laboratory package."""
