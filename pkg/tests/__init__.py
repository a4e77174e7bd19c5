"""Test suite for segment_plus."""
