"""Tests for the text synopsis generator."""
