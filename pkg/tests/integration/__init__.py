"""Desk-scale acceptance runs on the default synthetic corpus."""
