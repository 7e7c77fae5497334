"""Typed data for paths, chains, limits and reports."""
