"""Test suite for FashionImport AI Bot."""
