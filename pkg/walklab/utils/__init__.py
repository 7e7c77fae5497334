"""Output and random-number helpers."""
