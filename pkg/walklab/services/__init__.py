"""Domain services, one per module, each exported as a singleton."""
