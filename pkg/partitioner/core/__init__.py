"""Configuration, errors, run manifests and shared helpers."""
