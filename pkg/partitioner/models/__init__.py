"""Domain types and marshmallow schemas."""
