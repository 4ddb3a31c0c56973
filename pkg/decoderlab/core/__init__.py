"""Core protocols, exceptions, registries and configuration."""
