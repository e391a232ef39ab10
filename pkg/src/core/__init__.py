"""Configuration, logging, errors and metrics shared by every command."""
