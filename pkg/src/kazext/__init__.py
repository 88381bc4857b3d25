"""Kazhdan constants and spectral gaps of finite group extensions."""

__version__ = "0.1.0"
