"""Reference consumer for `.ctsg` graph archives and `manifest.csv` files."""

__version__ = "0.1.0"
