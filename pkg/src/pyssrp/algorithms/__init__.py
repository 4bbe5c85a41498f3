"""The recursive single-source replacement-paths solver."""
