"""Graphs, BFS trees, replacement paths and the brute-force oracles."""
