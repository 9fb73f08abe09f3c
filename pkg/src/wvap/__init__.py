"""Weak-value-amplified, post-selected quantum search on dense statevectors."""
