"""Jet groupoids, algebroid brackets and exponential flows."""
