"""Time-fractional Airy equation on the line, solved by potentials."""
