"""Operator frames, quasi-probabilities and their use in finite-dimensional quantum protocols."""
