"""Laplace spectra of surfaces with small handles and cross caps attached."""
