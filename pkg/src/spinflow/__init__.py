"""Transversal Killing spinors on Riemannian flows: frames, spinor connections, solvers and checks."""
