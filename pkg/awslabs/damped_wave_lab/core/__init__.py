"""Problem data, exponents, solvers and post-processing."""
