"""Monomialization of first integrals for monomial singular distributions."""
from .foliation import ChartFrame, LocalModel, MonomialDistribution, recenter
from .invariant import decompose, tangency_order_chain, tangency_order_scan, zero_one_normal_form
from .linalg import ExpMatrix
from .series import Series

__all__ = ["ChartFrame", "LocalModel", "MonomialDistribution", "recenter", "decompose",
           "tangency_order_chain", "tangency_order_scan", "zero_one_normal_form",
           "ExpMatrix", "Series"]
