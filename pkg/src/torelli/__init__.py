"""Canonical curves from Riemann matrices via theta constants."""
from .dubrovin import RecoveryResult, build_table, recover_quartics
from .fixtures import TauFile, bundled, load_tau_file
from .poly import HomogeneousPoly
from .theta import RiemannMatrix, theta

__all__ = ["HomogeneousPoly", "RecoveryResult", "RiemannMatrix", "TauFile", "build_table", "bundled",
           "load_tau_file", "recover_quartics", "theta"]
