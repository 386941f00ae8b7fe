"""Polynomial ramification portraits: validation, classification,
finite-subdivision-rule realization, and obstructed-map constructions."""

from .classify import Classification, classify
from .enumeration import enumerate_polynomial_portraits
from .errors import PortraitForgeError
from .planarmap import (CombinatorialMap, InsertArc, InsertSticker, SplitEdge,
                        dual, scan_faces, surgery, validate_map)
from .portrait import (BranchData, CycleReport, Portrait, ValidationReport,
                       analyze_cycles, branch_data, canonical_form,
                       canonical_relabel, is_isomorphic, validate)

__version__ = "0.1.0"
