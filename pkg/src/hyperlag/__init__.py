"""
hyperlag - cell-centered Lagrangian finite volumes for hyperelastic solids on
unstructured triangular meshes.
"""

__version__ = "0.1.0"
