"""
gradfit - local and global best approximation of gradients on
newest-vertex-bisection meshes.
"""

from gradfit.constants import VERSION

__version__ = VERSION
