"""Centralized constants and numeric defaults for gradfit."""

# Version
VERSION = "0.2.0"

# Output schema
SCHEMA_TAG = "gradfit/v1"
FLOAT_FORMAT = "%.17g"

# Mesh text format
MESH_HEADER = "gradfit-mesh v1 dim=2"

# Geometry
GEOMETRY_TOL = 1e-12  # relative to h_K
AREA_TOL = 1e-14  # relative to h_K^2
COMPLETION_MIN_CAP = 1000  # bisections
COMPLETION_CAP_FACTOR = 100  # bisections per active element
COMPLETION_STRESS_BISECTIONS = 500

# Polynomial spaces
MIN_POLY_DEGREE = 1
MAX_POLY_DEGREE = 4

# Quadrature
MAX_TRIANGLE_RULE_DEGREE = 20
MAX_EDGE_RULE_DEGREE = 41
QUAD_DEGREE_MARGIN = 4  # volume rule degree = 2*ell + margin
COARSE_ELEMENT_DIAMETER = 0.2  # wider elements use the highest triangle rule
SINGULAR_MAX_LEVELS = 30
SINGULAR_RTOL = 1e-9
BARYCENTRIC_MERGE_DECIMALS = 14

# Conjugate gradients
CG_TOL = 1e-12
CG_MAX_ITER_FACTOR = 10  # iterations per unknown
CG_MIN_ITER = 200

# Error functionals
MEAN_MATCH_RTOL = 1e-10
ZERO_MEAN_RTOL = 1e-10
ENERGY_IDENTITY_RTOL = 1e-7
MEMBER_TOL = 1e-12  # relative to |v|_1 when classifying 0/0 ratios

# Target function checks
GRADIENT_CHECK_POINTS = 16
GRADIENT_CHECK_STEP = 1e-6  # relative to domain diameter
GRADIENT_CHECK_RTOL = 1e-5

# Tree approximation
TREE_DEPTH_CAP = 40
SIGMA_PRIME_MAX_BISECTIONS = 12
SIGMA_PRIME_ENUMERATE_LIMIT = 6  # above this the dynamic program is used

# Builtin meshes
MESH_UNIT_SQUARE = "unit-square"
MESH_L_SHAPE = "l-shape"
BUILTIN_MESHES = (MESH_UNIT_SQUARE, MESH_L_SHAPE)

# Boundary conditions
BC_DIRICHLET0 = "dirichlet0"
BC_NEUMANN = "neumann"

# CLI exit codes
EXIT_CONFIG_ERROR = 2
EXIT_NUMERICAL_FAILURE = 3

# Configuration sources
CONFIG_FILENAME = ".gradfit.json"
ENV_CG_TOL = "GRADFIT_CG_TOL"
ENV_QUAD_MARGIN = "GRADFIT_QUAD_MARGIN"
ENV_LOG_LEVEL = "GRADFIT_LOG_LEVEL"
