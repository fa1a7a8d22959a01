# mm/core/constants.py
from typing import NamedTuple

# Facts file schema versions this build can read and write
FACTS_SCHEMA_VERSION = "1"
SUPPORTED_SCHEMA_VERSIONS = frozenset({FACTS_SCHEMA_VERSION})

# Report schema version (analyze/suggest JSON bodies)
REPORT_SCHEMA_VERSION = "1"

# Significant digits for floats in canonical JSON
FLOAT_SIGNIFICANT_DIGITS = 12

# Process exit codes
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_PARSE_ERROR = 2
EXIT_VALIDATION_ERROR = 3
EXIT_IO_ERROR = 4
EXIT_USAGE_ERROR = 64

CONFIG_FILE_NAME = ".modmetrics.json"

BENCH_CSV_COLUMNS = ("m", "c", "n_total", "engine", "workers", "wall_seconds", "speedup")


class ReferenceSystem(NamedTuple):
    name: str
    classes: int
    attributes: int
    methods: int
    values_millions: float  # expected #values in millions, one decimal


# Sizes of the thirteen analysed open-source systems. Used by --preset and by
# the workload-count acceptance checks.
REFERENCE_SYSTEMS = (
    ReferenceSystem("junit", 231, 265, 1_200, 1.2),  # as published; the count rounds to 1.3
    ReferenceSystem("jhotdraw", 600, 1_151, 4_814, 17.4),
    ReferenceSystem("javastyle", 600, 1_423, 6_816, 31.4),
    ReferenceSystem("hammurapi", 986, 2_595, 7_705, 44.9),
    ReferenceSystem("dependometer", 907, 2_932, 7_858, 45.1),
    ReferenceSystem("mapperxml", 1_146, 2_726, 8_074, 51.1),
    ReferenceSystem("jedit", 1_267, 3_804, 9_629, 70.8),
    ReferenceSystem("commons-math", 1_930, 4_196, 13_676, 146.3),
    ReferenceSystem("weka", 2_138, 9_194, 22_028, 336.8),
    ReferenceSystem("jrefactory", 2_775, 6_053, 23_639, 410.6),
    ReferenceSystem("derby", 3_191, 13_900, 44_394, 1_268.8),
    ReferenceSystem("libomv", 7_134, 14_211, 43_593, 1_572.2),
    ReferenceSystem("projectlibre", 6_399, 28_444, 69_751, 3_325.4),
)

REFERENCE_SYSTEMS_BY_NAME = {s.name: s for s in REFERENCE_SYSTEMS}
