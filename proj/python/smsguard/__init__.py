"""Short-text spam detection toolkit (python bindings).

The compiled extension normally lives next to this package. During
development the build tree can be pointed at via SMSGUARD_MODULE_DIR.
"""

import importlib
import importlib.util
import os
import sys

try:
    from . import _core  # installed layout
except ImportError:  # development layout: extension in the cmake build tree
    _module_dir = os.environ.get("SMSGUARD_MODULE_DIR")
    if not _module_dir:
        raise
    if _module_dir not in sys.path:
        sys.path.insert(0, _module_dir)
    _core = importlib.import_module("_core")

Engine = _core.Engine
DataError = _core.DataError
SchemaError = _core.SchemaError
mela_schema = _core.mela_schema
mpa_schema = _core.mpa_schema
recipient_entropy = _core.recipient_entropy

__all__ = [
    "Engine",
    "DataError",
    "SchemaError",
    "mela_schema",
    "mpa_schema",
    "recipient_entropy",
]
