"""
regscope: registry and filesystem artifact triage for malware samples.

Sandbox reports are reduced to 47-bit vectors recording which catalogued
registry/filesystem locations a sample touched; small from-scratch
classifiers then map those vectors to cleanware or a malware family.
"""

from .caro import CaroName, coarse_class, parse_caro
from .catalog import Catalog, builtin_catalog, build_feature_vector, match_event
from .dataset import Class, ClassSet, Dataset, LabeledSample, load_dataset, save_dataset
from .errors import RegscopeError
from .ingest import extract_report, load_report, report_to_sample
from .paths import ArtifactPath, PathKind, normalize, parse_path

__version__ = "0.1.0"
