"""Strict recognizer for DER encoded certificates.

The package checks that an input is exactly a well formed certificate:
every length agrees with its content, every field matches the grammar
for its position, and the certificate-specific side conditions (unique
extensions, version gating, usage rules) hold.  Every deviation is
reported as a typed diagnostic with a severity class, and acceptance is
simply the absence of rejecting diagnostics.
"""

from .der import (
    CONTENT_MAX,
    MAX_DEPTH,
    NestingStack,
    TlvNode,
    decode_length,
    delta_length,
    parse_tlv_tree,
    recognize_toy,
    toy_delta,
)
from .diagnostics import (
    Category,
    Code,
    Diagnostic,
    Histogram,
    RecognitionError,
    Severity,
    UnmappedMessage,
    aggregate,
    classify_external_message,
    diag,
    label_of,
    rejects,
    severity_of,
)
from .differential import (
    AnalysisResult,
    ChainOutcomeRecord,
    ChainVerdict,
    CrossTab,
    MissingCaRecord,
    analyze,
    classify_differential,
    cross_tabulate,
    parent_chain_id,
    read_records,
)
from .grammar import (
    AlgorithmId,
    ParsedCertificate,
    ParsedTbs,
    SpkiInfo,
    ValidityInfo,
    parse_algorithm_identifier,
    parse_certificate,
)
from .ingest import (
    BatchResult,
    CertificateReport,
    InputDocument,
    LintOptions,
    lint,
    lint_bytes,
    load_documents,
    load_input,
    run_batch,
)
from .registry import Registry, default_registry, load_registry, parse_registry

__version__ = "0.1.0"

__all__ = [
    "AlgorithmId",
    "AnalysisResult",
    "BatchResult",
    "Category",
    "CertificateReport",
    "ChainOutcomeRecord",
    "ChainVerdict",
    "Code",
    "CONTENT_MAX",
    "CrossTab",
    "Diagnostic",
    "Histogram",
    "InputDocument",
    "LintOptions",
    "MAX_DEPTH",
    "MissingCaRecord",
    "NestingStack",
    "ParsedCertificate",
    "ParsedTbs",
    "RecognitionError",
    "Registry",
    "Severity",
    "SpkiInfo",
    "TlvNode",
    "UnmappedMessage",
    "ValidityInfo",
    "aggregate",
    "analyze",
    "classify_differential",
    "classify_external_message",
    "cross_tabulate",
    "decode_length",
    "default_registry",
    "delta_length",
    "diag",
    "label_of",
    "lint",
    "lint_bytes",
    "load_documents",
    "load_input",
    "load_registry",
    "parent_chain_id",
    "parse_algorithm_identifier",
    "parse_certificate",
    "parse_registry",
    "parse_tlv_tree",
    "read_records",
    "recognize_toy",
    "rejects",
    "run_batch",
    "severity_of",
    "toy_delta",
]
