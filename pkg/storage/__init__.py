"""Storage module for escapekit"""
from .artifact_store import ArtifactStore, CLASS_COLORS, read_manifest, read_ppm
from .models import (
    RunManifest,
    LedgerRow,
    BoundReport,
    ContractionCertificate,
    ExceptionalSet,
    CertificateReport
)

__all__ = [
    "ArtifactStore",
    "CLASS_COLORS",
    "read_manifest",
    "read_ppm",
    "RunManifest",
    "LedgerRow",
    "BoundReport",
    "ContractionCertificate",
    "ExceptionalSet",
    "CertificateReport"
]
