__version__ = "0.2.0"

from .config_and_audit import (
    GptransConfig,
    evaluate_transform,
    integrate_expression,
    list_identities,
    verify_identity,
    audit_identities,
    export_report,
    delete_pkl_cache,
    cores_from_fraction,
)

__all__ = [
    "__version__",
    "GptransConfig",
    "evaluate_transform",
    "integrate_expression",
    "list_identities",
    "verify_identity",
    "audit_identities",
    "export_report",
    "delete_pkl_cache",
    "cores_from_fraction",
    "number_crunchers",
]
