try:
    from ._seedgen import (
        assemble_pdf,
        evaluate,
        extract_objects,
        fnv1a64,
        is_well_formed,
        pct_delta,
        run_pipeline,
        run_toy_target,
    )
except ImportError:  # extension built out of tree (plain cmake build)
    from _seedgen import (
        assemble_pdf,
        evaluate,
        extract_objects,
        fnv1a64,
        is_well_formed,
        pct_delta,
        run_pipeline,
        run_toy_target,
    )

__all__ = [
    "assemble_pdf",
    "evaluate",
    "extract_objects",
    "fnv1a64",
    "is_well_formed",
    "pct_delta",
    "run_pipeline",
    "run_toy_target",
]
