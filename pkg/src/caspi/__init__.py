"""Batch-RL dialogue policy learning with pairwise causal reward learning."""

import os


def _pin_blas_threads():
    # The workload is many small matmuls; oversubscribed BLAS pools thrash
    # badly on small hosts. Respect an explicit user override.
    if os.environ.get("CASPI_BLAS_THREADS") == "0":
        return
    limit = int(os.environ.get("CASPI_BLAS_THREADS", "1"))
    try:
        import threadpoolctl

        threadpoolctl.threadpool_limits(limit, user_api="blas")
    except ImportError:
        for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, str(limit))


_pin_blas_threads()

__version__ = "0.1.0"
