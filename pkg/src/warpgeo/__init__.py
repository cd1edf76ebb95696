"""Warped product metrics on S^2 x S^1: curvature, volume, distance and
distributional curvature computations.

Submodules: profiles, metric_core, examples, quadrature_geometry,
geodesics, distance, distributional, inequality_oracles, cli.
"""
import os as _os

__version__ = "0.1.0"

# WARPGEO_THREADS caps the BLAS/OpenMP worker count; it only takes effect
# if set before numpy is first imported.
_threads = _os.environ.get("WARPGEO_THREADS")
if _threads:
    for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        _os.environ.setdefault(_var, _threads)
