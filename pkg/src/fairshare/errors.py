class ProxConvergenceError(RuntimeError):
    """A per-request proximal solve hit its iteration cap."""
