class ResourceLimitError(RuntimeError):
    """A configured size guard (state limit, id overflow) was exceeded."""
