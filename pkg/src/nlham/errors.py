class DomainError(ValueError):
    """Input lies on a pole or outside the region where a formula is defined."""
