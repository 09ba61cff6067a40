class RieszLabError(Exception):
    """Base class for library errors."""


class CertificationError(RieszLabError):
    """An exact certificate (containment, ordering, disjointness) failed."""


class SelectionExhausted(RieszLabError):
    """A greedy selection ran out of candidates before its window condition held."""
