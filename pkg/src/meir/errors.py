"""Exception and warning hierarchy shared across the engine."""


class MeirError(Exception):
    """Base class for all engine errors."""


# --- embedding store ---

class BadMagic(MeirError):
    pass


class VersionUnsupported(MeirError):
    pass


class CountMismatch(MeirError):
    pass


class NonFiniteValue(MeirError):
    def __init__(self, row, col):
        super().__init__(f"non-finite value at row {row}, col {col}")
        self.row = row
        self.col = col


class DuplicateId(MeirError):
    pass


class UnknownLabel(MeirError):
    pass


class IoFailure(MeirError):
    pass


class EmptySet(MeirError):
    pass


class ZeroVector(MeirError):
    def __init__(self, row):
        super().__init__(f"row {row} has (near-)zero norm; direction undefined")
        self.row = row


class OverlapDetected(MeirError):
    def __init__(self, shared_ids):
        shown = ", ".join(sorted(shared_ids)[:10])
        super().__init__(f"{len(shared_ids)} shared ids between sets: {shown}")
        self.shared_ids = sorted(shared_ids)


# --- splitter ---

class EmptyClass(MeirError):
    pass


class DegenerateRatioWarning(UserWarning):
    """A partition receives zero items for a class of size >= 3."""


# --- index ---

class UnnormalizedForIP(MeirError):
    pass


class DimMismatch(MeirError):
    pass


class KOutOfRange(MeirError):
    pass


class NonFiniteQuery(MeirError):
    pass


# --- fusion ---

class IdOrderMismatch(MeirError):
    pass


class LabelMismatch(MeirError):
    pass


class RankDeficientWarning(UserWarning):
    """Fewer positive eigenvalues than requested components."""


class WeightCountMismatch(MeirError):
    pass


class RowOrderMismatch(MeirError):
    pass


class TooFewMethods(MeirError):
    pass


class TooFewSets(MeirError):
    pass


# --- metrics ---

class KExceedsList(MeirError):
    pass


class ZeroRelevantWarning(UserWarning):
    """Query class has no relevant items in the database."""


# --- stats ---

class TooFewValues(MeirError):
    pass


class LengthMismatch(MeirError):
    pass


class ZeroVariance(MeirError):
    pass


class EmptySample(MeirError):
    pass


class ZeroPooledVariance(MeirError):
    pass


# --- cli ---

class ConfigError(MeirError):
    pass
