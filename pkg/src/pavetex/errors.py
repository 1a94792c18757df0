"""Exception hierarchy shared by every pipeline stage."""


class PavetexError(Exception):
    """Base class for all errors raised by pavetex."""


class ParseError(PavetexError, ValueError):
    pass


class ConstantMap(PavetexError, ValueError):
    pass


class RowOutOfRange(PavetexError, IndexError):
    pass


class InvalidWindow(PavetexError, ValueError):
    pass


class ShapeMismatch(PavetexError, ValueError):
    pass


class DegenerateInput(PavetexError, ValueError):
    pass


class NoConsensus(PavetexError, RuntimeError):
    pass


class TooFewSamples(PavetexError, ValueError):
    pass


class ThresholdOutOfRange(PavetexError, ValueError):
    pass


class EmptySet(PavetexError, ValueError):
    pass


class EmptyParticleSet(PavetexError, ValueError):
    pass


class TooFewParticles(PavetexError, ValueError):
    pass


class ZeroVariance(PavetexError, ValueError):
    pass


class StratumTooSmall(PavetexError, ValueError):
    pass


class RankDeficient(PavetexError, ValueError):
    pass


class InvalidHyperparameter(PavetexError, ValueError):
    pass


class ConstantLabels(PavetexError, ValueError):
    pass


class PlacementFailure(PavetexError, RuntimeError):
    pass


class VersionMismatch(PavetexError, ValueError):
    pass


class FeatureMismatch(PavetexError, ValueError):
    pass


class StageError(PavetexError):
    """Wraps a failure with the name of the pipeline stage that raised it."""

    def __init__(self, stage, cause, item=None):
        self.stage = stage
        self.cause = cause
        self.item = item
        where = f" [{item}]" if item is not None else ""
        super().__init__(f"{stage}{where}: {type(cause).__name__}: {cause}")
