"""Exception hierarchy shared by all modules.

Every numerical failure carries the name of the pipeline stage that raised
it, so the command-line front end can report it on stderr.
"""


class ToricSpecError(Exception):
    """Base class for all errors raised by the package."""

    stage = "unknown"

    def __init__(self, message, stage=None):
        super().__init__(message)
        if stage is not None:
            self.stage = stage


class ConfigError(ToricSpecError):
    """Invalid or unknown configuration entries."""

    stage = "config"


class NumericalError(ToricSpecError):
    """Base class for failures of a numerical stage."""


class NotPoleRegular(NumericalError):
    stage = "profiles"


class MultiWell(NumericalError):
    stage = "profiles"


class DegenerateMinimum(NumericalError):
    stage = "profiles"


class TruncatedSpectrum(NumericalError):
    stage = "measure"


class QuadratureError(NumericalError):
    stage = "invariants"


class NoiseDominated(NumericalError):
    stage = "abel"


class IllConditioned(NumericalError):
    stage = "abel"

    def __init__(self, message, beta=None, stage=None):
        super().__init__(message, stage)
        self.beta = beta


class ThresholdNotBracketed(NumericalError):
    stage = "detect_c"


class NegativeDiscriminant(NumericalError):
    stage = "split_branches"


class NonMonotoneBranch(NumericalError):
    stage = "assemble_profile"
