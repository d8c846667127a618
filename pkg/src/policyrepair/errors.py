"""Exception hierarchy shared by every module in the package."""


class PolicyRepairError(Exception):
    """Base class for all errors raised by this package."""


# -- policy parsing ----------------------------------------------------------

class PolicyParseError(PolicyRepairError):
    """Base class for errors raised while parsing or normalizing a policy."""


class MalformedJsonError(PolicyParseError):
    """Input is not syntactically valid JSON, or a field has the wrong shape."""


class EmptyPolicyError(PolicyParseError):
    """Policy has no statements."""


class MissingEffectError(PolicyParseError):
    """A statement lacks the Effect field."""


class InvalidEffectError(PolicyParseError):
    """Effect is something other than Allow or Deny."""


class EmptyActionOrResourceError(PolicyParseError):
    """A statement has an empty or missing Action or Resource list."""


class UnsupportedConditionOperatorError(PolicyParseError):
    """Condition uses an operator outside the supported set."""


class UnsupportedConstructError(PolicyRepairError):
    """Policy uses a construct outside the supported model (NotAction etc.),
    or SMT-LIB encoding was asked to encode one."""


class UnrepairableError(PolicyParseError):
    """Syntactic repairs were exhausted and the text still does not parse."""


# -- evaluation / validation -------------------------------------------------

class EmptySpecError(PolicyRepairError):
    """Request specification contains no requests."""


class EmptyCorpusError(PolicyRepairError):
    """Corpus statistics or batch run requested over zero policies."""


# -- fault localization ------------------------------------------------------

class FingerprintMismatchError(PolicyRepairError):
    """A validation result or fault report was produced from a different policy."""


class NoMisclassificationsError(PolicyRepairError):
    """Fault localization requested for a passing validation result."""


# -- request generation ------------------------------------------------------

class InsufficientCombinationsError(PolicyRepairError):
    """Fewer distinct request tuples exist than were requested."""


# -- synthesis ---------------------------------------------------------------

class SynthesisError(PolicyRepairError):
    """Base class for synthesizer backend failures."""


class NoPolicyFoundError(SynthesisError):
    """Model output contains no candidate policy object."""


class AllCandidatesMalformedError(SynthesisError):
    """Every candidate policy object in the model output failed to normalize."""


class TransportFailureError(SynthesisError):
    """Network failure or non-success HTTP status from the remote endpoint."""


class SynthesisTimeoutError(SynthesisError):
    """Remote endpoint did not answer within the configured timeout."""


class ExtractionFailedError(SynthesisError):
    """No policy could be extracted from any response within the retry budget."""


class AuthMissingError(SynthesisError):
    """The environment variable holding the API credential is not set."""


class ContradictorySpecError(PolicyRepairError):
    """The same request tuple appears in both must_allow and must_deny."""


class NothingRepairableError(SynthesisError):
    """The rule-based synthesizer could not apply any repair rule."""


# -- repair engine -----------------------------------------------------------

class SynthesizerUnavailableError(PolicyRepairError):
    """Every iteration failed to produce any candidate policy."""


# -- statistics --------------------------------------------------------------

class DegenerateSampleError(PolicyRepairError):
    """t-test input too small or with zero variance in both samples."""
