"""Exception types shared across the package."""


class VlmcError(Exception):
    """Base class for all model/analysis errors raised by this package."""


class NotSaturated(VlmcError):
    """An internal node of an explicit tree is missing a child."""

    def __init__(self, node: str, missing_child: str):
        self.node = node
        self.missing_child = missing_child
        super().__init__(
            f"tree not saturated: internal node {node!r} has no child {missing_child!r}"
        )


class NotAntichain(VlmcError):
    """One candidate leaf is a prefix of another."""

    def __init__(self, shorter: str, longer: str):
        self.shorter = shorter
        self.longer = longer
        super().__init__(f"leaf set is not an antichain: {shorter!r} is a prefix of {longer!r}")


class InternalWord(VlmcError):
    """Operation undefined on internal words (no context prefix exists)."""


class NoContextPrefix(VlmcError):
    """No stored prefix of the word is a context; longer data would be needed."""


class InfiniteAlphaLisSet(VlmcError):
    """The set of context alpha-lis is not finite."""


class InvalidModel(VlmcError):
    """Malformed probabilized tree (bad distributions, missing contexts, ...)."""


class NotStochastic(VlmcError):
    """A matrix expected to be row-stochastic is not."""


class Reducible(VlmcError):
    """The support graph of a matrix is not strongly connected."""

    def __init__(self, blocks):
        self.blocks = blocks
        super().__init__(f"matrix is reducible; strongly connected blocks: {blocks}")


class NoConvergence(VlmcError):
    """Iterative solver failed to reach the required residual."""


class Assumption1Violated(VlmcError):
    """Cascade terms do not vanish: runs may be infinite with positive probability."""


class Assumption2Violated(Assumption1Violated):
    """Same as Assumption1Violated, raised by the two-dimensional machinery."""


class InconclusiveSeries(VlmcError):
    """A series value is needed but its status is Inconclusive."""


class UnsupportedModel(VlmcError):
    """The operation's hypotheses (stability, finite alpha-lis set, ...) fail."""


class RunCapExceeded(VlmcError):
    """A single persistence run exceeded the configured cap."""


class InternalConsistencyError(VlmcError):
    """A state the theory declares unreachable was reached; indicates a bug."""


class ConfigError(VlmcError):
    """Model config rejected: carries a location (line or field path)."""

    def __init__(self, location: str, reason: str):
        self.location = location
        self.reason = reason
        super().__init__(f"{location}: {reason}")
