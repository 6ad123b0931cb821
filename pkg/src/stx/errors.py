"""Exception hierarchy shared across the pipeline."""


class StxError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class DataError(StxError):
    """The input data violates a precondition; the CLI maps this to exit 3."""

    exit_code = 3


class FormatError(DataError):
    pass


class EmptyCorpus(DataError):
    pass


class StratificationError(DataError):
    def __init__(self, label, count, required):
        self.label = label
        self.count = count
        self.required = required
        super().__init__(
            f"class {label!r} has {count} document(s); at least {required} required"
        )


class MalformedTaxonomy(DataError):
    pass


class UnknownNode(DataError):
    def __init__(self, node):
        self.node = node
        super().__init__(f"unknown taxonomy node {node!r}")


class CycleError(DataError):
    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("cycle in taxonomy: " + " -> ".join(self.cycle))


class EmptyVocabulary(DataError):
    pass


class DegenerateLabels(DataError):
    pass


class DivergedError(StxError):
    def __init__(self, label, epoch):
        self.label = label
        self.epoch = epoch
        super().__init__(f"training diverged for class {label!r} at epoch {epoch}")
