"""Exception hierarchy shared by all pipeline stages."""


class SodpChfError(Exception):
    """Base class for every error raised by this package."""


class MissingFileError(SodpChfError, FileNotFoundError):
    def __init__(self, path):
        self.path = path
        super().__init__(f"file not found: {path}")


class ParseError(SodpChfError, ValueError):
    def __init__(self, path, line, message):
        self.path = path
        self.line = line
        super().__init__(f"{path}:{line}: {message}")


class DuplicateSubjectError(SodpChfError, ValueError):
    def __init__(self, subject_id):
        self.subject_id = subject_id
        super().__init__(f"duplicate subject id: {subject_id!r}")


class BadLabelError(SodpChfError, ValueError):
    def __init__(self, value):
        self.value = value
        super().__init__(f"label must be CHF or Normal, got {value!r}")


class NonFiniteSampleError(SodpChfError, ValueError):
    def __init__(self, index):
        self.index = index
        super().__init__(f"non-finite sample at index {index}")


class TooShortError(SodpChfError, ValueError):
    def __init__(self, length, minimum=3):
        self.length = length
        self.minimum = minimum
        super().__init__(f"need at least {minimum} samples, got {length}")


class WidthTooLargeError(SodpChfError, ValueError):
    pass


class WidthEvenError(SodpChfError, ValueError):
    pass


class FrequencyOutOfRangeError(SodpChfError, ValueError):
    pass


class RecordTooShortError(SodpChfError, ValueError):
    def __init__(self, needed, have, subject_id=None):
        self.needed = needed
        self.have = have
        self.subject_id = subject_id
        who = f"subject {subject_id}: " if subject_id is not None else ""
        super().__init__(f"{who}record too short: need {needed} samples, have {have}")


class EmptyPointSetError(SodpChfError, ValueError):
    pass


class TooFewRowsError(SodpChfError, ValueError):
    pass


class SingularCovarianceError(SodpChfError, ValueError):
    pass


class BadHyperparameterError(SodpChfError, ValueError):
    pass


class EmptyConfusionError(SodpChfError, ValueError):
    pass


class BadKError(SodpChfError, ValueError):
    pass


class SingleClassTrainingError(SodpChfError, ValueError):
    def __init__(self, subject_id):
        self.subject_id = subject_id
        super().__init__(
            f"training set without subject {subject_id!r} contains a single class"
        )


class BadSpecError(SodpChfError, ValueError):
    pass


class UnknownSubjectError(SodpChfError, KeyError):
    def __init__(self, subject_id):
        self.subject_id = subject_id
        super().__init__(f"unknown subject id: {subject_id!r}")

    def __str__(self):
        return self.args[0]


class BadWindowIndexError(SodpChfError, IndexError):
    pass


class ConfigError(SodpChfError, ValueError):
    pass
