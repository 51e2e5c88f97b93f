"""Exception types shared across the package."""


class SeqcalError(Exception):
    """Base class for every error raised by seqcal."""


class SpecSyntaxError(SeqcalError):
    def __init__(self, message, line=1, column=1):
        super().__init__(f"{line}:{column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class ReservedWord(SpecSyntaxError):
    pass


class DuplicateDefinition(SeqcalError):
    pass


class UndefinedName(SeqcalError):
    pass


class Unguarded(SeqcalError):
    """A name was re-entered while computing its own initial steps."""


class NotGnf(SeqcalError):
    def __init__(self, name, subterm):
        super().__init__(f"equation {name} is not in Greibach normal form: offending summand {subterm}")
        self.name = name
        self.subterm = subterm


class LimitZero(SeqcalError):
    pass


class FrontierPresent(SeqcalError):
    pass


class NonRegularShape(SeqcalError):
    pass


class ChannelCollision(SeqcalError):
    pass
