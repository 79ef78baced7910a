"""
Exception hierarchy for plausikit.

Structural problems with a model are reported by ``validate`` as data;
everything here is a genuine failure of an operation.
"""


class PlausikitError(Exception):
    """Base class for every error raised by the toolkit."""


class ModelInputError(PlausikitError):
    """Bad input: unknown agent or state, malformed file, wrong fragment."""


class FormulaSyntaxError(ModelInputError):
    def __init__(self, text: str, position: int, expected: list[str]):
        self.text = text
        self.position = position
        self.expected = sorted(expected)
        shown = ", ".join(self.expected) if self.expected else "end of input"
        super().__init__(f"syntax error at position {position}: expected one of {shown}")


class EmptyAnnouncementError(PlausikitError):
    """Announcing a formula that is true nowhere would leave no states."""


class PairCapExceeded(PlausikitError):
    def __init__(self, cap: int, needed: int):
        self.cap = cap
        self.needed = needed
        super().__init__(f"definable pair family needs {needed} pairs, cap is {cap}")


class CorpusMismatchError(PlausikitError):
    def __init__(self, diffs: list[str]):
        self.diffs = diffs
        super().__init__("corpus verdicts not reproduced:\n" + "\n".join(diffs))
