"""Exception hierarchy.

Two families matter to callers: :class:`CorpusError` (bad or missing input
text, CLI exit code 1) and :class:`DomainError` (the request cannot be
satisfied for this corpus/model, CLI exit code 2).
"""


class VocoptimError(Exception):
    """Base class for every error raised by this package."""


class CorpusError(VocoptimError):
    pass


class CorpusNotFound(CorpusError, FileNotFoundError):
    def __init__(self, path):
        self.path = str(path)
        super().__init__(f"corpus file not found: {self.path}")


class InvalidUtf8(CorpusError):
    def __init__(self, path, offset):
        self.path = str(path)
        self.offset = offset
        super().__init__(f"{self.path}: invalid UTF-8 at byte offset {offset}")


class EmptyCorpus(CorpusError):
    def __init__(self, path=None):
        self.path = None if path is None else str(path)
        where = f" in {self.path}" if self.path else ""
        super().__init__(f"no non-empty sentences{where}")


class DomainError(VocoptimError):
    pass


class InfeasibleVocabSize(DomainError):
    def __init__(self, n, n_min):
        self.n = n
        self.n_min = n_min
        super().__init__(f"vocabulary size {n} is below the alphabet size {n_min}")


class ExhaustedPairs(DomainError):
    """Training ran out of candidates before reaching the requested size."""

    def __init__(self, n_requested, n_reached):
        self.n_requested = n_requested
        self.n_reached = n_reached
        super().__init__(
            f"cannot reach {n_requested} tokens; at most {n_reached} are attainable"
        )


class TrainerDiverged(DomainError):
    pass


class UnencodableCharacter(DomainError):
    def __init__(self, char, position, sentence_index=None):
        self.char = char
        self.position = position
        self.sentence_index = sentence_index
        where = f"position {position}"
        if sentence_index is not None:
            where = f"sentence {sentence_index}, {where}"
        super().__init__(f"character {char!r} at {where} is not in the model alphabet")


class InvalidTokenId(DomainError):
    def __init__(self, token_id, n):
        self.token_id = token_id
        self.n = n
        super().__init__(f"token id {token_id} outside [0, {n})")


class AllTokensUnused(DomainError):
    def __init__(self):
        super().__init__("every token has zero frequency")


class EmptyGrid(DomainError):
    def __init__(self, reasons=()):
        self.reasons = list(reasons)
        super().__init__("no feasible grid point to select from")


class ModelFormatError(VocoptimError):
    pass
