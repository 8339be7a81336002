from typing import Any, Optional, Sequence, Tuple


class LeftoverPiError(Exception):
    """Base class for every error raised by the library.

    `path` is the list of child selectors leading from the root of the
    process (or derivation) to the node where the error was detected.
    """

    def __init__(self, message: str, path: Sequence[str] = ()):
        super().__init__(message)
        self.message = message
        self.path: Tuple[str, ...] = tuple(path)

    def with_path(self, path: Sequence[str]) -> "LeftoverPiError":
        if not self.path:
            self.path = tuple(path)
        return self

    def detail(self) -> dict:
        return {"error": type(self).__name__, "message": self.message, "path": list(self.path)}

    def __str__(self) -> str:
        if self.path:
            return f"{self.message} (at {'/'.join(self.path)})"
        return self.message


# Scope

class ScopeError(LeftoverPiError):
    def __init__(self, name: str, position: Sequence[str] = ()):
        super().__init__(f"Unbound name '{name}'", position)
        self.name = name


class ScopeDepthError(LeftoverPiError):
    pass


# Algebra

class AlgebraError(LeftoverPiError):
    pass


class UnknownAlgebra(AlgebraError):
    def __init__(self, idx: str):
        super().__init__(f"Unknown usage algebra '{idx}'")
        self.idx = idx


class AlgebraLawError(AlgebraError):
    def __init__(self, law: str, witness: Any):
        super().__init__(f"Usage algebra violates {law}: {witness}")
        self.law = law
        self.witness = witness


# Context

class ContextError(LeftoverPiError):
    pass


class IndexOutOfRange(ContextError):
    def __init__(self, index: int, length: int):
        super().__init__(f"Index {index} out of range for context of length {length}")
        self.index = index
        self.length = length


class AlgebraMismatch(ContextError):
    def __init__(self, index: int, expected: str, found: str):
        super().__init__(f"Position {index} uses algebra '{expected}', got a usage of '{found}'")
        self.index = index
        self.expected = expected
        self.found = found


class SplitUndefined(ContextError):
    def __init__(self, index: int, have: Any, want: Any):
        super().__init__(f"Cannot take {want} from {have} at index {index}")
        self.index = index
        self.have = have
        self.want = want


class CtxSplitUndefined(SplitUndefined):
    pass


# Checker

class TypeCheckError(LeftoverPiError):
    pass


class NotAChannel(TypeCheckError):
    def __init__(self, index: int, found: Any):
        super().__init__(f"Variable {index} has type {found}, expected a channel")
        self.index = index


class PayloadTypeMismatch(TypeCheckError):
    def __init__(self, index: int, expected: Any, found: Any):
        super().__init__(f"Payload {index} has type {found}, channel carries {expected}")
        self.index = index
        self.expected = expected
        self.found = found


class ResidualUsage(TypeCheckError):
    def __init__(self, position: str, leftover: Any):
        super().__init__(f"Binder '{position}' not exhausted, leftover {leftover}")
        self.position = position
        self.leftover = leftover


class MissingAnnotation(TypeCheckError):
    def __init__(self, hint: str):
        super().__init__(f"Restriction '{hint}' has no type annotation")


# Semantics

class RewriteError(LeftoverPiError):
    pass


class ShapeMismatch(RewriteError):
    pass


class UnusedViolation(RewriteError):
    pass


class PathError(RewriteError):
    pass


# Metatheory

class TransformError(LeftoverPiError):
    pass


class FrameUndefined(TransformError):
    pass


class UsedVariable(TransformError):
    def __init__(self, index: int):
        super().__init__(f"Variable {index} is used by the process")
        self.index = index


class EvidenceMismatch(TransformError):
    def __init__(self, arrow: str, reason: Optional[str] = None):
        super().__init__(f"Evidence '{arrow}' does not hold" + (f": {reason}" if reason else ""))
        self.arrow = arrow


class StepNotDerivable(TransformError):
    pass


class MissingCapability(TransformError):
    pass


class NoCapability(TransformError):
    pass


# Surface syntax

class ParseError(LeftoverPiError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column

    def detail(self) -> dict:
        data = super().detail()
        data.update({"line": self.line, "column": self.column})
        return data
