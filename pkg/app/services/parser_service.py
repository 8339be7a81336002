import logging
import re
from typing import List, Optional

from pydantic import BaseModel, ConfigDict

from app.errors import LeftoverPiError, ParseError
from app.models.process import KEYWORDS, Raw, RawEnd, RawPar, RawRecv, RawRes, RawSend
from app.models.program import FreeDecl, SourceProgram
from app.models.types import ChanType, NuAnnot, Type, UnitType, Usage, UsagePair
from app.services.algebra_service import DEFAULT_ALGEBRAS, AlgebraSet, zero_pair

logger = logging.getLogger(__name__)

# Whitespace and `--` / `#` line comments are skipped.
TOKEN_PATTERN = re.compile(
    r"(?P<skip>\s+|--[^\n]*|\#[^\n]*)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_']*(?:\^[0-9]+)?)"
    r"|(?P<number>[0-9]+)"
    r"|(?P<symbol>[:;@.()<>\[\],|?!])"
)


class Token(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: str
    text: str
    line: int
    column: int


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    position, line, line_start = 0, 1, 0
    while position < len(text):
        match = TOKEN_PATTERN.match(text, position)
        column = position - line_start + 1
        if match is None:
            raise ParseError(f"Unrecognized character '{text[position]}'", line, column)
        kind = match.lastgroup
        if kind != "skip":
            tokens.append(Token(kind=kind, text=match.group(), line=line, column=column))
        newlines = match.group().count("\n")
        if newlines:
            line += newlines
            line_start = position + match.group().rfind("\n") + 1
        position = match.end()
    column = position - line_start + 1
    tokens.append(Token(kind="eof", text="", line=line, column=column))
    return tokens


class TokenStream:
    """Cursor over the tokens of one source text."""

    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.position = 0

    def next(self) -> Token:
        return self.tokens[self.position]

    def advance(self) -> Token:
        token = self.next()
        if token.kind != "eof":
            self.position += 1
        return token

    def at(self, text: str) -> bool:
        token = self.next()
        return token.kind in ("name", "symbol") and token.text == text

    def fail(self, expected: str, token: Optional[Token] = None) -> ParseError:
        token = token or self.next()
        saw = token.text if token.kind != "eof" else "end of input"
        return ParseError(f"Expected {expected}, saw '{saw}'", token.line, token.column)

    def eat(self, text: str) -> Token:
        if not self.at(text):
            raise self.fail(f"'{text}'")
        return self.advance()

    def eat_name(self) -> str:
        token = self.next()
        if token.kind != "name" or token.text in KEYWORDS:
            raise self.fail("a name")
        return self.advance().text

    def check_eof(self):
        if self.next().kind != "eof":
            raise self.fail("end of input")


class Parser:
    """Recursive descent over one source text.

    With `annotated` set every restriction must carry its type; naming-only
    callers such as the round trip leave it unset.
    """

    def __init__(self, text: str, algebras: AlgebraSet = DEFAULT_ALGEBRAS, annotated: bool = True):
        self.stream = TokenStream(text)
        self.algebras = algebras
        self.annotated = annotated

    def program(self) -> SourceProgram:
        decls = []
        while self.stream.at("free"):
            decls.append(self.decl())
        body = self.proc()
        self.stream.check_eof()
        return SourceProgram(decls=tuple(decls), body=body)

    def decl(self) -> FreeDecl:
        self.stream.eat("free")
        name = self.stream.eat_name()
        self.stream.eat(":")
        t = self.type()
        if self.stream.at("@"):
            self.stream.advance()
            usage = self.usage_pair()
        else:
            usage = zero_pair(self.algebras.resolve("lin"))
        self.stream.eat(";")
        return FreeDecl(name=name, type=t, usage=usage)

    # Types and usages

    def type(self) -> Type:
        if self.stream.at("unit"):
            self.stream.advance()
            return UnitType()
        self.stream.eat("chan")
        self.stream.eat("<")
        payload = self.type()
        self.stream.eat(">")
        self.stream.eat("[")
        usage = self.usage_pair()
        self.stream.eat("]")
        return ChanType(payload=payload, usage=usage)

    def algebra(self) -> str:
        token = self.stream.next()
        if token.kind != "name" or token.text not in self.algebras:
            raise self.stream.fail(f"one of the algebras {', '.join(self.algebras)}")
        return self.stream.advance().text

    def usage(self, idx: str) -> Usage:
        token = self.stream.next()
        if token.kind not in ("name", "number"):
            raise self.stream.fail("a usage")
        try:
            value = self.algebras.resolve(idx).parse(token.text)
        except LeftoverPiError as exc:
            raise ParseError(exc.message, token.line, token.column) from exc
        self.stream.advance()
        return value

    def usage_pair(self) -> UsagePair:
        idx = self.algebra()
        self.stream.eat("(")
        first = self.usage(idx)
        self.stream.eat(",")
        second = self.usage(idx)
        self.stream.eat(")")
        return UsagePair(alg=idx, input=first, output=second)

    def annot(self) -> NuAnnot:
        token = self.stream.next()
        t = self.type()
        if not isinstance(t, ChanType):
            raise ParseError("A restricted name must have a channel type", token.line, token.column)
        self.stream.eat("@")
        idx = self.algebra()
        mult = self.usage(idx)
        return NuAnnot(payload_type=t.payload, payload_usage=t.usage, chan_alg=idx, chan_mult=mult)

    # Processes

    def proc(self) -> Raw:
        left = self.prefix()
        if self.stream.at("|"):
            self.stream.advance()
            return RawPar(left=left, right=self.proc())
        return left

    def prefix(self) -> Raw:
        stream = self.stream
        if stream.at("end"):
            stream.advance()
            return RawEnd()
        if stream.at("("):
            stream.advance()
            inner = self.proc()
            stream.eat(")")
            return inner
        if stream.at("new"):
            stream.advance()
            binder = stream.eat_name()
            annot = None
            if stream.at(":") or self.annotated:
                stream.eat(":")
                annot = self.annot()
            stream.eat(".")
            return RawRes(binder=binder, annot=annot, body=self.prefix())
        if stream.next().kind != "name" or stream.next().text in KEYWORDS:
            raise stream.fail("a process")
        chan = stream.eat_name()
        if stream.at("?"):
            stream.advance()
            stream.eat("(")
            binder = stream.eat_name()
            stream.eat(")")
            stream.eat(".")
            return RawRecv(chan=chan, binder=binder, body=self.prefix())
        if stream.at("!"):
            stream.advance()
            payload = stream.eat_name()
            stream.eat(".")
            return RawSend(chan=chan, payload=payload, body=self.prefix())
        raise stream.fail("'?' or '!'")


def parse(text: str, algebras: AlgebraSet = DEFAULT_ALGEBRAS, annotated: bool = True) -> SourceProgram:
    """Parse free-name declarations followed by a process."""
    program = Parser(text, algebras, annotated).program()
    logger.debug(f"parsed program with {len(program.decls)} declarations")
    return program


def parse_process(text: str, algebras: AlgebraSet = DEFAULT_ALGEBRAS, annotated: bool = False) -> Raw:
    parser = Parser(text, algebras, annotated)
    body = parser.proc()
    parser.stream.check_eof()
    return body


def parse_type(text: str, algebras: AlgebraSet = DEFAULT_ALGEBRAS) -> Type:
    parser = Parser(text, algebras)
    t = parser.type()
    parser.stream.check_eof()
    return t
