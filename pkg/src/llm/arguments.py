"""
Parser for function-call argument strings.

Accepts strict JSON plus the looser object-literal form models sometimes
emit: unquoted keys, single-quoted strings and trailing commas.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, List, Optional


class ArgumentSyntaxError(ValueError):
    """Raised when an argument string cannot be parsed."""
    pass


class TokenType(Enum):
    """Types of tokens."""
    LEFT_BRACE = "LEFT_BRACE"
    RIGHT_BRACE = "RIGHT_BRACE"
    LEFT_BRACKET = "LEFT_BRACKET"
    RIGHT_BRACKET = "RIGHT_BRACKET"
    COLON = "COLON"
    COMMA = "COMMA"
    STRING = "STRING"
    NUMBER = "NUMBER"
    IDENTIFIER = "IDENTIFIER"
    EOF = "EOF"


@dataclass
class Token:
    """Represents a single token."""
    type: TokenType
    value: str
    line: int = 1
    column: int = 1


ESCAPES = {'"': '"', "'": "'", "\\": "\\", "/": "/", "b": "\b", "f": "\f",
           "n": "\n", "r": "\r", "t": "\t"}

LITERALS = {"true": True, "false": False, "null": None,
            "True": True, "False": False, "None": None}

PUNCTUATION = {
    "{": TokenType.LEFT_BRACE,
    "}": TokenType.RIGHT_BRACE,
    "[": TokenType.LEFT_BRACKET,
    "]": TokenType.RIGHT_BRACKET,
    ":": TokenType.COLON,
    ",": TokenType.COMMA,
}


class Lexer:
    """Tokenizer for argument strings."""

    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.line = 1
        self.column = 1
        self.current_char = self.text[self.pos] if self.text else None

    def advance(self) -> None:
        """Move to next character."""
        if self.current_char == "\n":
            self.line += 1
            self.column = 1
        else:
            self.column += 1
        self.pos += 1
        self.current_char = self.text[self.pos] if self.pos < len(self.text) else None

    def error(self, message: str) -> ArgumentSyntaxError:
        return ArgumentSyntaxError(f"{message} at line {self.line}, column {self.column}")

    def read_string(self) -> str:
        """Read a single- or double-quoted string, decoding escapes."""
        quote = self.current_char
        self.advance()
        chars: List[str] = []
        while self.current_char != quote:
            if self.current_char is None:
                raise self.error("Unterminated string")
            if self.current_char == "\\":
                self.advance()
                if self.current_char == "u":
                    code = self.text[self.pos + 1:self.pos + 5]
                    if len(code) != 4:
                        raise self.error("Truncated unicode escape")
                    try:
                        chars.append(chr(int(code, 16)))
                    except ValueError:
                        raise self.error(f"Bad unicode escape '{code}'")
                    for _ in range(4):
                        self.advance()
                elif self.current_char in ESCAPES:
                    chars.append(ESCAPES[self.current_char])
                else:
                    raise self.error(f"Unknown escape '\\{self.current_char}'")
            else:
                chars.append(self.current_char)
            self.advance()
        self.advance()
        return "".join(chars)

    def read_number(self) -> str:
        start = self.pos
        if self.current_char in "+-":
            self.advance()
        while self.current_char is not None and (self.current_char.isdigit()
                                                 or self.current_char in ".eE+-"):
            self.advance()
        return self.text[start:self.pos]

    def read_identifier(self) -> str:
        start = self.pos
        while self.current_char is not None and (self.current_char.isalnum()
                                                 or self.current_char in "_$"):
            self.advance()
        return self.text[start:self.pos]

    def tokenize(self) -> List[Token]:
        """Tokenize the whole input."""
        tokens = []
        while self.current_char is not None:
            char = self.current_char
            line, column = self.line, self.column
            if char.isspace():
                self.advance()
            elif char in PUNCTUATION:
                tokens.append(Token(PUNCTUATION[char], char, line, column))
                self.advance()
            elif char in ("'", '"'):
                tokens.append(Token(TokenType.STRING, self.read_string(), line, column))
            elif char.isdigit() or char in "+-.":
                tokens.append(Token(TokenType.NUMBER, self.read_number(), line, column))
            elif char.isalpha() or char in "_$":
                tokens.append(Token(TokenType.IDENTIFIER, self.read_identifier(), line, column))
            else:
                raise self.error(f"Unexpected character '{char}'")
        tokens.append(Token(TokenType.EOF, "", self.line, self.column))
        return tokens


class ArgumentParser:
    """Recursive-descent parser producing plain Python values."""

    def __init__(self, tokens: List[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.current
        if token.type is not TokenType.EOF:
            self.pos += 1
        return token

    def expect(self, token_type: TokenType) -> Token:
        """
        Raises:
            ArgumentSyntaxError: If the current token has another type
        """
        token = self.current
        if token.type is not token_type:
            raise ArgumentSyntaxError(
                f"Expected {token_type.value}, got {token.type.value} "
                f"at line {token.line}, column {token.column}")
        return self.advance()

    def parse(self) -> Any:
        value = self.parse_value()
        self.expect(TokenType.EOF)
        return value

    def parse_value(self) -> Any:
        token = self.current
        if token.type is TokenType.LEFT_BRACE:
            return self.parse_object()
        if token.type is TokenType.LEFT_BRACKET:
            return self.parse_array()
        if token.type is TokenType.STRING:
            return self.advance().value
        if token.type is TokenType.NUMBER:
            return self.parse_number(self.advance())
        if token.type is TokenType.IDENTIFIER and token.value in LITERALS:
            return LITERALS[self.advance().value]
        raise ArgumentSyntaxError(
            f"Unexpected {token.type.value} '{token.value}' "
            f"at line {token.line}, column {token.column}")

    @staticmethod
    def parse_number(token: Token) -> Any:
        try:
            if any(c in token.value for c in ".eE"):
                return float(token.value)
            return int(token.value)
        except ValueError:
            raise ArgumentSyntaxError(
                f"Bad number '{token.value}' at line {token.line}, column {token.column}")

    def parse_object(self) -> Dict[str, Any]:
        self.expect(TokenType.LEFT_BRACE)
        result: Dict[str, Any] = {}
        while self.current.type is not TokenType.RIGHT_BRACE:
            key_token = self.current
            if key_token.type not in (TokenType.STRING, TokenType.IDENTIFIER):
                raise ArgumentSyntaxError(
                    f"Expected key, got {key_token.type.value} "
                    f"at line {key_token.line}, column {key_token.column}")
            self.advance()
            self.expect(TokenType.COLON)
            result[key_token.value] = self.parse_value()
            if self.current.type is TokenType.COMMA:
                self.advance()
            elif self.current.type is not TokenType.RIGHT_BRACE:
                raise ArgumentSyntaxError(
                    f"Expected ',' or '}}' at line {self.current.line}, column {self.current.column}")
        self.expect(TokenType.RIGHT_BRACE)
        return result

    def parse_array(self) -> List[Any]:
        self.expect(TokenType.LEFT_BRACKET)
        items: List[Any] = []
        while self.current.type is not TokenType.RIGHT_BRACKET:
            items.append(self.parse_value())
            if self.current.type is TokenType.COMMA:
                self.advance()
            elif self.current.type is not TokenType.RIGHT_BRACKET:
                raise ArgumentSyntaxError(
                    f"Expected ',' or ']' at line {self.current.line}, column {self.current.column}")
        self.expect(TokenType.RIGHT_BRACKET)
        return items


def parse_arguments(text: Optional[str]) -> Any:
    """
    Parse a function-call argument string.

    Args:
        text: Argument string as returned by the model

    Returns:
        Parsed value, normally a dict

    Raises:
        ArgumentSyntaxError: If the text is empty or malformed
    """
    if text is None or not text.strip():
        raise ArgumentSyntaxError("Empty argument string")
    return ArgumentParser(Lexer(text).tokenize()).parse()
