"""Tokenizer for the BQL subset.

Keywords are case-insensitive; identifiers are double-quoted (case
preserved, may contain anything but an unescaped quote); string literals
are single-quoted with '' escaping.  Lines may carry the REPL continuation
prompt ``...``, which is stripped before scanning.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import BqlSyntaxError

KEYWORDS = {
    "SELECT", "ESTIMATE", "FROM", "WHERE", "ORDER", "BY", "ASC", "DESC",
    "LIMIT", "AND", "OR", "NOT", "IS", "LIKE", "IN", "AS", "AVG",
    "RELEVANCE", "PREDICTIVE", "PROBABILITY", "TO", "EXISTING", "ROW",
    "ROWS", "HYPOTHETICAL", "WITH", "VALUES", "THE", "CONTEXT", "OF",
    "DEPENDENCE", "CREATE", "TABLE", "POPULATION", "FOR", "SCHEMA",
    "GUESS", "STATISTICAL", "TYPES", "STATTYPES", "SET", "INITIALIZE",
    "MODELS", "MODEL", "ANALYZE", "ITERATION", "ITERATIONS", "SECOND",
    "SECONDS", "MINUTE", "MINUTES", "BASELINE", "KEY", "PAIRWISE",
    "VARIABLES",
}

SYMBOLS = ("<=", ">=", "!=", "<>", "=", "<", ">", "(", ")", ",", ";", "*", "+", "-", "/")


@dataclass(frozen=True)
class Token:
    kind: str      # KEYWORD | IDENT | QIDENT | STRING | NUMBER | SYMBOL | EOF
    value: object
    line: int
    column: int
    raw: str = ""  # original spelling (keywords are upper-cased in value)

    def is_kw(self, *names):
        return self.kind == "KEYWORD" and self.value in names

    def is_sym(self, *symbols):
        return self.kind == "SYMBOL" and self.value in symbols


def _strip_prompts(text: str) -> str:
    out = []
    for line in text.split("\n"):
        stripped = line.lstrip()
        if stripped.startswith("..."):
            pad = len(line) - len(stripped)
            line = line[:pad] + " " * 3 + stripped[3:]
        out.append(line)
    return "\n".join(out)


def tokenize(text: str):
    """Scan text into a token list ending with EOF."""
    text = _strip_prompts(text)
    tokens = []
    i, line, col = 0, 1, 1
    n = len(text)

    def err(msg, at_line=None, at_col=None):
        raise BqlSyntaxError(msg, at_line or line, at_col or col)

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("--", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == "'":
            j = i + 1
            buf = []
            while True:
                if j >= n:
                    err("unterminated string literal", start_line, start_col)
                if text[j] == "'":
                    if j + 1 < n and text[j + 1] == "'":
                        buf.append("'")
                        j += 2
                        continue
                    break
                if text[j] == "\n":
                    line += 1
                buf.append(text[j])
                j += 1
            tokens.append(Token("STRING", "".join(buf), start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch == '"':
            j = text.find('"', i + 1)
            if j < 0 or "\n" in text[i + 1 : j]:
                err("unterminated quoted identifier", start_line, start_col)
            tokens.append(Token("QIDENT", text[i + 1 : j], start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            seen_dot = seen_exp = False
            while j < n:
                c = text[j]
                if c.isdigit():
                    j += 1
                elif c == "." and not seen_dot and not seen_exp:
                    seen_dot = True
                    j += 1
                elif c in "eE" and not seen_exp and j > i and (
                    j + 1 < n and (text[j + 1].isdigit() or text[j + 1] in "+-")
                ):
                    seen_exp = True
                    j += 2 if text[j + 1] in "+-" else 1
                else:
                    break
            raw = text[i:j]
            value = float(raw) if (seen_dot or seen_exp) else int(raw)
            tokens.append(Token("NUMBER", value, start_line, start_col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            word = text[i:j]
            upper = word.upper()
            if upper in KEYWORDS:
                tokens.append(Token("KEYWORD", upper, start_line, start_col, word))
            else:
                tokens.append(Token("IDENT", word, start_line, start_col, word))
            col += j - i
            i = j
            continue
        matched = None
        for sym in SYMBOLS:
            if text.startswith(sym, i):
                matched = sym
                break
        if matched:
            tokens.append(Token("SYMBOL", matched, start_line, start_col))
            i += len(matched)
            col += len(matched)
            continue
        err(f"unexpected character {ch!r}")
    tokens.append(Token("EOF", None, line, col))
    return tokens
