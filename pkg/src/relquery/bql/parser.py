"""Recursive-descent parser for the BQL subset.

Covers SELECT/ESTIMATE with WHERE / ORDER BY / LIMIT, relevance and
dependence expressions (all three query-record syntaxes), the session
statements (CREATE TABLE / CREATE POPULATION / INITIALIZE / ANALYZE /
pairwise dependence), AVG aggregation, LIKE, IS [NOT], IN, and arithmetic.
Identifiers resolve during planning, not here.
"""

from __future__ import annotations

from ..errors import BqlSyntaxError
from .lexer import Token, tokenize
from . import nodes as N

STAT_TYPE_WORDS = ("BINARY", "CATEGORICAL", "NUMERICAL", "COUNT")

# keywords that may also serve as bare table/population/column names
NONRESERVED = {
    "POPULATION", "TABLE", "KEY", "MODELS", "MODEL", "CONTEXT", "VALUES",
    "TYPES", "VARIABLES", "BASELINE", "SCHEMA", "STATTYPES", "ROW", "ROWS",
}


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    # -- primitives -------------------------------------------------------

    @property
    def cur(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        tok = self.cur
        if tok.kind != "EOF":
            self.pos += 1
        return tok

    def error(self, expected):
        tok = self.cur
        got = tok.value if tok.kind != "EOF" else "end of input"
        raise BqlSyntaxError(f"expected {expected}, got {got!r}", tok.line, tok.column)

    def accept_kw(self, *names):
        if self.cur.is_kw(*names):
            return self.advance()
        return None

    def expect_kw(self, *names):
        tok = self.accept_kw(*names)
        if tok is None:
            self.error(" or ".join(names))
        return tok

    def accept_sym(self, *symbols):
        if self.cur.is_sym(*symbols):
            return self.advance()
        return None

    def expect_sym(self, *symbols):
        tok = self.accept_sym(*symbols)
        if tok is None:
            self.error(" or ".join(repr(s) for s in symbols))
        return tok

    def expect_name(self):
        """A bare or quoted identifier; non-reserved keywords qualify."""
        if self.cur.kind in ("IDENT", "QIDENT"):
            return self.advance().value
        if self.cur.kind == "KEYWORD" and self.cur.value in NONRESERVED:
            return self.advance().raw
        self.error("an identifier")

    def expect_number(self):
        if self.cur.kind == "NUMBER":
            return self.advance().value
        self.error("a number")

    def expect_string(self):
        if self.cur.kind == "STRING":
            return self.advance().value
        self.error("a string literal")

    # -- statements -------------------------------------------------------

    def statement(self):
        if self.cur.is_kw("CREATE"):
            return self.create()
        if self.cur.is_kw("INITIALIZE"):
            return self.initialize()
        if self.cur.is_kw("ANALYZE"):
            return self.analyze()
        if self.cur.is_kw("SELECT", "ESTIMATE"):
            return self.select()
        self.error("a statement keyword")

    def create(self):
        self.expect_kw("CREATE")
        if self.accept_kw("TABLE"):
            name = self.expect_name()
            self.expect_kw("FROM")
            path = self.expect_string()
            key = None
            if self.accept_kw("WITH"):
                self.expect_kw("KEY")
                key = self.expect_name()
            return N.CreateTable(name, path, key)
        self.expect_kw("POPULATION")
        name = self.expect_name()
        self.expect_kw("FOR")
        table = self.expect_name()
        self.expect_kw("WITH")
        self.expect_kw("SCHEMA")
        self.expect_sym("(")
        directives = []
        while not self.cur.is_sym(")"):
            directives.append(self.schema_directive())
            if not self.accept_sym(";"):
                break
        self.expect_sym(")")
        baseline = None
        if self.accept_kw("WITH"):
            self.expect_kw("BASELINE")
            baseline = self.expect_name()
        return N.CreatePopulation(name, table, tuple(directives), baseline)

    def schema_directive(self):
        if self.accept_kw("GUESS"):
            if not self.accept_kw("STATTYPES"):
                self.expect_kw("STATISTICAL")
                self.expect_kw("TYPES")
            self.expect_kw("FOR")
            self.expect_sym("(")
            self.expect_sym("*")
            self.expect_sym(")")
            return N.GuessTypes()
        if self.accept_kw("SET"):
            self.expect_kw("STATTYPES")
            self.expect_kw("OF")
            column = self.expect_name()
            self.expect_kw("TO")
            word = self.expect_name().upper()
            if word not in STAT_TYPE_WORDS:
                self.error("a statistical type name")
            return N.SetStatType(column, word.lower())
        self.error("GUESS or SET")

    def initialize(self):
        self.expect_kw("INITIALIZE")
        n = self.expect_number()
        self.expect_kw("MODELS", "MODEL")
        population = None
        if self.accept_kw("FOR"):
            population = self.expect_name()
        baseline = None
        if self.accept_kw("WITH"):
            self.expect_kw("BASELINE")
            baseline = self.expect_name()
        return N.InitializeModels(int(n), population, baseline)

    def analyze(self):
        self.expect_kw("ANALYZE")
        population = self.expect_name()
        self.expect_kw("FOR")
        amount = self.expect_number()
        unit_tok = self.expect_kw(
            "ITERATION", "ITERATIONS", "SECOND", "SECONDS", "MINUTE", "MINUTES"
        )
        unit = {
            "ITERATION": "iterations", "ITERATIONS": "iterations",
            "SECOND": "seconds", "SECONDS": "seconds",
            "MINUTE": "minutes", "MINUTES": "minutes",
        }[unit_tok.value]
        return N.AnalyzeStmt(population, amount, unit)

    def select(self):
        head = self.expect_kw("SELECT", "ESTIMATE")
        estimate = head.value == "ESTIMATE"
        if estimate and self.cur.is_kw("DEPENDENCE") and self._peek_pairwise():
            self.expect_kw("DEPENDENCE")
            self.expect_kw("PROBABILITY")
            self.expect_kw("FROM")
            self.expect_kw("PAIRWISE")
            self.expect_kw("VARIABLES")
            self.expect_kw("OF")
            return N.PairwiseDependence(self.expect_name())
        items = None
        if self.accept_sym("*"):
            items = None
        else:
            items = [self.projection()]
            while self.accept_sym(","):
                if self.cur.is_kw("FROM"):  # tolerate trailing comma
                    break
                items.append(self.projection())
            items = tuple(items)
        self.expect_kw("FROM")
        source = self.expect_name()
        where = None
        if self.accept_kw("WHERE"):
            where = self.or_expr()
        order_by = None
        if self.accept_kw("ORDER"):
            self.expect_kw("BY")
            expr = self.scalar()
            desc = False
            if self.accept_kw("DESC"):
                desc = True
            elif self.accept_kw("ASC"):
                desc = False
            order_by = (expr, desc)
        limit = None
        if self.accept_kw("LIMIT"):
            limit = int(self.expect_number())
            if limit < 0:
                self.error("a non-negative LIMIT")
        return N.Select(items, source, where, order_by, limit, estimate)

    def _peek_pairwise(self):
        # ESTIMATE DEPENDENCE PROBABILITY FROM PAIRWISE ...
        save = self.pos
        try:
            if not self.accept_kw("DEPENDENCE"):
                return False
            if not self.accept_kw("PROBABILITY"):
                return False
            return self.cur.is_kw("FROM") and self.tokens[self.pos + 1].is_kw("PAIRWISE")
        finally:
            self.pos = save

    def projection(self):
        expr = self.scalar()
        alias = None
        if self.accept_kw("AS"):
            alias = self.expect_name()
        return N.Projection(expr, alias)

    # -- boolean expressions ------------------------------------------------

    def or_expr(self):
        left = self.and_expr()
        while self.accept_kw("OR"):
            left = N.BinOp("OR", left, self.and_expr())
        return left

    def and_expr(self):
        left = self.not_expr()
        while self.accept_kw("AND"):
            left = N.BinOp("AND", left, self.not_expr())
        return left

    def not_expr(self):
        if self.accept_kw("NOT"):
            return N.NotOp(self.not_expr())
        return self.comparison()

    def comparison(self):
        left = self.scalar()
        if self.cur.is_sym("=", "!=", "<>", "<", "<=", ">", ">="):
            op = self.advance().value
            if op == "<>":
                op = "!="
            return N.BinOp(op, left, self.scalar())
        if self.cur.is_kw("IS"):
            self.advance()
            negated = bool(self.accept_kw("NOT"))
            return N.IsOp(left, self.scalar(), negated)
        negated = False
        if self.cur.is_kw("NOT") and self.tokens[self.pos + 1].is_kw("LIKE", "IN"):
            self.advance()
            negated = True
        if self.accept_kw("LIKE"):
            return N.LikeOp(left, self.expect_string(), negated)
        if self.accept_kw("IN"):
            self.expect_sym("(")
            if self.cur.is_kw("SELECT", "ESTIMATE"):
                items = self.select()
            else:
                lits = [self.literal()]
                while self.accept_sym(","):
                    if self.cur.is_sym(")"):
                        break
                    lits.append(self.literal())
                items = tuple(lits)
            self.expect_sym(")")
            return N.InOp(left, items, negated)
        return left

    # -- scalar expressions ---------------------------------------------------

    def scalar(self):
        return self.additive()

    def additive(self):
        left = self.multiplicative()
        while self.cur.is_sym("+", "-"):
            op = self.advance().value
            left = N.BinOp(op, left, self.multiplicative())
        return left

    def multiplicative(self):
        left = self.unary()
        while self.cur.is_sym("*", "/"):
            op = self.advance().value
            left = N.BinOp(op, left, self.unary())
        return left

    def unary(self):
        if self.accept_sym("-"):
            return N.Neg(self.unary())
        return self.primary()

    def literal(self):
        if self.cur.kind == "NUMBER":
            return N.Literal(self.advance().value)
        if self.cur.kind == "STRING":
            return N.Literal(self.advance().value)
        if self.accept_sym("-"):
            return N.Literal(-self.expect_number())
        self.error("a literal")

    def primary(self):
        tok = self.cur
        if tok.kind == "NUMBER":
            return N.Literal(self.advance().value)
        if tok.kind == "STRING":
            return N.Literal(self.advance().value)
        if tok.kind in ("IDENT", "QIDENT"):
            return N.ColumnRef(self.advance().value)
        if tok.is_kw("AVG"):
            self.advance()
            self.expect_sym("(")
            inner = self.scalar()
            self.expect_sym(")")
            return N.Aggregate("AVG", inner)
        if tok.is_kw("PREDICTIVE", "RELEVANCE"):
            return self.relevance()
        if tok.is_kw("DEPENDENCE"):
            self.advance()
            self.expect_kw("PROBABILITY")
            self.expect_kw("OF")
            c1 = self.expect_name()
            self.expect_kw("WITH")
            c2 = self.expect_name()
            return N.DependenceProbability(c1, c2)
        if tok.is_sym("("):
            self.advance()
            inner = self.or_expr()
            self.expect_sym(")")
            return inner
        self.error("an expression")

    # -- relevance ---------------------------------------------------------

    def relevance(self):
        self.accept_kw("PREDICTIVE")
        self.expect_kw("RELEVANCE")
        self.expect_kw("PROBABILITY")
        self.expect_kw("TO")
        existing = None
        hypothetical = ()
        if self.accept_kw("EXISTING"):
            self.expect_kw("ROWS", "ROW")
            self.expect_kw("IN")
            existing = self.row_spec()
            if self.accept_kw("AND"):
                self.expect_kw("HYPOTHETICAL")
                hypothetical = self.hypothetical_rows()
        else:
            self.expect_kw("HYPOTHETICAL")
            hypothetical = self.hypothetical_rows()
        self.expect_kw("IN")
        self.expect_kw("THE")
        self.expect_kw("CONTEXT")
        self.expect_kw("OF")
        context = self.expect_name()
        return N.RelevanceProbability(context, existing, hypothetical)

    def row_spec(self):
        self.expect_sym("(")
        if self.cur.is_kw("SELECT", "ESTIMATE"):
            spec = self.select()
        else:
            lits = [self.literal()]
            while self.accept_sym(","):
                if self.cur.is_sym(")"):  # tolerate trailing comma
                    break
                lits.append(self.literal())
            spec = tuple(lits)
        self.expect_sym(")")
        return spec

    def hypothetical_rows(self):
        self.expect_kw("ROWS", "ROW")
        if self.accept_kw("WITH"):
            self.expect_kw("VALUES")
        self.expect_sym("(")
        rows = [self.value_group()]
        while self.accept_sym(","):
            rows.append(self.value_group())
        self.expect_sym(")")
        return tuple(rows)

    def value_group(self):
        self.expect_sym("(")
        pairs = [self.value_pair()]
        while not self.cur.is_sym(")"):
            self.accept_sym(",")  # commas between pairs are optional
            if self.cur.is_sym(")"):
                break
            pairs.append(self.value_pair())
        self.expect_sym(")")
        return tuple(pairs)

    def value_pair(self):
        name = self.expect_name()
        self.expect_sym("=")
        return (name, self.literal())


def parse(text_or_tokens):
    """Parse one statement; trailing semicolon tolerated."""
    tokens = text_or_tokens
    if isinstance(tokens, str):
        tokens = tokenize(tokens)
    p = _Parser(tokens)
    stmt = p.statement()
    p.accept_sym(";")
    if p.cur.kind != "EOF":
        p.error("end of statement")
    return stmt


def parse_script(text: str):
    """Parse a ';'-separated sequence of statements; semicolons inside
    parentheses (schema directives) do not terminate a statement."""
    tokens = tokenize(text)
    statements = []
    chunk = []
    depth = 0
    for tok in tokens:
        if tok.kind == "EOF":
            break
        if tok.is_sym("("):
            depth += 1
        elif tok.is_sym(")"):
            depth -= 1
        if tok.is_sym(";") and depth == 0:
            if chunk:
                statements.append(chunk)
                chunk = []
            continue
        chunk.append(tok)
    if chunk:
        statements.append(chunk)
    eof = tokens[-1]
    out = []
    for chunk in statements:
        p = _Parser(chunk + [eof])
        stmt = p.statement()
        if p.cur.kind != "EOF":
            p.error("end of statement")
        out.append(stmt)
    return out
