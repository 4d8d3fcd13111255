"""The artifact template language (ATL): a small text-generation language with
output expressions, loops and conditionals evaluated over a bound model.

Syntax: literal text, `{{ expr }}` output, `{% for x in expr %}...{% endfor %}`,
`{% if %}/{% elif %}/{% else %}/{% endif %}`, `{# comment #}`, and trim markers
`{{-`/`-}}`/`{%-`/`-%}` which strip adjacent horizontal whitespace plus at most
one newline. Rendering is pure: the same AST and context always produce the
same text, and the context is never mutated.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field as dc_field
from typing import Any, Callable, Mapping, Optional, Sequence, Union

from . import model as m

Pos = tuple[int, int]


class TemplateSyntaxError(Exception):
    def __init__(self, name: str, line: int, column: int, reason: str):
        super().__init__(f"{name}:{line}:{column}: {reason}")
        self.name = name
        self.line = line
        self.column = column
        self.reason = reason


class TemplateRuntimeError(Exception):
    def __init__(self, name: str, line: int, column: int, reason: str):
        super().__init__(f"{name}:{line}:{column}: {reason}")
        self.name = name
        self.line = line
        self.column = column
        self.reason = reason


# ---------------------------------------------------------------------------
# expression AST

@dataclass(frozen=True)
class Lit:
    value: Any
    pos: Pos


@dataclass(frozen=True)
class Path:
    names: tuple[str, ...]
    pos: Pos


@dataclass(frozen=True)
class Call:
    func: str
    args: tuple["Expr", ...]
    pos: Pos


@dataclass(frozen=True)
class Unary:
    op: str  # 'not'
    operand: "Expr"
    pos: Pos


@dataclass(frozen=True)
class Binary:
    op: str  # and or == != < <= > >=
    left: "Expr"
    right: "Expr"
    pos: Pos


Expr = Union[Lit, Path, Call, Unary, Binary]


# ---------------------------------------------------------------------------
# template AST

@dataclass(frozen=True)
class TextNode:
    text: str
    pos: Pos


@dataclass(frozen=True)
class OutputNode:
    expr: Expr
    pos: Pos


@dataclass(frozen=True)
class ForNode:
    var: str
    expr: Expr
    body: tuple["TplNode", ...]
    pos: Pos


@dataclass(frozen=True)
class IfNode:
    branches: tuple[tuple[Expr, tuple["TplNode", ...]], ...]
    else_body: Optional[tuple["TplNode", ...]]
    pos: Pos


TplNode = Union[TextNode, OutputNode, ForNode, IfNode]


@dataclass(frozen=True)
class TemplateAst:
    name: str
    nodes: tuple[TplNode, ...]


# ---------------------------------------------------------------------------
# expression parsing

_TOKEN_RE = re.compile(
    r"""\s+
      | ==|!=|<=|>=|<|>
      | \(|\)|,|\.
      | \d+
      | '[^']*'|"[^"]*"
      | [A-Za-z_][A-Za-z0-9_]*
    """,
    re.VERBOSE,
)

_COMPARE_OPS = {"==", "!=", "<", "<=", ">", ">="}


class _ExprParser:
    def __init__(self, source: str, name: str, base: Pos):
        self.name = name
        self.base = base  # template position of source[0]
        self.tokens: list[tuple[str, int]] = []
        pos = 0
        while pos < len(source):
            match = _TOKEN_RE.match(source, pos)
            if match is None:
                raise self.error(f"unexpected character {source[pos]!r}", pos)
            if not match.group().isspace():
                self.tokens.append((match.group(), pos))
            pos = match.end()
        self.source = source
        self.index = 0

    def pos_of(self, offset: int) -> Pos:
        line, col = self.base
        for ch in self.source[:offset]:
            if ch == "\n":
                line += 1
                col = 1
            else:
                col += 1
        return line, col

    def error(self, reason: str, offset: int) -> TemplateSyntaxError:
        line, col = self.pos_of(offset)
        return TemplateSyntaxError(self.name, line, col, reason)

    def peek(self) -> Optional[str]:
        return self.tokens[self.index][0] if self.index < len(self.tokens) else None

    def next(self) -> tuple[str, int]:
        if self.index >= len(self.tokens):
            raise self.error("unexpected end of expression", len(self.source))
        token = self.tokens[self.index]
        self.index += 1
        return token

    def expect(self, token: str) -> int:
        got, offset = self.next()
        if got != token:
            raise self.error(f"expected {token!r}, got {got!r}", offset)
        return offset

    def parse(self) -> Expr:
        expr = self.parse_or()
        if self.index < len(self.tokens):
            token, offset = self.tokens[self.index]
            raise self.error(f"unexpected {token!r}", offset)
        return expr

    def parse_or(self) -> Expr:
        left = self.parse_and()
        while self.peek() == "or":
            _, offset = self.next()
            left = Binary("or", left, self.parse_and(), self.pos_of(offset))
        return left

    def parse_and(self) -> Expr:
        left = self.parse_not()
        while self.peek() == "and":
            _, offset = self.next()
            left = Binary("and", left, self.parse_not(), self.pos_of(offset))
        return left

    def parse_not(self) -> Expr:
        if self.peek() == "not":
            _, offset = self.next()
            return Unary("not", self.parse_not(), self.pos_of(offset))
        return self.parse_comparison()

    def parse_comparison(self) -> Expr:
        left = self.parse_primary()
        if self.peek() in _COMPARE_OPS:
            op, offset = self.next()
            return Binary(op, left, self.parse_primary(), self.pos_of(offset))
        return left

    def parse_primary(self) -> Expr:
        token, offset = self.next()
        pos = self.pos_of(offset)
        if token == "(":
            inner = self.parse_or()
            self.expect(")")
            return inner
        if token.isdigit():
            return Lit(int(token), pos)
        if token[0] in "'\"":
            return Lit(token[1:-1], pos)
        if token == "true":
            return Lit(True, pos)
        if token == "false":
            return Lit(False, pos)
        if re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", token):
            if self.peek() == "(":
                self.next()
                args: list[Expr] = []
                if self.peek() != ")":
                    args.append(self.parse_or())
                    while self.peek() == ",":
                        self.next()
                        args.append(self.parse_or())
                self.expect(")")
                return Call(token, tuple(args), pos)
            names = [token]
            while self.peek() == ".":
                self.next()
                part, part_offset = self.next()
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", part):
                    raise self.error(f"expected attribute name after '.', got {part!r}", part_offset)
                names.append(part)
            return Path(tuple(names), pos)
        raise self.error(f"unexpected {token!r}", offset)


def parse_expr(source: str, name: str = "<expr>", base: Pos = (1, 1)) -> Expr:
    return _ExprParser(source, name, base).parse()


# ---------------------------------------------------------------------------
# template parsing

_TAG_OPEN_RE = re.compile(r"\{\{-?|\{%-?|\{#")
_LTRIM_RE = re.compile(r"(?:[ \t]*\n)?[ \t]*\Z")
_RTRIM_RE = re.compile(r"\A[ \t]*(?:\n[ \t]*)?")


def _line_col(source: str, offset: int) -> Pos:
    line = source.count("\n", 0, offset) + 1
    start = source.rfind("\n", 0, offset) + 1
    return line, offset - start + 1


def parse_template(source: str, name: str) -> TemplateAst:
    """Parse ATL source into an immutable AST; literal text is preserved
    byte-exactly except where trim markers apply."""
    # frames: (kind, pos, extra) where extra holds partial if/for state
    root: list[TplNode] = []
    stack: list[dict[str, Any]] = [{"kind": "root", "body": root}]
    pos = 0
    pending_rtrim = False

    def err(reason: str, offset: int) -> TemplateSyntaxError:
        line, col = _line_col(source, offset)
        return TemplateSyntaxError(name, line, col, reason)

    def emit_text(text: str, offset: int) -> None:
        nonlocal pending_rtrim
        if pending_rtrim:
            text = _RTRIM_RE.sub("", text, count=1)
            pending_rtrim = False
        if text:
            stack[-1]["body"].append(TextNode(text, _line_col(source, offset)))

    def apply_ltrim() -> None:
        body = stack[-1]["body"]
        if body and isinstance(body[-1], TextNode):
            trimmed = _LTRIM_RE.sub("", body[-1].text, count=1)
            if trimmed:
                body[-1] = TextNode(trimmed, body[-1].pos)
            else:
                body.pop()

    while pos < len(source):
        match = _TAG_OPEN_RE.search(source, pos)
        if match is None:
            emit_text(source[pos:], pos)
            break
        emit_text(source[pos:match.start()], pos)
        tag = match.group()
        tag_pos = _line_col(source, match.start())

        if tag == "{#":
            end = source.find("#}", match.end())
            if end < 0:
                raise err("unterminated comment", match.start())
            pos = end + 2
            continue

        if tag.startswith("{{"):
            close = re.compile(r"-?\}\}").search(source, match.end())
            if close is None:
                raise err("unterminated output expression", match.start())
            if tag.endswith("-"):
                apply_ltrim()
            inner = source[match.end():close.start()]
            expr = parse_expr(inner, name, _line_col(source, match.end()))
            stack[-1]["body"].append(OutputNode(expr, tag_pos))
            pending_rtrim = close.group().startswith("-")
            pos = close.end()
            continue

        # {% directive %}
        close = re.compile(r"-?%\}").search(source, match.end())
        if close is None:
            raise err("unterminated directive", match.start())
        if tag.endswith("-"):
            apply_ltrim()
        inner = source[match.end():close.start()].strip()
        inner_pos = _line_col(source, match.end())
        pending_rtrim = close.group().startswith("-")
        pos = close.end()

        word = inner.split(None, 1)[0] if inner else ""
        rest = inner[len(word):].strip()

        if word == "for":
            m_for = re.fullmatch(r"([A-Za-z_][A-Za-z0-9_]*)\s+in\s+(.+)", rest, re.DOTALL)
            if m_for is None:
                raise err("malformed for directive; expected 'for NAME in EXPR'", match.start())
            expr = parse_expr(m_for.group(2), name, inner_pos)
            stack.append({"kind": "for", "var": m_for.group(1), "expr": expr,
                          "pos": tag_pos, "body": []})
        elif word == "endfor":
            if stack[-1]["kind"] != "for":
                raise err("'endfor' without matching 'for'", match.start())
            frame = stack.pop()
            stack[-1]["body"].append(
                ForNode(frame["var"], frame["expr"], tuple(frame["body"]), frame["pos"]))
        elif word == "if":
            expr = parse_expr(rest, name, inner_pos)
            stack.append({"kind": "if", "pos": tag_pos, "branches": [],
                          "current_expr": expr, "body": [], "in_else": False})
        elif word == "elif":
            frame = stack[-1]
            if frame["kind"] != "if" or frame["in_else"]:
                raise err("'elif' without matching 'if'", match.start())
            frame["branches"].append((frame["current_expr"], tuple(frame["body"])))
            frame["current_expr"] = parse_expr(rest, name, inner_pos)
            frame["body"] = []
        elif word == "else":
            frame = stack[-1]
            if frame["kind"] != "if" or frame["in_else"] or rest:
                raise err("'else' without matching 'if'", match.start())
            frame["branches"].append((frame["current_expr"], tuple(frame["body"])))
            frame["body"] = []
            frame["in_else"] = True
        elif word == "endif":
            frame = stack[-1]
            if frame["kind"] != "if":
                raise err("'endif' without matching 'if'", match.start())
            stack.pop()
            if frame["in_else"]:
                else_body: Optional[tuple[TplNode, ...]] = tuple(frame["body"])
                branches = tuple(frame["branches"])
            else:
                else_body = None
                branches = tuple(frame["branches"]) + ((frame["current_expr"], tuple(frame["body"])),)
            stack[-1]["body"].append(IfNode(branches, else_body, frame["pos"]))
        else:
            raise err(f"unknown directive '{word}'", match.start())

    if len(stack) > 1:
        frame = stack[-1]
        line, col = frame["pos"]
        raise TemplateSyntaxError(name, line, col, f"unclosed '{frame['kind']}' block")
    return TemplateAst(name, tuple(root))


# ---------------------------------------------------------------------------
# values

class ModelNode:
    """Read-only view of a model element for template field access.

    Unknown or absent attributes yield Null (None); computed attributes expose
    the derived sequences templates need (effective columns, resolved
    constraint fields, filtered field lists).
    """

    __slots__ = ("obj", "model", "owner")

    def __init__(self, obj: Any, app_model: Optional[m.ApplicationModel] = None,
                 owner: Optional[m.Entity] = None):
        self.obj = obj
        self.model = app_model
        self.owner = owner

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ModelNode) and self.obj == other.obj

    def __hash__(self) -> int:
        return hash(id(self.obj))

    def get(self, name: str) -> Any:
        computed = getattr(self, f"_get_{type(self.obj).__name__.lower()}", None)
        if computed is not None:
            value = computed(name)
            if value is not _MISSING:
                return value
        return self._convert(getattr(self.obj, name, None))

    def _convert(self, value: Any, owner: Optional[m.Entity] = None) -> Any:
        if isinstance(value, (m.FieldType, m.RelationshipOp, m.ConstraintKind, m.Caching)):
            return value.value
        if isinstance(value, tuple) and not isinstance(value, str):
            return [self._convert(v, owner) for v in value]
        if isinstance(value, (m.Entity, m.Field, m.Constraint, m.ColumnSpec,
                              m.Settings, m.LocalizedText, m.ApplicationModel)):
            return ModelNode(value, self.model, owner)
        return value

    # -- computed attributes -------------------------------------------------

    def _get_applicationmodel(self, name: str) -> Any:
        model: m.ApplicationModel = self.obj
        if name == "entities":
            return [ModelNode(e, model, e) for e in model.entities]
        if name == "active_entities":
            return [ModelNode(e, model, e) for e in model.entities if e.isActive]
        if name == "languages":
            return list(model.languages)
        if name == "settings":
            return ModelNode(model.settings, model)
        return _MISSING

    def _get_entity(self, name: str) -> Any:
        entity: m.Entity = self.obj
        if name == "fields":
            return [ModelNode(f, self.model, entity) for f in entity.fields]
        if name == "constraints":
            return [ModelNode(c, self.model, entity) for c in entity.constraints]
        if name == "columns":
            return [ModelNode(c, self.model, entity) for c in m.effective_columns(entity)]
        if name == "pk":
            for field in entity.fields:
                if field.isPK:
                    return ModelNode(field, self.model, entity)
            return None
        if name == "insert_columns":
            return [ModelNode(c, self.model, entity)
                    for c in m.effective_columns(entity) if not c.identity]
        if name == "update_columns":
            pk_names = {f.name for f in entity.fields if f.isPK}
            return [ModelNode(c, self.model, entity)
                    for c in m.effective_columns(entity)
                    if not c.identity and c.name not in pk_names]
        if name == "edit_fields":
            return [ModelNode(f, self.model, entity) for f in entity.fields if f.isShownInEdit]
        if name == "list_fields":
            return [ModelNode(f, self.model, entity) for f in entity.fields if f.isShownInList]
        if name == "required_fields":
            return [ModelNode(f, self.model, entity) for f in entity.fields
                    if f.isShownInEdit and not f.nullable and not f.isIdentity]
        if name == "unique_constraints":
            return [ModelNode(c, self.model, entity) for c in entity.constraints
                    if c.kind is m.ConstraintKind.UNIQUE]
        if name == "twofields_constraints":
            return [ModelNode(c, self.model, entity) for c in entity.constraints
                    if c.kind is m.ConstraintKind.TWO_FIELDS]
        return _MISSING

    def _get_constraint(self, name: str) -> Any:
        constraint: m.Constraint = self.obj
        if name in ("fields", "first_field", "second_field", "nullable"):
            resolved: list[Optional[m.Field]] = []
            by_name = {f.name: f for f in self.owner.fields} if self.owner else {}
            for cfield in constraint.cfields:
                resolved.append(by_name.get(cfield))
            if name == "fields":
                return [ModelNode(f, self.model, self.owner) if f else None for f in resolved]
            if name == "first_field":
                return ModelNode(resolved[0], self.model, self.owner) \
                    if resolved and resolved[0] else None
            if name == "second_field":
                return ModelNode(resolved[1], self.model, self.owner) \
                    if len(resolved) > 1 and resolved[1] else None
            return any(f.nullable for f in resolved if f is not None)
        if name == "cfields":
            return list(constraint.cfields)
        return _MISSING


_MISSING = object()

Value = Union[None, bool, int, str, list, dict, ModelNode]


def wrap(obj: Any, app_model: Optional[m.ApplicationModel] = None) -> ModelNode:
    """Wrap a model element for use as a template context value."""
    if isinstance(obj, m.ApplicationModel):
        return ModelNode(obj, obj)
    owner = obj if isinstance(obj, m.Entity) else None
    return ModelNode(obj, app_model, owner)


def truthy(value: Value) -> bool:
    if value is None or value is False:
        return False
    if isinstance(value, bool):
        return value
    if isinstance(value, int):
        return value != 0
    if isinstance(value, (str, list, dict)):
        return len(value) > 0
    return True


# ---------------------------------------------------------------------------
# built-in functions

def sql_operator(rel: Union[str, m.RelationshipOp]) -> str:
    """Relationship token to SQL comparison operator."""
    token = rel.value if isinstance(rel, m.RelationshipOp) else rel
    return {
        "lt": "<", "le": "<=", "gt": ">", "ge": ">=", "neq": "<>", "eq": "=",
    }[token]


def compare_kind(field: Union[m.Field, ModelNode]) -> str:
    """Comparison family of a field: "dates" for date/datetime, else "strings"."""
    obj = field.obj if isinstance(field, ModelNode) else field
    return "dates" if obj.type in m.DATE_TYPES else "strings"


def sql_type(column: Union[m.ColumnSpec, ModelNode]) -> str:
    """DDL type of a column: bare token, with parenthesized length for sized strings."""
    obj = column.obj if isinstance(column, ModelNode) else column
    if obj.length is not None:
        return f"{obj.type.value}({obj.length})"
    return obj.type.value


def _builtin_count(seq: Value) -> int:
    if not isinstance(seq, (list, str, dict)):
        raise TypeError("count() expects a sequence")
    return len(seq)


def _builtin_coalesce(value: Value, fallback: Value) -> Value:
    return fallback if value is None else value


def _builtin_localized(node: Value, lang: Value, key: Value) -> str:
    if not isinstance(node, ModelNode) or not isinstance(node.obj, (m.Entity, m.Field, m.Constraint)):
        raise TypeError("localized() expects an entity, field or constraint")
    default_lang = node.model.settings.defaultLanguage if node.model else None
    return m.localized_text(node.obj, str(key), str(lang), default_lang)


BUILTINS: dict[str, Callable[..., Value]] = {
    "sql_operator": sql_operator,
    "compare_kind": compare_kind,
    "sql_type": sql_type,
    "count": _builtin_count,
    "lower": lambda t: str(t).lower(),
    "upper": lambda t: str(t).upper(),
    "coalesce": _builtin_coalesce,
    "localized": _builtin_localized,
}


# ---------------------------------------------------------------------------
# evaluation

class _Renderer:
    def __init__(self, name: str):
        self.name = name

    def error(self, pos: Pos, reason: str) -> TemplateRuntimeError:
        return TemplateRuntimeError(self.name, pos[0], pos[1], reason)

    def eval(self, expr: Expr, env: Mapping[str, Value]) -> Value:
        if isinstance(expr, Lit):
            return expr.value
        if isinstance(expr, Path):
            return self.eval_path(expr, env)
        if isinstance(expr, Unary):
            return not truthy(self.eval(expr.operand, env))
        if isinstance(expr, Binary):
            return self.eval_binary(expr, env)
        if isinstance(expr, Call):
            func = BUILTINS.get(expr.func)
            if func is None:
                raise self.error(expr.pos, f"unknown function '{expr.func}'")
            args = [self.eval(a, env) for a in expr.args]
            try:
                return func(*args)
            except (TypeError, KeyError, AttributeError) as exc:
                raise self.error(expr.pos, f"{expr.func}(): {exc}") from None
        raise self.error(expr.pos, "unknown expression node")

    def eval_path(self, expr: Path, env: Mapping[str, Value]) -> Value:
        head = expr.names[0]
        if head not in env:
            raise self.error(expr.pos, f"unknown name '{head}'")
        value: Value = env[head]
        for name in expr.names[1:]:
            if value is None:
                return None  # Null propagates through the rest of the path
            if isinstance(value, ModelNode):
                value = value.get(name)
            elif isinstance(value, dict):
                value = value.get(name)
            else:
                raise self.error(expr.pos,
                                 f"cannot access '.{name}' on {type(value).__name__} value")
        return value

    def eval_binary(self, expr: Binary, env: Mapping[str, Value]) -> Value:
        if expr.op == "and":
            return truthy(self.eval(expr.left, env)) and truthy(self.eval(expr.right, env))
        if expr.op == "or":
            return truthy(self.eval(expr.left, env)) or truthy(self.eval(expr.right, env))
        left = self.eval(expr.left, env)
        right = self.eval(expr.right, env)
        if expr.op in ("==", "!="):
            equal = self.values_equal(left, right)
            return equal if expr.op == "==" else not equal
        # ordering: ints with ints, text with text; Null never orders
        if left is None or right is None:
            return False
        if isinstance(left, bool) or isinstance(right, bool) \
                or not isinstance(left, (int, str)) or not isinstance(right, (int, str)) \
                or isinstance(left, int) != isinstance(right, int):
            raise self.error(expr.pos,
                             f"cannot compare {type(left).__name__} with {type(right).__name__}")
        if expr.op == "<":
            return left < right
        if expr.op == "<=":
            return left <= right
        if expr.op == ">":
            return left > right
        return left >= right

    @staticmethod
    def values_equal(left: Value, right: Value) -> bool:
        if left is None or right is None:
            return left is None and right is None
        if isinstance(left, bool) != isinstance(right, bool):
            return False
        return left == right

    def to_text(self, value: Value, pos: Pos) -> str:
        if value is None:
            return ""
        if isinstance(value, bool):
            return "true" if value else "false"
        if isinstance(value, (int, str)):
            return str(value)
        raise self.error(pos, f"cannot render a {type(value).__name__} value as text")

    def render_nodes(self, nodes: Sequence[TplNode], env: dict[str, Value],
                     out: list[str]) -> None:
        for node in nodes:
            if isinstance(node, TextNode):
                out.append(node.text)
            elif isinstance(node, OutputNode):
                out.append(self.to_text(self.eval(node.expr, env), node.pos))
            elif isinstance(node, IfNode):
                for cond, body in node.branches:
                    if truthy(self.eval(cond, env)):
                        self.render_nodes(body, env, out)
                        break
                else:
                    if node.else_body is not None:
                        self.render_nodes(node.else_body, env, out)
            elif isinstance(node, ForNode):
                seq = self.eval(node.expr, env)
                if not isinstance(seq, list):
                    raise self.error(node.pos, "for-loop expression is not a sequence")
                length = len(seq)
                saved = (env.get(node.var), node.var in env,
                         env.get("loop"), "loop" in env)
                for i, item in enumerate(seq, start=1):
                    env[node.var] = item
                    env["loop"] = {"index": i, "first": i == 1,
                                   "last": i == length, "length": length}
                    self.render_nodes(node.body, env, out)
                for key, (value, present) in (
                        (node.var, (saved[0], saved[1])), ("loop", (saved[2], saved[3]))):
                    if present:
                        env[key] = value
                    else:
                        env.pop(key, None)


def render(ast: TemplateAst, context: Mapping[str, Value]) -> str:
    """Evaluate a template over a context; deterministic and side-effect free."""
    renderer = _Renderer(ast.name)
    out: list[str] = []
    renderer.render_nodes(ast.nodes, dict(context), out)
    return "".join(out)


def eval_expr(expr: Union[Expr, str], env: Mapping[str, Value], name: str = "<expr>") -> Value:
    """Evaluate a single expression (parsed on the fly when given as text)."""
    if isinstance(expr, str):
        expr = parse_expr(expr, name)
    return _Renderer(name).eval(expr, dict(env))
