"""Minimal XML parser for model documents.

Accepts the constrained subset the modeling language actually uses: elements,
single- or double-quoted attributes, character data, comments, an optional XML
declaration, and the five predefined entities. DOCTYPE, CDATA, processing
instructions, numeric character references and namespace prefixes are rejected
with a located error.
"""

from __future__ import annotations

import re
from bisect import bisect_right
from dataclasses import dataclass, field

NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_.\-]*")
ENTITY_RE = re.compile(r"&([A-Za-z]+);")
PREDEFINED_ENTITIES = {"lt": "<", "gt": ">", "amp": "&", "quot": '"', "apos": "'"}
WHITESPACE = " \t\r\n"


class ParseError(Exception):
    def __init__(self, line: int, column: int, reason: str):
        super().__init__(f"{line}:{column}: {reason}")
        self.line = line
        self.column = column
        self.reason = reason


@dataclass
class XmlNode:
    tag: str
    attributes: dict[str, str] = field(default_factory=dict)
    children: list["XmlNode"] = field(default_factory=list)
    text: str = ""
    location: tuple[int, int] = (1, 1)
    attribute_locations: dict[str, tuple[int, int]] = field(default_factory=dict)

    def find(self, tag: str) -> "XmlNode | None":
        for child in self.children:
            if child.tag == tag:
                return child
        return None

    def find_all(self, tag: str) -> list["XmlNode"]:
        return [child for child in self.children if child.tag == tag]


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        # offsets of line starts, for O(log n) location lookup
        self.line_starts = [0]
        for i, ch in enumerate(text):
            if ch == "\n":
                self.line_starts.append(i + 1)

    def location(self, pos: int | None = None) -> tuple[int, int]:
        if pos is None:
            pos = self.pos
        line = bisect_right(self.line_starts, pos)
        return line, pos - self.line_starts[line - 1] + 1

    def fail(self, reason: str, pos: int | None = None) -> ParseError:
        line, column = self.location(pos)
        return ParseError(line, column, reason)

    def eof(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self, s: str) -> bool:
        return self.text.startswith(s, self.pos)

    def expect(self, s: str, what: str) -> None:
        if not self.peek(s):
            raise self.fail(f"expected {what}")
        self.pos += len(s)

    def skip_whitespace(self) -> None:
        while not self.eof() and self.text[self.pos] in WHITESPACE:
            self.pos += 1

    def skip_misc(self) -> None:
        """Whitespace and comments between markup."""
        while True:
            self.skip_whitespace()
            if self.peek("<!--"):
                self.read_comment()
            else:
                return

    def read_comment(self) -> None:
        start = self.pos
        end = self.text.find("-->", self.pos + 4)
        if end < 0:
            raise self.fail("unterminated comment", start)
        self.pos = end + 3

    def read_name(self, what: str) -> str:
        m = NAME_RE.match(self.text, self.pos)
        if m is None:
            raise self.fail(f"expected {what}")
        if m.end() < len(self.text) and self.text[m.end()] == ":":
            raise self.fail(f"namespace prefixes are not allowed in {what}")
        self.pos = m.end()
        return m.group()

    def decode_text(self, raw: str, pos: int) -> str:
        out: list[str] = []
        i = 0
        while True:
            amp = raw.find("&", i)
            if amp < 0:
                out.append(raw[i:])
                return "".join(out)
            out.append(raw[i:amp])
            m = ENTITY_RE.match(raw, amp)
            if m is None or m.group(1) not in PREDEFINED_ENTITIES:
                raise self.fail("undefined or malformed entity reference", pos + amp)
            out.append(PREDEFINED_ENTITIES[m.group(1)])
            i = m.end()

    def parse_declaration(self) -> None:
        if self.peek("<?xml"):
            end = self.text.find("?>", self.pos)
            if end < 0:
                raise self.fail("unterminated XML declaration")
            self.pos = end + 2

    def parse_element(self) -> XmlNode:
        start = self.pos
        self.expect("<", "element")
        tag = self.read_name("element name")
        node = XmlNode(tag=tag, location=self.location(start))

        while True:
            self.skip_whitespace()
            if self.peek("/>"):
                self.pos += 2
                return node
            if self.peek(">"):
                self.pos += 1
                break
            attr_pos = self.pos
            name = self.read_name("attribute name")
            if name in node.attributes:
                raise self.fail(f"duplicate attribute '{name}'", attr_pos)
            self.skip_whitespace()
            self.expect("=", "'=' after attribute name")
            self.skip_whitespace()
            if self.eof() or self.text[self.pos] not in "'\"":
                raise self.fail("expected quoted attribute value")
            quote = self.text[self.pos]
            self.pos += 1
            value_start = self.pos
            end = self.text.find(quote, self.pos)
            if end < 0:
                raise self.fail("unterminated attribute value", value_start)
            raw = self.text[value_start:end]
            if "<" in raw:
                raise self.fail("'<' in attribute value", value_start + raw.index("<"))
            node.attributes[name] = self.decode_text(raw, value_start)
            node.attribute_locations[name] = self.location(attr_pos)
            self.pos = end + 1

        # content until matching close tag
        text_parts: list[str] = []
        while True:
            if self.eof():
                raise self.fail(f"unclosed element '{tag}'", start)
            lt = self.text.find("<", self.pos)
            if lt < 0:
                raise self.fail(f"unclosed element '{tag}'", start)
            if lt > self.pos:
                text_parts.append(self.decode_text(self.text[self.pos:lt], self.pos))
                self.pos = lt
            if self.peek("</"):
                self.pos += 2
                close = self.read_name("closing tag name")
                if close != tag:
                    raise self.fail(f"mismatched closing tag '</{close}>' for '<{tag}>'")
                self.skip_whitespace()
                self.expect(">", "'>' after closing tag")
                node.text = "".join(text_parts)
                return node
            if self.peek("<!--"):
                self.read_comment()
            elif self.peek("<![CDATA["):
                raise self.fail("CDATA sections are not allowed")
            elif self.peek("<!"):
                raise self.fail("DOCTYPE and markup declarations are not allowed")
            elif self.peek("<?"):
                raise self.fail("processing instructions are not allowed")
            else:
                node.children.append(self.parse_element())


def parse_document(data: bytes) -> XmlNode:
    """Parse a UTF-8 document into its root element.

    Raises ParseError with a 1-based (line, column) on any input outside the
    accepted subset.
    """
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ParseError(1, 1, f"input is not valid UTF-8: {exc.reason}") from None
    if text.startswith("﻿"):
        text = text[1:]

    parser = _Parser(text)
    parser.parse_declaration()
    parser.skip_misc()
    if parser.eof():
        raise parser.fail("document has no root element")
    if parser.peek("<!"):
        raise parser.fail("DOCTYPE and markup declarations are not allowed")
    if parser.peek("<?"):
        raise parser.fail("processing instructions are not allowed")
    if not parser.peek("<"):
        raise parser.fail("content before the root element")
    root = parser.parse_element()
    parser.skip_misc()
    if not parser.eof():
        raise parser.fail("content after the root element")
    return root
