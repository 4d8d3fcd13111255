import pytest
from hypothesis import given, strategies as st

from sfgen.xmlsubset import ParseError, parse_document


def test_minimal_document():
    root = parse_document(b"<xsource/>")
    assert root.tag == "xsource"
    assert root.children == []
    assert root.location == (1, 1)


def test_entity_fragment():
    doc = """<xsource><EntityConfig>
<Entity tableName="Fakultet" name="Fakultet" isLogged="true">
  <Constraint type="Unique"><CField name="strName" /></Constraint>
</Entity>
</EntityConfig></xsource>""".encode()
    root = parse_document(doc)
    entity = root.children[0].children[0]
    assert entity.tag == "Entity"
    assert entity.attributes["name"] == "Fakultet"
    assert entity.attributes["isLogged"] == "true"
    assert entity.find("Constraint").attributes["type"] == "Unique"
    assert entity.location == (2, 1)


def test_unclosed_element():
    with pytest.raises(ParseError) as exc:
        parse_document(b"<a>")
    assert (exc.value.line, exc.value.column) == (1, 1)
    assert "unclosed" in exc.value.reason


def test_mismatched_close_tag():
    with pytest.raises(ParseError, match="mismatched"):
        parse_document(b"<a><b></a></a>")


def test_predefined_entities_decoded():
    root = parse_document(b'<a v="&lt;&gt;&amp;&quot;&apos;">x &amp; y</a>')
    assert root.attributes["v"] == "<>&\"'"
    assert root.text == "x & y"


@pytest.mark.parametrize("payload", [b"<a>&nbsp;</a>", b"<a>&#65;</a>", b"<a>&broken</a>"])
def test_undefined_entities_rejected(payload):
    with pytest.raises(ParseError, match="entity"):
        parse_document(payload)


@pytest.mark.parametrize(
    "payload,needle",
    [
        (b"<!DOCTYPE html><a/>", "DOCTYPE"),
        (b"<a><![CDATA[x]]></a>", "CDATA"),
        (b"<a><?php ?></a>", "processing instruction"),
        (b"<ns:a/>", "namespace"),
        (b'<a ns:x="1"/>', "namespace"),
    ],
)
def test_disallowed_constructs(payload, needle):
    with pytest.raises(ParseError, match=needle):
        parse_document(payload)


def test_xml_declaration_and_comments_discarded():
    root = parse_document(b"<?xml version='1.0'?><!-- top --><a><!-- in -->text</a><!-- after -->")
    assert root.tag == "a"
    assert root.text == "text"


def test_single_and_double_quoted_attributes():
    root = parse_document(b"<a x='1' y=\"2\"/>")
    assert root.attributes == {"x": "1", "y": "2"}


def test_duplicate_attribute_rejected():
    with pytest.raises(ParseError, match="duplicate attribute"):
        parse_document(b'<a x="1" x="2"/>')


def test_content_after_root_rejected():
    with pytest.raises(ParseError, match="after the root"):
        parse_document(b"<a/><b/>")


def test_attribute_locations_are_tracked():
    root = parse_document(b'<a\n  first="1"\n  second="2"/>')
    assert root.attribute_locations["first"] == (2, 3)
    assert root.attribute_locations["second"] == (3, 3)


def test_non_utf8_rejected():
    with pytest.raises(ParseError, match="UTF-8"):
        parse_document(b"<a>\xff\xfe</a>")


@given(st.binary(max_size=200))
def test_total_over_byte_sequences(data):
    # any input either parses to a tree or raises a located ParseError
    try:
        root = parse_document(data)
        assert root.tag
    except ParseError as exc:
        assert exc.line >= 1 and exc.column >= 1


@given(st.text(alphabet="abc<>&\"' \n", max_size=40))
def test_attribute_value_roundtrip(value):
    encoded = (value.replace("&", "&amp;").replace("<", "&lt;").replace('"', "&quot;"))
    root = parse_document(f'<a v="{encoded}"/>'.encode())
    assert root.attributes["v"] == value
