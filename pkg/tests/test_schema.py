import pytest
import yaml
from hypothesis import given, settings
from hypothesis import strategies as st

from pdd.errors import (
    DuplicateAttribute,
    EmptyFile,
    HeaderMismatch,
    InvalidValue,
    SchemaParseError,
    UnknownKind,
)
from pdd.schema import AttributeSchema, dump_schema, load_schema, load_table, parse_schema

from conftest import DATA_DIR


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


GRADE_SCHEMA = """
attributes:
  - {name: Grade, kind: categorical, values: [G9, G10, G11, G12]}
  - {name: Drink, kind: boolean, values: ["Yes", "No"]}
"""


def test_reference_schema_has_31_attributes_and_cannabis_target():
    attrs = load_schema(DATA_DIR / "compass_schema.yaml")
    assert len(attrs) == 31
    cannabis = attrs[0]
    assert cannabis.name == "Cannabis"
    assert cannabis.role == "target"
    assert cannabis.kind == "ordinal"
    assert cannabis.allowed_values == tuple(str(v) for v in range(1, 10))
    assert [a.role for a in attrs].count("target") == 1


def test_empty_schema_is_accepted(tmp_path):
    assert load_schema(write(tmp_path, "s.yaml", "attributes: []\n")) == []
    assert load_schema(write(tmp_path, "e.yaml", "")) == []


def test_duplicate_attribute_rejected(tmp_path):
    text = "attributes:\n  - {name: Drink, kind: boolean}\n  - {name: Drink, kind: ordinal, values: [a, b]}\n"
    with pytest.raises(DuplicateAttribute):
        load_schema(write(tmp_path, "s.yaml", text))


def test_unknown_kind_and_unordered_ordinal(tmp_path):
    with pytest.raises(UnknownKind):
        load_schema(write(tmp_path, "a.yaml", "attributes:\n  - {name: X, kind: interval}\n"))
    with pytest.raises(SchemaParseError):
        load_schema(write(tmp_path, "b.yaml", "attributes:\n  - {name: X, kind: ordinal}\n"))


def test_unparseable_schema(tmp_path):
    with pytest.raises(SchemaParseError):
        load_schema(write(tmp_path, "bad.yaml", "attributes: [\n"))
    with pytest.raises(SchemaParseError):
        load_schema(write(tmp_path, "list.yaml", "- a\n- b\n"))


def test_schema_dump_round_trip(tmp_path):
    attrs = load_schema(DATA_DIR / "compass_schema.yaml")
    out = tmp_path / "copy.yaml"
    dump_schema(attrs, out)
    assert load_schema(out) == attrs


def test_incomplete_row_is_dropped(tmp_path):
    csv = "Grade,Drink\nG9,Yes\nG10,No\n,Yes\nG11,No\nG12,Yes\n"
    schema = parse_schema(yaml.safe_load(GRADE_SCHEMA))
    table = load_table(write(tmp_path, "d.csv", csv), schema)
    assert (table.M, table.dropped, table.raw_rows) == (4, 1, 5)
    assert table.columns["Grade"] == ("G9", "G10", "G11", "G12")
    assert list(table.record_ids) == [0, 1, 2, 3]


def test_complete_rows_kept_and_header_order_free(tmp_path):
    csv = "Drink,Grade\nYes,G9\nNo,G12\nNo,G10\n"
    schema = parse_schema(yaml.safe_load(GRADE_SCHEMA))
    table = load_table(write(tmp_path, "d.csv", csv), schema)
    assert table.M == 3 and table.dropped == 0
    assert table.names == ("Grade", "Drink")
    assert next(table.records()) == {"Grade": "G9", "Drink": "Yes"}


def test_out_of_range_value_names_row_and_column(tmp_path):
    csv = "Grade,Drink\nG9,Yes\nG13,No\nG10,No\n"
    schema = parse_schema(yaml.safe_load(GRADE_SCHEMA))
    with pytest.raises(InvalidValue) as err:
        load_table(write(tmp_path, "d.csv", csv), schema)
    assert err.value.row == 2
    assert err.value.column == "Grade"
    assert "row 2" in str(err.value) and "'Grade'" in str(err.value)


def test_header_mismatch_and_empty_file(tmp_path):
    schema = parse_schema(yaml.safe_load(GRADE_SCHEMA))
    with pytest.raises(HeaderMismatch):
        load_table(write(tmp_path, "h.csv", "Grade,Smoke\nG9,Yes\n"), schema)
    with pytest.raises(EmptyFile):
        load_table(write(tmp_path, "e.csv", ""), schema)


def test_numeric_cells_validated(tmp_path):
    schema = [AttributeSchema("Score", kind="numerical")]
    with pytest.raises(InvalidValue):
        load_table(write(tmp_path, "n.csv", "Score\n1.5\nabc\n"), schema)
    with pytest.raises(InvalidValue):
        load_table(write(tmp_path, "i.csv", "Score\ninf\n"), schema)
    table = load_table(write(tmp_path, "ok.csv", "Score\n1.5\n-9\n3\n"), schema)
    assert table.columns["Score"] == ("1.5", "3") and table.dropped == 1


def test_custom_missing_tokens(tmp_path):
    doc = {"missing_tokens": ["?"], "attributes": [{"name": "A"}, {"name": "B", "missing_tokens": []}]}
    schema = parse_schema(doc)
    table = load_table(write(tmp_path, "m.csv", "A,B\nx,\n?,y\nNA,z\n"), schema)
    assert table.columns == {"A": ("x", "NA"), "B": ("", "z")}
    assert table.dropped == 1


cell = st.sampled_from(["a", "b", "c", "", "NA", "."])


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(cell, cell), max_size=30))
def test_complete_case_conservation(tmp_path_factory, rows):
    path = tmp_path_factory.mktemp("cc") / "t.csv"
    path.write_text("A,B\n" + "".join(f"{a},{b}\n" for a, b in rows), encoding="utf-8")
    schema = [AttributeSchema("A"), AttributeSchema("B")]
    table = load_table(path, schema)
    assert table.M + table.dropped == len(rows)
    for rec in table.records():
        assert not any(v in schema[0].missing_tokens for v in rec.values())
    assert load_table(path, schema) == table
