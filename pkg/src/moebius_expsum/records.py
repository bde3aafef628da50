"""CSV / JSON encoding of result rows.

Every record type has a fixed, ordered column schema.  CSV files open with
the version line ``# moebius-expsum v1``; JSON files are a single object
``{"config": ..., "rows": [...]}``.  Both decode back to the same typed rows.
"""
from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction

VERSION_LINE = "# moebius-expsum v1"

# column name -> kind; kinds: int, float, bool, str, frac
SCHEMAS = {
    "sum": [("x", "int"), ("re", "float"), ("im", "float"), ("abs", "float"),
            ("err_bound", "float"), ("terms", "int")],
    "decompose": [("x", "int"), ("M", "int"), ("N", "int"), ("variant", "str"),
                  ("s_re", "float"), ("s_im", "float"), ("t1_re", "float"), ("t1_im", "float"),
                  ("t2_re", "float"), ("t2_im", "float"), ("sM_re", "float"), ("sM_im", "float"),
                  ("sN_re", "float"), ("sN_im", "float"), ("residual", "float"),
                  ("err_budget", "float")],
    "convergents": [("index", "int"), ("a", "int"), ("p", "int"), ("q", "int")],
    "select-q": [("x", "int"), ("tau", "frac"), ("i", "int"), ("q_prev", "int"), ("q", "int"),
                 ("xrange_ok", "bool"), ("approx_ok", "bool")],
    "sweep": [("x", "int"), ("M", "int"), ("abs_sum", "float"), ("emp_exponent", "float"),
              ("pred_exponent", "float"), ("eta", "float"), ("tau", "frac"), ("q", "int"),
              ("xrange_ok", "bool"), ("approx_ok", "bool"), ("t1_bound", "float"),
              ("t2_bound", "float"), ("lemma1_ratio", "float"), ("lemma2_ratio", "float"),
              ("error", "str")],
    "lemma1": [("x", "int"), ("M", "int"), ("q", "int"), ("lhs", "float"), ("rhs", "float"),
               ("ratio", "float"), ("lhs_err", "float")],
    "lemma2": [("x", "int"), ("M", "int"), ("N", "int"), ("q", "int"), ("seq", "str"),
               ("lhs", "float"), ("rhs", "float"), ("ratio", "float"), ("lhs_err", "float")],
    "plot-data": [("log10_x", "float"), ("log10_abs", "float"), ("pred_line", "float")],
}


def _to_text(value, kind):
    if value is None:
        return ""
    if kind == "bool":
        return "true" if value else "false"
    if kind == "float":
        return repr(float(value))
    if kind == "frac":
        return str(Fraction(value))
    return str(value)


def _from_text(text, kind):
    if text == "":
        return None
    if kind == "int":
        return int(text)
    if kind == "float":
        return float(text)
    if kind == "bool":
        if text not in ("true", "false"):
            raise ValueError(f"bad boolean {text!r}")
        return text == "true"
    if kind == "frac":
        return Fraction(text)
    return text


def _to_json(value, kind):
    if value is None:
        return None
    if kind == "float":
        v = float(value)
        return v if math.isfinite(v) else repr(v)
    if kind == "frac":
        return str(Fraction(value))
    if kind == "int":
        return int(value)
    return value


def _from_json(value, kind):
    if value is None:
        return None
    if kind == "float":
        return float(value)
    if kind == "frac":
        return Fraction(value)
    return value


def normalize(rows, record_type):
    """Keep only schema columns, coerced to their canonical Python types."""
    schema = SCHEMAS[record_type]
    return [{name: _from_text(_to_text(row.get(name), kind), kind) for name, kind in schema}
            for row in rows]


def dumps_csv(rows, record_type) -> str:
    schema = SCHEMAS[record_type]
    buf = io.StringIO()
    buf.write(VERSION_LINE + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([name for name, _ in schema])
    for row in rows:
        w.writerow([_to_text(row.get(name), kind) for name, kind in schema])
    return buf.getvalue()


def loads_csv(text, record_type):
    schema = SCHEMAS[record_type]
    lines = text.splitlines()
    if not lines or lines[0] != VERSION_LINE:
        raise ValueError("missing version line")
    reader = csv.reader(lines[1:])
    header = next(reader)
    if header != [name for name, _ in schema]:
        raise ValueError(f"unexpected columns {header}")
    return [{name: _from_text(cell, kind) for (name, kind), cell in zip(schema, line)}
            for line in reader]


def dumps_json(rows, record_type, config) -> str:
    schema = SCHEMAS[record_type]
    payload = {"config": config,
               "rows": [{name: _to_json(row.get(name), kind) for name, kind in schema}
                        for row in rows]}
    return json.dumps(payload, indent=1, sort_keys=False) + "\n"


def loads_json(text, record_type):
    schema = SCHEMAS[record_type]
    payload = json.loads(text)
    return payload["config"], [{name: _from_json(row[name], kind) for name, kind in schema}
                               for row in payload["rows"]]
