"""JSON Schemas (draft 2020-12) for every JSON document the CLI writes.

The schemas are plain dictionaries so that the package itself does not
depend on a validator; the test-suite checks outputs with ``jsonschema``.
"""

_NUMBER = {"type": "number"}
_INT = {"type": "integer"}
_VECTOR = {"type": "array", "items": _NUMBER}
_MATRIX = {"type": "array", "items": _VECTOR}
_NULLABLE_NUMBER = {"type": ["number", "null"]}


def _obj(properties, required=None, extra=False):
    return {
        "type": "object",
        "properties": properties,
        "required": list(properties) if required is None else required,
        "additionalProperties": extra,
    }


CUSTOM_POTENTIAL = _obj({
    "dimension": {"type": "integer", "minimum": 2},
    "components": {
        "type": "array",
        "items": {"type": "array", "items": _obj({
            "exponents": {"type": "array", "items": {"type": "integer", "minimum": 0}},
            "coeff": _NUMBER,
        })},
    },
})

REGION = _obj({"label": {"type": "integer", "minimum": 0},
               "rank": {"type": "integer", "minimum": 0},
               "cells": {"type": "integer", "minimum": 1}})

LEAF_SPACE_REGION = _obj({
    "label": {"type": "integer", "minimum": 0},
    "rank": {"type": "integer", "minimum": 0},
    "cells": {"type": "integer", "minimum": 1},
    "dimension": {"type": "integer", "minimum": 0},
    "note": {"type": "string"},
}, required=["label", "rank", "cells", "dimension"])

REGION_SUMMARY = _obj({
    "regions": {"type": "array", "items": REGION},
    "leaf_space": _obj({
        "regions": {"type": "array", "items": LEAF_SPACE_REGION},
        "rank_zero_regions": {"type": "integer", "minimum": 0},
        "topology": {"type": "string"},
    }),
    "grid": _obj({"lo": _VECTOR, "hi": _VECTOR, "shape": {"type": "array", "items": _INT},
                  "exclude_radius": _NUMBER}),
    "chart": {"type": "string"},
    "potential": {"type": "object"},
}, required=["regions"])

BRACKET_TABLE = _obj({
    "point": _VECTOR,
    "chart": {"type": "string"},
    "coordinates": {"type": "array", "items": {"type": "string"}},
    "theta": _MATRIX,
    "xp": _MATRIX,
    "pp": _MATRIX,
    "classification": _obj({"second_class": {"type": "integer", "minimum": 0},
                            "first_class": {"type": "integer", "minimum": 0}}),
    "degenerate": {"type": "boolean"},
}, required=["point", "chart", "theta", "xp", "pp", "classification"])

LEAF_PATH = _obj({
    "chart": {"type": "string"},
    "coordinates": {"type": "array", "items": {"type": "string"}},
    "step": _NUMBER,
    "reason": {"enum": ["max_steps", "rank_change", "chart_boundary"]},
    "points": _MATRIX,
    "eom_residual": _NULLABLE_NUMBER,
})

OPERATOR = _obj({
    "label": {"type": "string"},
    "dim": {"type": "integer", "minimum": 1},
    "re": _MATRIX,
    "im": _MATRIX,
})

CN_TABLE = _obj({
    "weight": {"type": "object"},
    "rows": {"type": "array", "items": _obj({
        "n": {"type": "integer", "minimum": 0},
        "c_n": {"type": "number", "exclusiveMinimum": 0},
        "method": {"enum": ["quadrature", "closed_form"]},
        "commutator_entry": _NULLABLE_NUMBER,
    })},
})

_RESIDUALS = _obj({"jz_ladder": {"type": "number", "minimum": 0},
                   "ladder_commutator": {"type": "number", "minimum": 0},
                   "casimir": {"type": "number", "minimum": 0}})

SU2_REPORT = _obj({
    "dimension": {"type": "integer", "minimum": 2},
    "spin": {"type": "number", "minimum": 0.5},
    "lambda_fit": _NUMBER,
    "lambda_nominal": _NUMBER,
    "residuals_fit": _RESIDUALS,
    "residuals_nominal": _RESIDUALS,
    "element_error_fit": {"type": "number", "minimum": 0},
    "ladder_ratio_nominal_error": {"type": "number", "minimum": 0},
    "dimension_law_holds": {"type": "boolean"},
    "two_j_plus_one_vs_M": _NUMBER,
})

CHECK = _obj({
    "criterion": {"type": "integer", "minimum": 1},
    "group": {"type": "string"},
    "name": {"type": "string"},
    "expected": {"type": "string"},
    "actual": {"type": "string"},
    "tolerance": {"type": "string"},
    "passed": {"type": "boolean"},
})

VERIFY_REPORT = _obj({
    "passed": {"type": "boolean"},
    "checks": {"type": "array", "items": CHECK},
})

SCHEMAS = {
    "custom_potential": CUSTOM_POTENTIAL,
    "region_summary": REGION_SUMMARY,
    "bracket_table": BRACKET_TABLE,
    "leaf_path": LEAF_PATH,
    "operator": OPERATOR,
    "cn_table": CN_TABLE,
    "su2_report": SU2_REPORT,
    "verify_report": VERIFY_REPORT,
}
