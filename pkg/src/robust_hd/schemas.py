"""JSON Schemas (draft 2020-12) for everything the CLI emits."""

from __future__ import annotations

_num = {"type": "number"}
_num_or_null = {"type": ["number", "null"]}
_vec = {"type": "array", "items": _num}

SCHEDULE = {
    "type": "object",
    "required": ["n", "d", "mode", "epsilon", "lower_index", "upper_index", "valid"],
    "properties": {
        "n": {"type": "integer", "minimum": 1},
        "d": {"type": "integer", "minimum": 1},
        "mode": {"enum": ["mean", "covariance"]},
        "eta_bar": _num,
        "lambda1": _num_or_null,
        "lambda2": _num_or_null,
        "epsilon": _num,
        "lower_index": {"type": "integer"},
        "upper_index": {"type": "integer"},
        "valid": {"type": "boolean"},
    },
}

FEASIBILITY = {
    "type": "object",
    "required": ["lhs_value", "threshold", "satisfied", "components"],
    "properties": {
        "lhs_value": _num,
        "threshold": _num,
        "satisfied": {"type": "boolean"},
        "components": _vec,
        "simplified_lhs": _num,
        "simple_lhs": _num,
        "simple_satisfied": {"type": "boolean"},
        "c_constants": {"type": "object"},
    },
}

_feas_or_null = {"anyOf": [FEASIBILITY, {"type": "null"}]}

ESTIMATE = {
    "type": "object",
    "required": ["statistic", "n", "d", "schedule", "values", "sup_norm"],
    "properties": {
        "statistic": {"enum": ["winsorized", "trimmed", "normalized", "sample_mean"]},
        "n": {"type": "integer"},
        "d": {"type": "integer"},
        "schedule": SCHEDULE,
        "covariance_schedule": SCHEDULE,
        "values": {"anyOf": [_vec, {"type": "null"}]},
        "sup_norm": _num_or_null,
        "not_implementable": {"type": "string"},
    },
}

COV = {
    "type": "object",
    "required": ["n", "d", "schedule", "correlation"],
    "properties": {
        "n": {"type": "integer"},
        "d": {"type": "integer"},
        "schedule": SCHEDULE,
        "correlation": {"type": "boolean"},
        "path": {"type": "string"},
        "diagonal": _vec,
        "not_implementable": {"type": "string"},
    },
}

CRITICAL_VALUE = {
    "type": "object",
    "required": ["alpha", "value", "method", "draws", "degenerate"],
    "properties": {
        "alpha": _num,
        "value": _num,
        "method": {"enum": ["closed_form_diagonal", "monte_carlo", "bootstrap"]},
        "draws": {"type": "integer"},
        "degenerate": {"type": "boolean"},
    },
}

BOOTSTRAP = {
    "type": "object",
    "required": ["n", "d", "schedule", "normalized", "seed"],
    "properties": {
        "n": {"type": "integer"},
        "d": {"type": "integer"},
        "schedule": SCHEDULE,
        "normalized": {"type": "boolean"},
        "seed": {"type": "integer"},
        "critical_value": CRITICAL_VALUE,
        "not_implementable": {"type": "string"},
    },
}

DIAGNOSE = {
    "type": "object",
    "required": [
        "n", "d", "mean_schedule", "covariance_schedule", "feasibility",
        "sharp_feasibility", "mean_feasibility", "rates", "c_constant_brackets",
    ],
    "properties": {
        "mean_schedule": SCHEDULE,
        "covariance_schedule": SCHEDULE,
        "feasibility": _feas_or_null,
        "sharp_feasibility": _feas_or_null,
        "mean_feasibility": _feas_or_null,
        "c_constant_brackets": {"type": "array", "items": _num, "minItems": 2, "maxItems": 2},
        "rates": {
            "anyOf": [
                {"type": "object", "additionalProperties": {"type": "number", "minimum": 0}},
                {"type": "null"},
            ]
        },
        "C": _num,
        "m": _num,
    },
}

_freq = {"type": ["number", "null"], "minimum": 0, "maximum": 1}

SUMMARY = {
    "type": "object",
    "required": [
        "config", "schedules", "feasibility", "statistics", "not_implementable",
        "covariance_max_entry_error", "modified_rows", "warnings", "runtime",
    ],
    "properties": {
        "config": {"type": "object", "required": ["n", "d", "replications", "seed"]},
        "schedules": {
            "type": "object",
            "required": ["mean", "covariance"],
            "properties": {"mean": SCHEDULE, "covariance": SCHEDULE},
        },
        "feasibility": {
            "type": "object",
            "required": ["mean_schedule_valid", "covariance_schedule_valid"],
        },
        "statistics": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "required": ["rejection_gaussian", "ks_gaussian", "norm_mean"],
                "properties": {
                    "rejection_gaussian": _freq,
                    "rejection_bootstrap": _freq,
                    "ks_gaussian": _freq,
                    "ks_bootstrap": _freq,
                    "critical_gaussian": _num_or_null,
                    "critical_bootstrap_mean": _num_or_null,
                    "norm_mean": _num,
                    "norm_median": _num,
                    "norm_max": _num,
                },
            },
        },
        "not_implementable": {"type": "object", "additionalProperties": {"type": "string"}},
        "covariance_max_entry_error": {
            "anyOf": [
                {"type": "object", "required": ["median", "mean", "max"]},
                {"type": "null"},
            ]
        },
        "modified_rows": {
            "type": "object",
            "required": ["min", "max"],
            "properties": {"min": {"type": "integer"}, "max": {"type": "integer"}},
        },
        "warnings": {"type": "array", "items": {"type": "string"}},
        "runtime": {
            "type": "object",
            "required": ["seconds", "threads", "replications"],
            "properties": {"seconds": {"type": "number", "minimum": 0}},
        },
        "files": {"type": "array", "items": {"type": "string"}},
    },
}

ERROR = {
    "type": "object",
    "required": ["error", "message", "exit_code"],
    "properties": {
        "error": {"type": "string"},
        "message": {"type": "string"},
        "exit_code": {"enum": [2, 3, 4]},
    },
    "additionalProperties": False,
}

SCHEMAS = {
    "estimate": ESTIMATE,
    "cov": COV,
    "bootstrap": BOOTSTRAP,
    "diagnose": DIAGNOSE,
    "simulate": SUMMARY,
    "error": ERROR,
}
