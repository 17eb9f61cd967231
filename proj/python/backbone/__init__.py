"""Backbone protocol simulator and bound calculator.

Configs are plain dicts following the documented JSON schema; a missing
``schema_version`` is filled in. Records come back as dicts.
"""

import json

from . import _backbone
from ._backbone import (
    SCHEMA_VERSION,
    BoundError,
    ConfigError,
    ParamError,
    eta_of,
    eta_prime_of,
    p_for_q,
    q_of,
    xi_of,
)

__all__ = [
    "SCHEMA_VERSION",
    "BoundError",
    "ConfigError",
    "ParamError",
    "bounds_table",
    "derive",
    "eta_of",
    "eta_prime_of",
    "event_frequency",
    "lipschitz_check",
    "p_for_q",
    "q_of",
    "report_probability",
    "report_wait",
    "simulate",
    "simulate_record",
    "validate",
    "verify",
    "xi_of",
]


def _config(config):
    config = dict(config)
    config.setdefault("schema_version", SCHEMA_VERSION)
    return json.dumps(config)


def derive(params, unsafe=False):
    """Derived constants (beta, xi, q, eta, eta_prime, y_rate, admissibility)."""
    return json.loads(_backbone.derive_json(json.dumps(params), unsafe))


def report_probability(formula_id, arg, params):
    return _backbone.report_probability(formula_id, arg, json.dumps(params))


def report_wait(formula_id, eps, params, model="sync"):
    return _backbone.report_wait(formula_id, eps, json.dumps(params), model)


def bounds_table(config):
    return _backbone.bounds_table(_config(config))


def validate(config):
    """Returns (normalized config dict, warnings); raises ConfigError."""
    normalized, warnings = _backbone.validate(_config(config))
    return json.loads(normalized), warnings


def simulate_record(config, trial=0):
    return json.loads(_backbone.simulate_record(_config(config), trial))


def simulate(config, records=False):
    """Runs the configured trials and suites; with records=True also returns
    every record as a dict under "records", in trial order."""
    summary, dumps = _backbone.simulate(_config(config), records)
    out = json.loads(summary)
    if records:
        out["records"] = [json.loads(d) for d in dumps]
    return out


def verify(config, suites=()):
    return _backbone.verify(_config(config), list(suites))


def event_frequency(event, span, params, trials, threads=0):
    return json.loads(_backbone.event_frequency(event, span, json.dumps(params), trials, threads))


def lipschitz_check(windows, seed=0, threads=0):
    keys = ("windows", "x_violations", "y_violations", "max_dx", "max_dy")
    return dict(zip(keys, _backbone.lipschitz_check(windows, seed, threads)))
