"""Compound Poisson visit statistics: limit laws and simulation."""

import json as _json

from ._core import (
    VisitlabError,
    __version__,
    build_qdelta,
    config_hash as _config_hash,
    cp_pmf,
    cp_sample,
    geometric_alpha,
    pa_pmf,
    predict_furstenberg,
    predict_hoc,
    predict_param_coupling,
    predict_sync_markov,
    renewal_ratio_sequence,
    run as _run,
    spectral_radius,
    tv_distance,
)


def config_hash(config):
    return _config_hash(_json.dumps(config))


def run(verb, config):
    """Run a verb on a config dict; returns (report, csv_tables, exit_code)."""
    report, tables, code = _run(verb, _json.dumps(config))
    return _json.loads(report), tables, code


__all__ = [
    "VisitlabError",
    "build_qdelta",
    "config_hash",
    "cp_pmf",
    "cp_sample",
    "geometric_alpha",
    "pa_pmf",
    "predict_furstenberg",
    "predict_hoc",
    "predict_param_coupling",
    "predict_sync_markov",
    "renewal_ratio_sequence",
    "run",
    "spectral_radius",
    "tv_distance",
]
