"""Zeno-subspace simulator for NV-mediated nuclear spin gates and state transfer."""

import json as _json

from ._core import (
    Error,
    Frame,
    GateResult,
    QstResult,
    SystemParams,
    TruthRow,
    eig_hermitian,
    format_csv,
    gate_detuning_fidelity,
    gate_truth_table,
    list_experiments,
    propagator,
    run_config,
    run_gate,
    run_qst,
    survival_probability,
    system_hamiltonian,
    zeno_convergence_report,
)

__version__ = "0.1.0"


def run(experiment, **config):
    """Run a named experiment; keyword arguments are config keys."""
    config["experiment"] = experiment
    return run_config(_json.dumps(config))
