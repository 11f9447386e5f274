"""Statevector simulation of layered rotation circuits and Pauli observables."""

from .circuit import MAX_QUBITS, AnsatzCircuit, Gate, build_ansatz, ring_edges
from .pauli import DENSE_QUBIT_CAP, MeasurementGroup, PauliObservable, eigen_bounds
from .simulator import (
    NoiseModel,
    SampleResult,
    StateVector,
    apply_circuit,
    expectation,
    expectation_batch,
    sample_batch,
    sample_expectation,
    simulate,
    summarize,
)

__all__ = [
    "MAX_QUBITS",
    "DENSE_QUBIT_CAP",
    "AnsatzCircuit",
    "Gate",
    "MeasurementGroup",
    "NoiseModel",
    "PauliObservable",
    "SampleResult",
    "StateVector",
    "apply_circuit",
    "build_ansatz",
    "eigen_bounds",
    "expectation",
    "expectation_batch",
    "ring_edges",
    "sample_batch",
    "sample_expectation",
    "simulate",
    "summarize",
]
