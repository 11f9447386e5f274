"""Layered hardware-efficient ansatz circuits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_QUBITS = 10


@dataclass(frozen=True)
class Gate:
    """One gate record.

    Rotations are ``exp(-i angle/2 sigma_axis)``. A rotation either reads
    its angle from the parameter vector (``param`` set) or carries a fixed
    ``angle`` (``param`` is None).
    """

    kind: str  # "rotation" or "cz"
    qubits: tuple[int, ...]
    axis: str | None = None
    param: int | None = None
    angle: float = 0.0

    @property
    def is_rotation(self) -> bool:
        return self.kind == "rotation"


@dataclass(frozen=True)
class AnsatzCircuit:
    n_qubits: int
    depth: int
    gates: tuple[Gate, ...]
    param_count: int

    def __post_init__(self):
        seen = np.zeros(self.param_count, dtype=int)
        for gate in self.gates:
            if gate.kind == "rotation":
                if gate.axis not in ("x", "y", "z"):
                    raise ValueError(f"bad rotation axis {gate.axis!r}")
                if gate.param is not None:
                    if not 0 <= gate.param < self.param_count:
                        raise ValueError(f"parameter index {gate.param} out of range")
                    seen[gate.param] += 1
            elif gate.kind == "cz":
                if len(gate.qubits) != 2 or gate.qubits[0] == gate.qubits[1]:
                    raise ValueError(f"bad entangler qubits {gate.qubits}")
            else:
                raise ValueError(f"unknown gate kind {gate.kind!r}")
            if any(not 0 <= q < self.n_qubits for q in gate.qubits):
                raise ValueError(f"gate {gate} acts outside the register")
        if np.any(seen != 1):
            # the shift rule needs every angle to enter through exactly one rotation
            raise ValueError("every parameter must drive exactly one rotation gate")

    @property
    def n_rotations(self) -> int:
        return sum(g.is_rotation for g in self.gates)

    @property
    def n_entanglers(self) -> int:
        return sum(g.kind == "cz" for g in self.gates)

    def bound_inverse(self, theta: np.ndarray) -> tuple[Gate, ...]:
        """Gates of U(theta)^dag with every angle frozen: reversed and negated."""
        theta = np.asarray(theta, dtype=float)
        if theta.shape != (self.param_count,):
            raise ValueError(f"expected {self.param_count} angles, got shape {theta.shape}")
        out = []
        for gate in reversed(self.gates):
            if gate.is_rotation:
                angle = theta[gate.param] if gate.param is not None else gate.angle
                out.append(Gate("rotation", gate.qubits, gate.axis, None, -float(angle)))
            else:
                out.append(gate)
        return tuple(out)

    def followed_by(self, gates: tuple[Gate, ...]) -> "AnsatzCircuit":
        """Append fixed gates (no new parameters) after this circuit."""
        if any(g.param is not None for g in gates):
            raise ValueError("appended gates must not reference parameters")
        return AnsatzCircuit(self.n_qubits, self.depth, self.gates + tuple(gates), self.param_count)


def ring_edges(n: int) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs (i, i+1 mod n) without duplicates."""
    edges: list[tuple[int, int]] = []
    for i in range(n):
        e = (i, (i + 1) % n)
        if e[0] != e[1] and (e[1], e[0]) not in edges and e not in edges:
            edges.append(e)
    return edges


def build_ansatz(n: int, depth: int, max_qubits: int = MAX_QUBITS) -> AnsatzCircuit:
    """Ry-Rz layer on every qubit, then ``depth`` blocks of (CZ ring, Ry-Rz layer).

    The parameter count is ``2 * n * (depth + 1)``.
    """
    if n < 1:
        raise ValueError("need at least one qubit")
    if depth < 0:
        raise ValueError("depth must be non-negative")
    if n > max_qubits:
        raise ValueError(f"{n} qubits exceeds the configured maximum of {max_qubits}")

    gates: list[Gate] = []
    p = 0

    def rotation_layer():
        nonlocal p
        for q in range(n):
            for axis in ("y", "z"):
                gates.append(Gate("rotation", (q,), axis, p))
                p += 1

    rotation_layer()
    for _ in range(depth):
        for i, j in ring_edges(n):
            gates.append(Gate("cz", (i, j)))
        rotation_layer()
    return AnsatzCircuit(n, depth, tuple(gates), p)
