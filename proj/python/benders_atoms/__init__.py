"""Hybrid Benders decomposition for binary-continuous MILPs.

Instances are plain dicts with keys n, p, m1, m2, A, G, b, B, b_prime, c, h.
"""

import json

from . import _core
from ._core import Error, exact_minimize

__all__ = [
    "Error",
    "brute_force",
    "exact_minimize",
    "first_qubo",
    "generate",
    "proof_of_concept",
    "solve",
]


def proof_of_concept():
    return json.loads(_core.proof_of_concept_json())


def generate(count, seed=1):
    return json.loads(_core.generate_json(count, seed))


def brute_force(instance):
    return json.loads(_core.brute_force_json(json.dumps(instance)))


def solve(instance, sampler="exact", seed=1, shots=500, epsilon=0.5, max_qubits=64, max_iterations=50):
    """Run the hybrid loop. Returns status, objective, x, y, iterations and the per-iteration trace."""
    text = _core.solve_json(json.dumps(instance), sampler, seed, shots, epsilon, max_qubits, max_iterations)
    return json.loads(text)


def first_qubo(instance, epsilon=0.5):
    """(Q, constant) of the first master problem, cost z'Qz + constant."""
    return _core.first_qubo(json.dumps(instance), epsilon)
