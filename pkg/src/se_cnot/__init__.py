"""CNOT gate on the four lowest Rydberg levels of a surface electron on helium.

Submodules
----------
quantum
    dense state/operator helpers, fidelities, matrix exponential
spectrum
    bound states with and without a holding field, two-ripplon decay ratios
driving
    rotating-frame Hamiltonians, dressed states, perturbative eigenvalues
dynamics
    master-equation, no-jump and closed-form time evolution
gate
    gate assembly, analytic gate matrix, fidelity tables
cli
    command line front end
"""

__version__ = "0.1.0"
