"""Quantum-kernel fraud detection toolkit.

Desk-scale pipeline: synthetic payment data, preprocessing, a dense
statevector engine for Z/ZZ feature-map kernels (exact, shot-sampled,
and shot-sampled under readout noise with calibration-matrix
mitigation), an SMO kernel SVM, classical tree baselines, quantum
feature importance selection, fraud KPIs, and a mixed quantum-classical
metaclassifier ensemble.
"""

__version__ = "0.1.0"
