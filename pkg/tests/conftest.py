from __future__ import annotations

import numpy as np
import pytest

from ppotential import SolverOptions, generate, solve_dirichlet


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # First solve triggers JIT compilation of the relaxation kernels; do it
    # once up front so individual test timings reflect the algorithms.
    g = generate("path", 2)
    data = np.array([0.0, 0.0, 1.0])
    opts = SolverOptions(max_sweeps=50)
    solve_dirichlet(g, [1], data, 2.0, opts)
    solve_dirichlet(g, [1], data, 1.5, opts)
    solve_dirichlet(g, [1], data, 3.0, opts)
