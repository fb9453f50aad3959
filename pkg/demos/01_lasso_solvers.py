# Solve one l1-regularized least-squares instance with each solver and
# compare their convergence traces.

import numpy as np

from mgprox import (
    ExperimentSpec,
    SolverConfig,
    agm,
    fista,
    gen_instance,
    gradient_mapping,
    ista,
    subgradient_residual,
)

# A correlated dictionary with a planted 5-sparse signal.
spec = ExperimentSpec(m=150, n=80, rho=0.5, k_true=5, noise=0.01, seed=42,
                      lam=0.01)
problem, x_true, _ = gen_instance(spec)
print(f"instance: {spec.m}x{spec.n}, rho={spec.rho}, lam={spec.lam}, "
      f"L_f={problem.L_f:.2f}")

config = SolverConfig(eps=1e-8, max_iters=20000)
x0 = np.zeros(problem.dim)

for name, solver in (("ista", ista), ("fista", fista), ("agm", agm)):
    sol = solver(problem, x0, config)
    print(f"{name:>6}: converged={sol.converged} iterations={sol.iterations} "
          f"F={sol.objective:.10f} ||D||={sol.grad_map_norm:.2e} "
          f"time={sol.elapsed_s:.3f}s")

# The solution is optimal by two independent measures: the prox-based
# gradient mapping and the subgradient inclusion residual.
sol = fista(problem, x0, config)
print("gradient-mapping norm :", np.linalg.norm(gradient_mapping(problem, sol.x)))
print("subgradient residual  :", subgradient_residual(problem, sol.x))

# Recovered support vs the planted one.
support = [int(j) for j in np.flatnonzero(np.abs(sol.x) > 1e-4)]
print("planted support       :", [int(j) for j in np.flatnonzero(x_true)])
print("recovered support     :", support)
