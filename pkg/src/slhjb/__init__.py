"""Semi-Lagrangian value iteration for HJB equations with nonsmooth local minimization."""
