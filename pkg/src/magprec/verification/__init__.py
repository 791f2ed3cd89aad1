"""Dense-state oracle and the randomized equivalence suite."""
