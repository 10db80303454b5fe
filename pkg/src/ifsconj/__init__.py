"""Conjugacies between overlapping two-branch interval IFSs and their piecewise-linear models."""
