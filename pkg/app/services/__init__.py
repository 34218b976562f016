"""
Service layer - channel generation, solvers, search and experiments
"""
