"""
Domain types: enums, exceptions, numerical objects and experiment models
"""
