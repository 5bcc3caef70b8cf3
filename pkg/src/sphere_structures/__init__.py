# src/sphere_structures/__init__.py
