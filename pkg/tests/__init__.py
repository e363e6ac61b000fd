"""
Test suite for morse-witten-lab.

Test Structure:
- tests/unit/ - Unit tests for individual services, models and components
- tests/integration/ - Pipelines, orchestration and the command line
- tests/performance/ - Acceptance sweeps on fine grids (run with -m performance)
- tests/factories.py - factory-boy factories for points, configs and complexes
"""
