#!/usr/bin/env python3
"""
Launcher for the pirogov CLI.
This script sets up the proper path and runs the click group from backend/pirogov/
"""
import os
import sys

# Add the backend directory to Python path
backend_dir = os.path.join(os.path.dirname(__file__), 'backend')
sys.path.insert(0, backend_dir)

from pirogov.main import cli

if __name__ == "__main__":
    cli()
