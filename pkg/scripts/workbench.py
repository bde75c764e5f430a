#!/usr/bin/env python3
"""
Run the base-extension semantics workbench from a checkout.

Examples:
    scripts/workbench.py derive --base aristotle --goal "M(s)"
    scripts/workbench.py demo dne-counterexample
"""

import os
import sys

# Add the project root to the path so we can import app modules
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from app.logic.cli import run  # noqa: E402

if __name__ == "__main__":
    sys.exit(run())
