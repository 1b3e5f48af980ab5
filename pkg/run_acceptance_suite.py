#!/usr/bin/env python3
"""
Quick runner for the acceptance suite simulation
"""

import sys
import os

# Add simulation directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), 'simulation'))

from acceptance_suite_simulator import main

if __name__ == "__main__":
    print("🚀 Starting Damped Wave Lab Acceptance Suite...")
    sys.exit(main())
