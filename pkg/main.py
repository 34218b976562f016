"""
Main command-line entry point
"""
import sys

from app.core.app import run

if __name__ == "__main__":
    sys.exit(run())
