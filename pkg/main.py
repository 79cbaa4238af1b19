"""NS Blowup - Main entry script.

This script provides an easy entry point for running the command-line tool.
You can run it with: python main.py verify all
"""

import sys

from ns_blowup.__main__ import main

if __name__ == "__main__":
    sys.exit(main())
