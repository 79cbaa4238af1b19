"""Main entry point for NS Blowup."""

import sys

from ns_blowup.cli import run_cli


def main(argv=None):
    """Main entry point."""
    return run_cli(argv)


if __name__ == "__main__":
    sys.exit(main())
