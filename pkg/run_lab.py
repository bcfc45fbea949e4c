"""Script to run the laboratory without installing the package."""
import sys

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
