"""Allow `python -m qforage ...` to behave exactly like the `qforage` script."""

import sys

from .cli import main

if __name__ == "__main__":
    sys.exit(main())
