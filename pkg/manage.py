#!/usr/bin/env python
"""Django's command-line utility; the same entry point as ``bin/ots``."""
import sys


def main():
    try:
        from otsbench.cli import main as run
    except ImportError as exc:
        raise ImportError(
            "Couldn't import Django. Are you sure it's installed and "
            "available on your PYTHONPATH environment variable? Did you "
            "forget to activate a virtual environment?"
        ) from exc
    sys.exit(run(sys.argv))


if __name__ == '__main__':
    main()
