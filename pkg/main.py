#!/usr/bin/env python
"""
Magnus Walks Main Entry Point
=============================

Run with: python main.py <command> [options]
"""

import sys
from pathlib import Path

current_dir = Path(__file__).parent
sys.path.insert(0, str(current_dir))


def check_dependencies():
    """Check if required dependencies are available"""
    missing_deps = []

    try:
        import rich  # noqa: F401
    except ImportError:
        missing_deps.append("rich")

    try:
        import numpy  # noqa: F401
    except ImportError:
        missing_deps.append("numpy")

    try:
        import scipy  # noqa: F401
    except ImportError:
        missing_deps.append("scipy")

    try:
        import sympy  # noqa: F401
    except ImportError:
        missing_deps.append("sympy")

    return missing_deps


def show_dependency_error(missing_deps):
    """Show user-friendly dependency error message (stderr; stdout carries data)"""
    out = sys.stderr
    print("=" * 60, file=out)
    print("❌ MISSING DEPENDENCIES", file=out)
    print("=" * 60, file=out)
    print(file=out)
    print("The following Python packages are required but not installed:", file=out)
    for dep in missing_deps:
        print(f"  • {dep}", file=out)
    print(file=out)
    print("📥 TO INSTALL:", file=out)
    print("  pip install -r requirements.txt", file=out)
    print("  or", file=out)
    print("  pip install " + " ".join(missing_deps), file=out)
    print("=" * 60, file=out)


def main():
    missing_deps = check_dependencies()
    if missing_deps:
        show_dependency_error(missing_deps)
        return 1

    from core.cli import main as cli_main

    try:
        return cli_main(sys.argv[1:])
    except KeyboardInterrupt:
        print("👋 cancelled by user (Ctrl+C)", file=sys.stderr)
        return 130


if __name__ == "__main__":
    sys.exit(main())
