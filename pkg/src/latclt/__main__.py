"""Entry point for running latclt as a module."""

from latclt.main import main

if __name__ == "__main__":
    raise SystemExit(main())
