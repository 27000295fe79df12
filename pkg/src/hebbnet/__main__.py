"""Entry point for python -m hebbnet."""

from hebbnet.cli.main import main

if __name__ == "__main__":
    main()
