"""Run the command line with `python -m fermion_sewing`."""

from .cli import main

raise SystemExit(main())
