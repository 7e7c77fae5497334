"""Allow `python -m walklab`."""

import sys

from walklab.cli.main import main

sys.exit(main())
