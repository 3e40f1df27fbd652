"""Allow `python -m mesq`."""

import sys

from mesq.main import main

sys.exit(main())
