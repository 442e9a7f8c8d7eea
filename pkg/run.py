#!/usr/bin/env python3
"""
licnet
Development launcher, same as `python -m licnet` or the `licnet` script
"""

import sys

from licnet.main import main

if __name__ == "__main__":
    sys.exit(main())
