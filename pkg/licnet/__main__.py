import sys

from licnet.main import main

sys.exit(main())
