import sys

from xrda.cli import main

sys.exit(main())
