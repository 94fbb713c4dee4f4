import sys

from mmi.cli import main

sys.exit(main())
