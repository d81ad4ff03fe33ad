import sys

from gaborfit.cli import main

sys.exit(main())
