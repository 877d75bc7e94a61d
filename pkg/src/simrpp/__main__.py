import sys

from simrpp.cli import main

sys.exit(main())
