import sys

from tdmh.cli import main

sys.exit(main())
