import sys

from loglinclp.cli import main

sys.exit(main())
