import sys

from abclab.cli import main

sys.exit(main())
