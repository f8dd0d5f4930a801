import sys

from dmac.cli import main

sys.exit(main())
