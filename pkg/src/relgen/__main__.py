import sys

from relgen.cli import main

sys.exit(main())
