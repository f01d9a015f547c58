import sys

from hrfna.cli import main

sys.exit(main())
