import sys

from waveobs.cli import main

sys.exit(main())
