import sys

from ropack.cli import main

sys.exit(main())
