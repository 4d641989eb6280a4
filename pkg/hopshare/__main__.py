import sys

from hopshare.cli import main

sys.exit(main())
