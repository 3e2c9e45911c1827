import sys

from graphprod.cli import main

sys.exit(main())
