import sys

from dioph.cli import main

sys.exit(main())
