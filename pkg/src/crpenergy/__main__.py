import sys

from crpenergy.cli import main

sys.exit(main())
