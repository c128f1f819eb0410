import sys

from shrinkprior.cli import main

sys.exit(main())
