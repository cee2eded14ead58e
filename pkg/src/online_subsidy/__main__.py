import sys

from online_subsidy.cli import main

sys.exit(main())
