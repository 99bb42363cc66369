import sys

from fracairy.cli import main

sys.exit(main())
