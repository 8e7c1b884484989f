import sys

from pathwise.harness.cli import main

sys.exit(main())
