import sys

from kernmobo.cli import main

sys.exit(main())
