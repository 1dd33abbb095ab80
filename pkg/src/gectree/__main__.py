from gectree.cli import main
import sys

sys.exit(main())
