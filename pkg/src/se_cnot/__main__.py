from se_cnot.cli import main
import sys
sys.exit(main())
