from __future__ import annotations

from qc_outliers.cli import main

if __name__ == '__main__':
    main()
